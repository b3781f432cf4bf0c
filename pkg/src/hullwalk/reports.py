"""Report emission: tidy CSV, JSON reports, run manifests, and figures.

The CSV is the machine-readable product (full-precision, locale-free,
byte-stable for a fixed seed); figures are rendered next to it for quick
inspection of convergence and of sample hulls.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .geometry import convex_hull
from .montecarlo import EstimatorReport, Sample
from .rng import replica_stream
from .walks import IncrementModel, sample_path

CSV_COLUMNS = (
    "n",
    "metric",
    "estimate",
    "ci_half_width",
    "scaled_estimate",
    "scaled_target_if_known",
)

_METRIC_ORDER = ("L", "A", "max_norm", "max_proj")


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def metric_rows(report: EstimatorReport) -> list[dict]:
    """Flatten one report into CSV rows (mean and variance per metric)."""
    by_source = {s.source: s for s in report.scaled.values()}
    rows = []
    for metric in _METRIC_ORDER:
        if metric not in report.metrics:
            continue
        summ = report.metrics[metric]
        for stat, est, ci in (
            ("mean", summ.mean, summ.mean_ci_half),
            ("var", summ.variance, summ.var_ci_half),
        ):
            scaled = by_source.get(f"{stat}_{metric}")
            rows.append(
                {
                    "n": report.n,
                    "metric": f"{stat}_{metric}",
                    "estimate": _fmt(est),
                    "ci_half_width": _fmt(ci),
                    "scaled_estimate": _fmt(scaled.value) if scaled else "",
                    "scaled_target_if_known": _fmt(scaled.target)
                    if scaled and scaled.target is not None
                    else "",
                }
            )
    return rows


def write_metrics_csv(path: Path, reports: Sequence[EstimatorReport]) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for report in reports:
        for row in metric_rows(report):
            lines.append(",".join(str(row[c]) for c in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run's data files byte for byte."""

    subcommand: str
    config_path: Optional[str]
    resolved_config: dict
    output_paths: list[str]
    started_at: str
    finished_at: str
    engine_version: str
    master_seed: int


def make_manifest(
    subcommand: str,
    config_path: Optional[str],
    resolved_config: dict,
    output_paths: Sequence[Path],
    started_at: datetime,
    master_seed: int,
) -> RunManifest:
    return RunManifest(
        subcommand=subcommand,
        config_path=str(config_path) if config_path else None,
        resolved_config=resolved_config,
        output_paths=[str(p) for p in output_paths],
        started_at=started_at.isoformat(),
        finished_at=datetime.now(timezone.utc).isoformat(),
        engine_version=__version__,
        master_seed=master_seed,
    )


def _mpl():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_walk_figure(model: IncrementModel, n: int, master_seed: int, path: Path) -> None:
    """One sample path with its hull overlaid; replica 0 of the seed."""
    plt = _mpl()
    n_draw = min(n, 20000)
    pts = sample_path(model, n_draw, replica_stream(master_seed, 0)).points
    hull = convex_hull(pts)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.plot(pts[:, 0], pts[:, 1], lw=0.4, color="#446688", alpha=0.8)
    if len(hull.vertices) >= 2:
        hx = [v.x for v in hull.vertices] + [hull.vertices[0].x]
        hy = [v.y for v in hull.vertices] + [hull.vertices[0].y]
        ax.plot(hx, hy, lw=1.6, color="#aa3311")
    ax.plot([0], [0], "ko", ms=4)
    ax.set_aspect("equal")
    ax.set_title(f"sample walk, n={n_draw}, and its convex hull")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence_figure(reports: Sequence[EstimatorReport], path: Path) -> None:
    """Scaled estimates with CIs against n; dashed lines mark known limits."""
    plt = _mpl()
    names: list[str] = []
    for rep in reports:
        for name in rep.scaled:
            if name not in names:
                names.append(name)
    cols = len(names)
    fig, axes = plt.subplots(1, cols, figsize=(3.2 * cols, 3.2), squeeze=False)
    for ax, name in zip(axes[0], names):
        ns, vals, cis, target, ref = [], [], [], None, None
        for rep in reports:
            est = rep.scaled.get(name)
            if est is None:
                continue
            ns.append(rep.n)
            vals.append(est.value)
            cis.append(est.ci_half)
            target = est.target if est.target is not None else target
            ref = est.reference if est.reference is not None else ref
        ax.errorbar(ns, vals, yerr=cis, fmt="o-", ms=3, lw=1, capsize=2)
        if target is not None:
            ax.axhline(target, ls="--", lw=1, color="#aa3311", label="limit")
            ax.legend(fontsize=7)
        elif ref is not None:
            ax.axhline(ref, ls=":", lw=1, color="#777777", label="reference")
            ax.legend(fontsize=7)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_title(name, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_reference_hist(sample: Sample, target: float, kind: str, path: Path) -> None:
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.hist(sample.values, bins=60, density=True, color="#446688", alpha=0.85)
    ax.axvline(target, ls="--", color="#aa3311", lw=1.2, label="limit mean")
    ax.axvline(float(sample.values.mean()), ls="-", color="#222222", lw=1, label="sample mean")
    ax.set_title(f"reference sample: {kind}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_sample_csv(path: Path, sample: Sample) -> None:
    lines = ["value"] + [repr(float(v)) for v in sample.values]
    path.write_text("\n".join(lines) + "\n")
