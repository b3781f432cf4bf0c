"""Parallel replica engine for hull-functional estimation.

Replicas are embarrassingly parallel: replica i draws its path from its own
counter-based stream keyed by (master_seed, i), workers fill a result array
indexed by replica, and all aggregation happens over that array in index
order.  Reports are therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ResourceLimitError
from .geometry import area, perimeter
from .oracles import asymptotic_predictions
from .rng import replica_stream, validate_seed
from .walks import (
    BUILTIN_MODELS,
    CHUNK_STEPS,
    Gaussian,
    IncrementModel,
    MAX_FULL_PATH,
    describe_model,
    increment_stats,
    walk_hull,
)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile

VALID_METRICS = ("L", "A", "max_norm", "max_proj")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation experiment: model, scale, replication, seed."""

    model: IncrementModel
    n: int
    replicas: int
    master_seed: int
    outputs: tuple[str, ...] = ("L", "A")
    max_norm_exponent: float = 2.0
    n_grid: Optional[tuple[int, ...]] = None
    ks_reference: bool = False
    threads: Optional[int] = None
    max_memory_bytes: int = 4 << 30

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        if self.replicas < 2:
            raise ValueError("need >= 2 replicas for variance")
        validate_seed(self.master_seed)
        for m in self.outputs:
            if m not in VALID_METRICS:
                raise ValueError(f"unknown output metric {m!r}")
        if not self.outputs:
            raise ValueError("no outputs requested")
        if self.n_grid is not None:
            if any(g < 1 for g in self.n_grid):
                raise ValueError("n_grid entries must be >= 1")


@dataclass(frozen=True)
class MetricSummary:
    """Replica-level sample statistics for one functional."""

    mean: float
    variance: float
    mean_ci_half: float
    var_ci_half: float
    replicas: int


@dataclass(frozen=True)
class ScaledEstimate:
    """A scaled estimator n**-exponent * stat / divisor and its limit."""

    source: str
    exponent: float
    divisor: float
    value: float
    ci_half: float
    target: Optional[float]
    reference: Optional[float]


@dataclass(frozen=True)
class EstimatorReport:
    model: dict
    n: int
    replicas: int
    master_seed: int
    outputs: tuple[str, ...]
    metrics: dict[str, MetricSummary]
    scaled: dict[str, ScaledEstimate]
    wall_time_s: float
    workers: int
    engine_version: str = __version__


@dataclass(frozen=True)
class Sample:
    """A sorted sample of a scalar functional."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        if v.size == 0:
            raise ValueError("empty sample")
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return int(self.values.size)


def _resolve_workers(threads: Optional[int]) -> int:
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be >= 1")
        return threads
    return os.cpu_count() or 1


def _check_memory(n: int, replicas: int, n_metrics: int, workers: int, cap: int):
    path_steps = min(n, CHUNK_STEPS) if n > MAX_FULL_PATH else n
    # steps + partial sums per in-flight replica, plus the result arrays
    need = workers * (path_steps + 1) * 2 * 8 * 2 + replicas * n_metrics * 8
    if need > cap:
        raise ResourceLimitError(
            f"experiment needs ~{need / 2**20:.0f} MiB, cap is {cap / 2**20:.0f} MiB"
        )


def _block_worker(task) -> tuple[int, dict[str, np.ndarray]]:
    model, n, master_seed, lo, hi, metrics, p = task
    stats = increment_stats(model)
    want_norms = "max_norm" in metrics or "max_proj" in metrics
    out = {m: np.empty(hi - lo) for m in metrics}
    for i in range(lo, hi):
        stream = replica_stream(master_seed, i)
        hull, max_norm, max_proj = walk_hull(
            model, n, stream, track_norms=want_norms, mu_hat=stats.mu_hat
        )
        j = i - lo
        if "L" in out:
            out["L"][j] = perimeter(hull)
        if "A" in out:
            out["A"][j] = area(hull)
        if "max_norm" in out:
            out["max_norm"][j] = max_norm**p
        if "max_proj" in out:
            out["max_proj"][j] = max_proj**p
    return lo, out


def sample_functionals(
    model: IncrementModel,
    n: int,
    replicas: int,
    master_seed: int,
    metrics: Sequence[str] = ("L", "A"),
    threads: Optional[int] = None,
    max_norm_exponent: float = 2.0,
    max_memory_bytes: int = 4 << 30,
) -> dict[str, np.ndarray]:
    """Per-replica functional values, ordered by replica index.

    The result is a pure function of (model, n, replicas, master_seed,
    metrics, max_norm_exponent); the worker count only affects wall time.
    """
    workers = _resolve_workers(threads)
    _check_memory(n, replicas, len(metrics), workers, max_memory_bytes)
    metrics = tuple(metrics)
    results = {m: np.empty(replicas) for m in metrics}
    block = max(1, min(4096, -(-replicas // (workers * 4))))
    tasks = [
        (model, n, master_seed, lo, min(lo + block, replicas), metrics, max_norm_exponent)
        for lo in range(0, replicas, block)
    ]
    if workers == 1 or len(tasks) == 1:
        filled = map(_block_worker, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        filled = pool.map(_block_worker, tasks)
    for lo, out in filled:
        for m, vals in out.items():
            results[m][lo : lo + len(vals)] = vals
    if workers > 1 and len(tasks) > 1:
        pool.shutdown()
    return results


def summarize(values: np.ndarray) -> MetricSummary:
    """Mean and unbiased variance with normal-approximation 95% CIs.

    The CI for the variance uses the fourth-central-moment plug-in for
    Var(s^2); adequate at the replica counts this engine runs.
    """
    v = np.asarray(values, dtype=float)
    r = v.size
    if r < 2:
        raise ValueError("need >= 2 values")
    mean = float(v.mean())
    var = float(v.var(ddof=1))
    m4 = float(np.mean((v - mean) ** 4))
    var_of_var = max((m4 - (r - 3) / (r - 1) * var * var) / r, 0.0)
    return MetricSummary(
        mean=mean,
        variance=var,
        mean_ci_half=_Z95 * math.sqrt(var / r),
        var_ci_half=_Z95 * math.sqrt(var_of_var),
        replicas=r,
    )


_SCALED_NAMES = {
    (False, "mean_L"): "scaled_mean_L",
    (False, "mean_A"): "scaled_mean_A",
    (False, "var_L"): "u0_hat",
    (False, "var_A"): "v0_hat",
    (True, "mean_L"): "scaled_mean_L",
    (True, "mean_A"): "scaled_mean_A",
    (True, "var_L"): "scaled_var_L",
    (True, "var_A"): "vplus_hat",
}


def report_from_samples(
    config: ExperimentConfig,
    samples: dict[str, np.ndarray],
    wall_time_s: float,
    workers: int,
) -> EstimatorReport:
    """Aggregate per-replica samples into the estimator report."""
    stats = increment_stats(config.model)
    preds = asymptotic_predictions(stats)
    metrics = {m: summarize(vals) for m, vals in samples.items()}
    scaled: dict[str, ScaledEstimate] = {}
    for key, pred in preds.items():
        stat, quantity = key.split("_")
        if quantity not in metrics:
            continue
        summ = metrics[quantity]
        denom = config.n**pred.exponent * pred.divisor
        raw, ci = (summ.mean, summ.mean_ci_half) if stat == "mean" else (
            summ.variance,
            summ.var_ci_half,
        )
        name = _SCALED_NAMES[(stats.has_drift, key)]
        if key == "var_A" and pred.target == 0.0:
            name = "scaled_var_A"  # flat-hull walks: v-constants undefined
        scaled[name] = ScaledEstimate(
            source=key,
            exponent=pred.exponent,
            divisor=pred.divisor,
            value=raw / denom,
            ci_half=ci / denom,
            target=pred.target,
            reference=pred.reference,
        )
    return EstimatorReport(
        model=describe_model(config.model),
        n=config.n,
        replicas=config.replicas,
        master_seed=config.master_seed,
        outputs=config.outputs,
        metrics=metrics,
        scaled=scaled,
        wall_time_s=wall_time_s,
        workers=workers,
    )


def run_experiment(config: ExperimentConfig) -> EstimatorReport:
    """Run all replicas and aggregate; deterministic for a fixed seed."""
    workers = _resolve_workers(config.threads)
    t0 = time.perf_counter()
    samples = sample_functionals(
        config.model,
        config.n,
        config.replicas,
        config.master_seed,
        metrics=config.outputs,
        threads=config.threads,
        max_norm_exponent=config.max_norm_exponent,
        max_memory_bytes=config.max_memory_bytes,
    )
    return report_from_samples(config, samples, time.perf_counter() - t0, workers)


REFERENCE_KINDS = {
    # (model, functional, scaling exponent)
    "ell1": ("gaussian_identity", "L", 0.5),
    "a1": ("gaussian_identity", "A", 1.0),
    "atilde1": ("spacetime_gauss", "A", 1.5),
}


def brownian_reference(
    m: int,
    replicas: int,
    kind: str,
    master_seed: int,
    threads: Optional[int] = None,
) -> Sample:
    """Sample the Brownian limit functional via a fine reference walk.

    ell1 / a1 use a driftless standard Gaussian walk of length m; atilde1
    uses the space-time Gaussian walk.  The scaled walk functionals converge
    weakly to the Brownian hull functionals, so for large m these samples
    serve as the reference distribution.
    """
    if kind not in REFERENCE_KINDS:
        raise ValueError(f"unknown reference kind {kind!r}")
    if m < 1000:
        raise ValueError("reference walk needs m >= 1000")
    which, metric, exponent = REFERENCE_KINDS[kind]
    if which == "gaussian_identity":
        model: IncrementModel = Gaussian(mean=(0.0, 0.0), cov=((1.0, 0.0), (0.0, 1.0)))
    else:
        model = BUILTIN_MODELS["spacetime_gauss"]
    vals = sample_functionals(
        model, m, replicas, master_seed, metrics=(metric,), threads=threads
    )[metric]
    return Sample(vals / m**exponent)


def ks_distance(a: Sample, b: Sample) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|."""
    xs = np.concatenate([a.values, b.values])
    fa = np.searchsorted(a.values, xs, side="right") / a.count
    fb = np.searchsorted(b.values, xs, side="right") / b.count
    return float(np.abs(fa - fb).max())


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of log E[max-functional] against log n."""

    slope: Optional[float]
    stderr: Optional[float]
    degenerate: bool
    n_grid: tuple[int, ...]
    means: tuple[float, ...]


def moment_growth_diagnostic(
    model: IncrementModel,
    p: float,
    n_grid: Sequence[int],
    replicas: int,
    master_seed: int,
    threads: Optional[int] = None,
) -> SlopeFit:
    """Empirical growth exponent of E[max_m |S_m|^p] along a length grid.

    Driftless walks are measured in the full norm (expected slope p/2);
    drifting walks in the projection on the drift direction (expected
    slope p).  All-zero maxima are reported as degenerate, not an error.
    """
    if p not in (2, 4):
        raise ValueError("p must be 2 or 4")
    grid = tuple(int(g) for g in n_grid)
    if len(grid) < 4 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("degenerate grid: need >= 4 strictly increasing lengths")
    stats = increment_stats(model)
    metric = "max_proj" if stats.has_drift else "max_norm"
    means = []
    for n in grid:
        vals = sample_functionals(
            model, n, replicas, master_seed, metrics=(metric,),
            threads=threads, max_norm_exponent=p,
        )[metric]
        means.append(float(vals.mean()))
    if any(v <= 0.0 for v in means):
        return SlopeFit(None, None, True, grid, tuple(means))
    x = np.log(np.asarray(grid, dtype=float))
    y = np.log(np.asarray(means))
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    resid = y - y.mean() - slope * xc
    dof = len(grid) - 2
    stderr = float(math.sqrt(max(resid @ resid, 0.0) / dof / (xc @ xc)))
    return SlopeFit(slope, stderr, False, grid, tuple(means))


def snyder_steele_check(report: EstimatorReport, stats) -> tuple[bool, float]:
    """Check n^-1 Var L_n against the pi^2 sigma^2 / 2 bound.

    Allows three CI half-widths of estimator slack; returns (ok, slack).
    """
    if "L" not in report.metrics:
        raise ValueError("report carries no perimeter variance")
    summ = report.metrics["L"]
    scaled_var = summ.variance / report.n
    bound = 0.5 * math.pi**2 * stats.sigma2
    slack = bound + 3.0 * summ.var_ci_half / report.n - scaled_var
    return slack >= 0.0, float(slack)
