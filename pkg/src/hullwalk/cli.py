"""Command-line surface: simulate | exact | bounds | check | reference.

Exit codes: 0 ok, 1 check/acceptance failure, 2 usage or config error,
3 resource limit (enumeration overflow, memory cap).
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import __version__, checks, oracles, reports, walks
from .errors import ConfigError, EnumerationOverflowError, ResourceLimitError
from .montecarlo import ExperimentConfig, brownian_reference, run_experiment
from .oracles import AtomWalkTable, REFERENCE_TARGETS
from .walks import Atoms, BUILTIN_MODELS, Gaussian, SpaceTime


@dataclass(frozen=True)
class SimulationSpec:
    model: walks.IncrementModel
    n_list: tuple[int, ...]
    replicas: int
    seed: int
    outputs: tuple[str, ...]
    max_norm_exponent: float
    threads: Optional[int]
    max_memory_bytes: int
    plots: bool


def _floats(text: str, where: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None


def _tuples(text: str, arity: int, where: str) -> list[tuple[float, ...]]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        vals = _floats(part, where)
        if len(vals) != arity:
            raise ConfigError(f"{where}: expected {arity} numbers per entry, got {part!r}")
        out.append(tuple(vals))
    if not out:
        raise ConfigError(f"{where}: empty list")
    return out


def _parse_model(cfg: configparser.ConfigParser) -> walks.IncrementModel:
    if not cfg.has_section("model"):
        raise ConfigError("missing [model] section")
    sec = cfg["model"]
    if "name" in sec:
        name = sec["name"].strip()
        if name not in BUILTIN_MODELS:
            raise ConfigError(
                f"[model] name: unknown builtin {name!r} "
                f"(have {', '.join(BUILTIN_MODELS)})"
            )
        return BUILTIN_MODELS[name]
    kind = sec.get("kind", "").strip()
    try:
        if kind == "atoms":
            entries = _tuples(sec.get("atoms", ""), 3, "[model] atoms")
            return Atoms(tuple((p, (x, y)) for p, x, y in entries))
        if kind == "gaussian":
            mean = _floats(sec.get("mean", "0 0"), "[model] mean")
            cov = _tuples(sec.get("cov", ""), 2, "[model] cov")
            if len(mean) != 2 or len(cov) != 2:
                raise ConfigError("[model] gaussian needs 2-vector mean and 2x2 cov")
            return Gaussian(mean=(mean[0], mean[1]), cov=(cov[0], cov[1]))
        if kind == "spacetime":
            vertical = sec.get("vertical", "").split(None, 1)
            if len(vertical) != 2:
                raise ConfigError("[model] vertical: expected 'normal MEAN VAR' or 'atoms P Y; ...'")
            law, rest = vertical
            if law == "normal":
                mv = _floats(rest, "[model] vertical")
                if len(mv) != 2:
                    raise ConfigError("[model] vertical normal needs mean and variance")
                return SpaceTime(vertical_normal=(mv[0], mv[1]))
            if law == "atoms":
                return SpaceTime(vertical_atoms=tuple(_tuples(rest, 2, "[model] vertical")))
            raise ConfigError(f"[model] vertical: unknown law {law!r}")
    except ValueError as e:
        raise ConfigError(f"[model]: {e}") from None
    raise ConfigError(f"[model] kind: expected atoms|gaussian|spacetime, got {kind!r}")


def _get_int(sec, key: str, where: str, default=None) -> Optional[int]:
    if key not in sec:
        return default
    try:
        return int(sec[key])
    except ValueError:
        raise ConfigError(f"{where} {key}: not an integer: {sec[key]!r}") from None


def parse_simulation_config(path: Path) -> SimulationSpec:
    cfg = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cfg.read_file(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    model = _parse_model(cfg)
    if not cfg.has_section("run"):
        raise ConfigError("missing [run] section")
    run = cfg["run"]
    if "n_grid" in run:
        try:
            n_list = tuple(int(t) for t in run["n_grid"].replace(",", " ").split())
        except ValueError:
            raise ConfigError(f"[run] n_grid: not integers: {run['n_grid']!r}") from None
        if not n_list:
            raise ConfigError("[run] n_grid: empty")
    elif "n" in run:
        n_list = (_get_int(run, "n", "[run]"),)
    else:
        raise ConfigError("[run]: need n or n_grid")
    replicas = _get_int(run, "replicas", "[run]")
    if replicas is None:
        raise ConfigError("[run]: need replicas")
    if replicas < 2:
        raise ConfigError("[run] replicas: need >= 2 replicas for variance")
    seed = _get_int(run, "seed", "[run]", default=0)
    threads = _get_int(run, "threads", "[run]", default=None)
    max_mem = _get_int(run, "max_memory_mb", "[run]", default=4096) * (1 << 20)

    outputs: tuple[str, ...] = ("L", "A")
    exponent = 2.0
    plots = True
    if cfg.has_section("outputs"):
        out = cfg["outputs"]
        if "metrics" in out:
            outputs = tuple(out["metrics"].replace(",", " ").split())
        if "max_norm_exponent" in out:
            try:
                exponent = float(out["max_norm_exponent"])
            except ValueError:
                raise ConfigError("[outputs] max_norm_exponent: not a number") from None
        if "plots" in out:
            try:
                plots = out.getboolean("plots")
            except ValueError:
                raise ConfigError("[outputs] plots: not a boolean") from None
    return SimulationSpec(
        model=model,
        n_list=n_list,
        replicas=replicas,
        seed=seed,
        outputs=outputs,
        max_norm_exponent=exponent,
        threads=threads,
        max_memory_bytes=max_mem,
        plots=plots,
    )


def cmd_simulate(args) -> int:
    started = datetime.now(timezone.utc)
    spec = parse_simulation_config(Path(args.config))
    seed = args.seed if args.seed is not None else spec.seed
    threads = args.threads if args.threads is not None else spec.threads
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem

    run_reports = []
    for n in spec.n_list:
        try:
            cfg = ExperimentConfig(
                model=spec.model,
                n=n,
                replicas=spec.replicas,
                master_seed=seed,
                outputs=spec.outputs,
                max_norm_exponent=spec.max_norm_exponent,
                n_grid=spec.n_list,
                threads=threads,
                max_memory_bytes=spec.max_memory_bytes,
            )
        except ValueError as e:
            raise ConfigError(f"[run]: {e}") from None
        report = run_experiment(cfg)
        run_reports.append(report)
        print(f"n={n}: " + "  ".join(
            f"{name}={est.value:.6g}" for name, est in report.scaled.items()
        ))

    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    manifest_path = out_dir / f"{stem}.manifest.json"
    outputs = [csv_path, json_path, manifest_path]
    reports.write_metrics_csv(csv_path, run_reports)
    reports.write_json(json_path, run_reports)
    if spec.plots:
        walk_png = out_dir / f"{stem}.walk.png"
        conv_png = out_dir / f"{stem}.convergence.png"
        reports.render_walk_figure(spec.model, spec.n_list[-1], seed, walk_png)
        reports.render_convergence_figure(run_reports, conv_png)
        outputs += [walk_png, conv_png]
    manifest = reports.make_manifest(
        "simulate",
        args.config,
        {
            "model": walks.describe_model(spec.model),
            "n_grid": list(spec.n_list),
            "replicas": spec.replicas,
            "seed": seed,
            "outputs": list(spec.outputs),
            "max_norm_exponent": spec.max_norm_exponent,
        },
        outputs,
        started,
        seed,
    )
    reports.write_json(manifest_path, manifest)
    print(f"wrote {', '.join(str(p) for p in outputs)}")
    return 0


def cmd_exact(args) -> int:
    name = args.model
    if name not in BUILTIN_MODELS:
        print(f"config error: unknown model {name!r}", file=sys.stderr)
        return 2
    model = BUILTIN_MODELS[name]
    n = args.n
    if n < 1:
        print("config error: need n >= 1", file=sys.stderr)
        return 2
    rows = []
    if isinstance(model, Atoms):
        table = AtomWalkTable(model)
        el = 0.0
        ea = 0.0
        for k in range(1, n + 1):
            el += 2.0 * table.expected_norm(k) / k
            if k >= 2:
                for m in range(1, k):
                    ea += 0.5 * table.expected_cross(m, k - m) / (m * (k - m))
            rows.append((k, el, ea))
        depth = f"{len(table.distribution(n))} lattice states at n={n}"
    elif isinstance(model, SpaceTime) and model.vertical_normal is not None:
        vm, vv = model.vertical_normal
        el = 0.0
        ea = 0.0
        for k in range(1, n + 1):
            el += 2.0 * oracles.expected_norm_spacetime_gauss(vv, k) / k
            if k >= 2:
                ea = oracles.bnb_EA(model, k)
            rows.append((k, el, ea))
        depth = "closed form (no enumeration)"
    else:
        print(f"config error: no exact formulas for model {name!r}", file=sys.stderr)
        return 2
    print(f"{'k':>6} {'E L_k':>18} {'E A_k':>18}")
    for k, el, ea in rows:
        print(f"{k:>6d} {el:>18.12f} {ea:>18.12f}")
    print(f"enumeration depth: {depth}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"exact_{name}_{n}.csv"
        lines = ["k,E_L,E_A"] + [f"{k},{el!r},{ea!r}" for k, el, ea in rows]
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return 0


def cmd_bounds(args) -> int:
    if args.trace < 0:
        print("config error: trace must be nonnegative", file=sys.stderr)
        return 2
    rep = oracles.bounds_from_trace(args.trace)
    if args.table2:
        print(f"{'':>10} {'lower':>12} {'estimate':>10} {'upper':>8}")
        for name, lo, est, hi in oracles.table2_rows():
            print(f"{name:>10} {lo:>12} {est:>10} {hi:>8}")
        return 0
    print(f"trace(Sigma) = {rep.trace_sigma!r}")
    print(f"u0 bounds:        [{rep.u0_lower!r}, {rep.u0_upper!r}]")
    print(f"u0(I) sharper lb:  {rep.u0_identity_lower!r}")
    print(f"v0 bounds:        [{rep.v0_lower!r}, {rep.v0_upper!r}]")
    print(f"v_plus bounds:    [{rep.vplus_lower!r}, {rep.vplus_upper!r}]")
    return 0


def cmd_check(args) -> int:
    try:
        results = checks.run_suite(args.suite, seed=args.seed, threads=args.threads)
    except KeyError:
        print(
            f"config error: unknown suite {args.suite!r} (have {', '.join(checks.SUITES)})",
            file=sys.stderr,
        )
        return 2
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def cmd_reference(args) -> int:
    started = datetime.now(timezone.utc)
    sample = brownian_reference(args.m, args.replicas, args.kind, args.seed, threads=args.threads)
    target = REFERENCE_TARGETS[args.kind]
    mean = float(sample.values.mean())
    print(f"{args.kind}: sample mean {mean:.6f} vs limit {target:.6f} "
          f"({(mean / target - 1) * 100:+.2f}%), {sample.count} replicas at m={args.m}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"reference_{args.kind}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    hist_path = out_dir / f"{stem}.png"
    reports.write_sample_csv(csv_path, sample)
    reports.write_json(json_path, {
        "kind": args.kind,
        "m": args.m,
        "replicas": sample.count,
        "seed": args.seed,
        "sample_mean": mean,
        "limit_mean": target,
    })
    reports.render_reference_hist(sample, target, args.kind, hist_path)
    manifest_path = out_dir / f"{stem}.manifest.json"
    reports.write_json(manifest_path, reports.make_manifest(
        "reference", None,
        {"kind": args.kind, "m": args.m, "replicas": args.replicas, "seed": args.seed},
        [csv_path, json_path, hist_path], started, args.seed,
    ))
    print(f"wrote {csv_path}, {json_path}, {hist_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hullwalk",
        description="Convex hulls of planar random walks: simulation and exact formulas.",
    )
    parser.add_argument("--version", action="version", version=f"hullwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a config-driven Monte Carlo experiment")
    p.add_argument("--config", required=True, help="experiment config file (INI)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None, help="worker processes")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact", help="exact E L_n and E A_n for a builtin model")
    p.add_argument("model", help="builtin model name")
    p.add_argument("-n", type=int, required=True, help="walk length")
    p.add_argument("--out", default=None, help="also write a CSV here")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bounds", help="variance-constant bounds for a given trace")
    p.add_argument("trace", type=float, help="trace of the increment covariance")
    p.add_argument("--table2", action="store_true",
                   help="print the published table (lower rounded down, upper up)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("check", help="run a named property suite")
    p.add_argument("suite", help="|".join(checks.SUITES))
    p.add_argument("--seed", type=int, default=20250)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reference", help="sample a Brownian-limit reference distribution")
    p.add_argument("--kind", choices=sorted(REFERENCE_TARGETS), required=True)
    p.add_argument("-m", type=int, default=10**4, help="reference walk length")
    p.add_argument("-R", "--replicas", type=int, default=10**4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_reference)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except EnumerationOverflowError as e:
        print(f"resource error: {e}; use `hullwalk simulate` instead", file=sys.stderr)
        return 3
    except ResourceLimitError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
