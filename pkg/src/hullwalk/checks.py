"""Named property suites behind the `check` subcommand.

Each check returns a CheckResult with a counterexample description on
failure (the seed plus whatever input broke).  The acceptance test suite
runs the same checks at its own scales, so the logic lives here once.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import geometry, montecarlo, oracles, walks
from .geometry import ConvexPolygon, PolyPath, Vec2

KS_BAND = 0.02  # two-sample KS acceptance band at 1e4 replicas


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(name, passed, detail)


# ---------------------------------------------------------------------------
# brute-force hull oracle


def brute_force_hull(points) -> set:
    """Vertex set by definition: p is a vertex iff it is not a convex
    combination of the other points (tested over all triangles, O(n^4)
    work vectorized per point set).  Duplicates are collapsed first."""
    pts = sorted(set(tuple(p) for p in points))
    n = len(pts)
    if n <= 2:
        return set(pts)
    arr = np.asarray(pts, dtype=float)
    scale = max(float(np.abs(arr).max()), 1.0)
    integral = all(float(c).is_integer() for p in pts for c in p)
    tol = 0.0 if integral else geometry.COLLINEAR_REL_EPS * scale * scale
    triples = np.array(list(itertools.combinations(range(n), 3)))
    a = arr[triples[:, 0]][:, None, :]
    b = arr[triples[:, 1]][:, None, :]
    c = arr[triples[:, 2]][:, None, :]
    p = arr[None, :, :]
    s1 = (b[..., 0] - a[..., 0]) * (p[..., 1] - a[..., 1]) - (p[..., 0] - a[..., 0]) * (
        b[..., 1] - a[..., 1]
    )
    s2 = (c[..., 0] - b[..., 0]) * (p[..., 1] - b[..., 1]) - (p[..., 0] - b[..., 0]) * (
        c[..., 1] - b[..., 1]
    )
    s3 = (a[..., 0] - c[..., 0]) * (p[..., 1] - c[..., 1]) - (p[..., 0] - c[..., 0]) * (
        a[..., 1] - c[..., 1]
    )
    same_sign = ((s1 >= -tol) & (s2 >= -tol) & (s3 >= -tol)) | (
        (s1 <= tol) & (s2 <= tol) & (s3 <= tol)
    )
    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    in_box = ((p >= lo) & (p <= hi)).all(axis=-1)
    contained = same_sign & in_box
    member = np.zeros((len(triples), n), dtype=bool)
    rows = np.repeat(np.arange(len(triples)), 3)
    member[rows, triples.reshape(-1)] = True
    not_vertex = (contained & ~member).any(axis=0)
    return {pts[i] for i in range(n) if not not_vertex[i]}


def _vertex_set(poly: ConvexPolygon) -> set:
    return {(v.x, v.y) for v in poly.vertices}


def _sets_match(a: set, b: set, tol: float) -> bool:
    if len(a) != len(b):
        return False
    if tol == 0.0:
        return a == b
    bs = sorted(b)
    return all(
        min(math.hypot(x - p, y - q) for p, q in bs) <= tol for x, y in sorted(a)
    )


# ---------------------------------------------------------------------------
# random generators for property checks


def _random_points(rng, max_points=30):
    k = int(rng.integers(1, max_points + 1))
    if rng.random() < 0.5:
        return rng.integers(-10, 11, size=(k, 2)).astype(float)
    return rng.uniform(-10, 10, size=(k, 2))


def _random_hull(rng, max_points=20, origin=True) -> ConvexPolygon:
    k = int(rng.integers(1, max_points + 1))
    pts = rng.normal(scale=rng.uniform(0.5, 3.0), size=(k, 2))
    if origin:
        pts = np.vstack([[0.0, 0.0], pts])
    return geometry.convex_hull(pts)


def _random_degenerate_hull(rng) -> ConvexPolygon:
    kind = rng.random()
    if kind < 0.4:
        d = rng.normal(size=2)
        t = np.sort(rng.uniform(0, 1, size=int(rng.integers(2, 6))))
        pts = np.outer(np.concatenate([[0.0], t]), d)
        return geometry.convex_hull(pts)
    if kind < 0.6:
        return geometry.convex_hull(np.array([rng.normal(size=2)]))
    return _random_hull(rng)


def _random_path(rng, k: int) -> PolyPath:
    steps = rng.normal(size=(k, 2))
    pts = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
    return PolyPath.from_points(pts)


# ---------------------------------------------------------------------------
# geometry checks


def check_hull_oracle(seed: int, n_sets: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    for i in range(n_sets):
        pts = _random_points(rng)
        got = _vertex_set(geometry.convex_hull(pts))
        want = brute_force_hull(pts)
        integral = bool((pts == np.floor(pts)).all())
        tol = 0.0 if integral else 1e-9
        if not _sets_match(got, want, tol):
            return _result(
                "hull_vs_bruteforce", False,
                f"seed={seed} set={i} points={pts.tolist()}",
            )
    dt = time.perf_counter() - t0
    return _result("hull_vs_bruteforce", True, f"{n_sets} sets in {dt:.2f}s")


def check_hull_containment(seed: int, n_sets: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_sets):
        pts = _random_points(rng)
        hull = geometry.convex_hull(pts)
        scale = max(float(np.abs(pts).max()), 1.0)
        for x, y in pts:
            if geometry._dist_to_polygon(float(x), float(y), hull) > 1e-9 * scale:
                return _result("hull_contains_points", False, f"seed={seed} set={i}")
        inputs = set(map(tuple, pts.tolist()))
        if not _vertex_set(hull) <= inputs:
            return _result("hull_contains_points", False, f"seed={seed} set={i}: foreign vertex")
    return _result("hull_contains_points", True, f"{n_sets} sets")


def check_cauchy_identity(seed: int, n_hulls: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_hulls):
        hull = _random_degenerate_hull(rng)
        per = geometry.perimeter(hull)
        cau = geometry.cauchy_perimeter(hull)
        rel = abs(cau - per) / max(per, 1e-30) if per > 0 else abs(cau)
        worst = max(worst, rel)
        if rel > 1e-9:
            return _result(
                "cauchy_equals_perimeter", False,
                f"seed={seed} hull={i} tag={hull.tag} rel={rel:.2e}",
            )
    return _result("cauchy_equals_perimeter", True, f"{n_hulls} hulls, worst rel {worst:.1e}")


def check_steiner(seed: int, n_cases: int = 20, samples: int = 20000) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_cases):
        hull = _random_degenerate_hull(rng)
        r = float(rng.uniform(0.0, 1.5))
        est, se = geometry.parallel_body_area_mc(hull, r, samples, rng)
        exact = geometry.area(hull) + r * geometry.perimeter(hull) + math.pi * r * r
        if abs(est - exact) > 3.0 * se + 1e-12:
            return _result(
                "steiner_formula_mc", False,
                f"seed={seed} case={i} tag={hull.tag} r={r:.3f} "
                f"est={est:.4f} exact={exact:.4f} se={se:.4f}",
            )
    return _result("steiner_formula_mc", True, f"{n_cases} cases x {samples} samples")


def check_contraction(seed: int, n_instances: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        k = int(rng.integers(2, 40))
        f = _random_path(rng, k)
        g = _random_path(rng, k)
        dh = geometry.hausdorff(geometry.hull_of_path(f), geometry.hull_of_path(g))
        dsup = geometry.path_sup_distance(f, g)
        if dh > dsup + 1e-12:
            return _result(
                "hull_map_contraction", False,
                f"seed={seed} instance={i} rho_H={dh} rho_inf={dsup}",
            )
    return _result("hull_map_contraction", True, f"{n_instances} path pairs")


def check_functional_continuity(seed: int, n_instances: int = 200) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        a = _random_hull(rng)
        b = _random_hull(rng)
        dh = geometry.hausdorff(a, b)
        la, lb = geometry.perimeter(a), geometry.perimeter(b)
        if abs(la - lb) > 2.0 * math.pi * dh + 1e-9:
            return _result("perimeter_lipschitz", False, f"seed={seed} instance={i}")
        if abs(geometry.area(a) - geometry.area(b)) > math.pi * dh * dh + max(la, lb) * dh + 1e-9:
            return _result("area_continuity", False, f"seed={seed} instance={i}")
    return _result("functional_continuity", True, f"{n_instances} hull pairs")


def check_monotonicity(seed: int, n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        k = int(rng.integers(3, 25))
        pts = np.vstack([[0.0, 0.0], rng.normal(size=(k, 2))])
        sub = pts[: int(rng.integers(1, len(pts)))]
        big = geometry.convex_hull(pts)
        small = geometry.convex_hull(sub)
        if geometry.perimeter(small) > geometry.perimeter(big) + 1e-9:
            return _result("perimeter_monotone", False, f"seed={seed} instance={i}")
        if geometry.area(small) > geometry.area(big) + 1e-9:
            return _result("area_monotone", False, f"seed={seed} instance={i}")
    return _result("functional_monotonicity", True, f"{n_instances} nested pairs")


def check_affine_equivariance(seed: int, n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        pts = _random_points(rng)
        while True:
            m = rng.normal(size=(2, 2))
            if abs(np.linalg.det(m)) > 0.2:
                break
        shift = rng.normal(size=2)
        mapped = pts @ m.T + shift
        lhs = _vertex_set(geometry.convex_hull(mapped))
        hull = geometry.convex_hull(pts)
        rhs = {tuple(np.asarray(v) @ m.T + shift) for v in hull.vertices}
        scale = max(float(np.abs(mapped).max()), 1.0)
        if not _sets_match(lhs, rhs, 1e-9 * scale):
            return _result("affine_equivariance", False, f"seed={seed} instance={i}")
    return _result("affine_equivariance", True, f"{n_instances} affine maps")


def check_merge_hulls(seed: int, n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(n_instances):
        pts = rng.normal(size=(int(rng.integers(4, 400)), 2))
        k = int(rng.integers(1, len(pts)))
        merged = geometry.merge_hulls(
            geometry.convex_hull(pts[:k]), geometry.convex_hull(pts[k:])
        )
        if not _sets_match(
            _vertex_set(merged), _vertex_set(geometry.convex_hull(pts)), 0.0
        ):
            return _result("merge_hulls_chunked", False, f"seed={seed} instance={i}")
    return _result("merge_hulls_chunked", True, f"{n_instances} splits")


def check_scaling_commutes(seed: int, n_instances: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    stats = walks.increment_stats(walks.BUILTIN_MODELS["spacetime_pm1"])
    for i in range(n_instances):
        pts = rng.normal(scale=5.0, size=(int(rng.integers(3, 30)), 2))
        n = int(rng.integers(1, 50))
        hull = geometry.convex_hull(pts)
        a = walks.scale_zero_drift(hull, n)
        b = geometry.convex_hull(pts / math.sqrt(n))
        if not _sets_match(_vertex_set(a), _vertex_set(b), 1e-12 * 10):
            return _result("scaling_commutes", False, f"seed={seed} zero-drift instance={i}")
        a = walks.scale_drift(hull, n, stats)
        mapped = np.column_stack([pts[:, 0] / n, pts[:, 1] / math.sqrt(n)])
        b = geometry.convex_hull(mapped)
        if not _sets_match(_vertex_set(a), _vertex_set(b), 1e-12 * 10):
            return _result("scaling_commutes", False, f"seed={seed} drift instance={i}")
    return _result("scaling_commutes", True, f"{n_instances} hulls")


# ---------------------------------------------------------------------------
# oracle checks


def check_oracle_equivalence(n_max: int = 5) -> CheckResult:
    for name in ("ssrw_z2", "spacetime_pm1", "lazy_right"):
        model = walks.BUILTIN_MODELS[name]
        table = oracles.AtomWalkTable(model)
        for n in range(1, n_max + 1):
            el, ea = oracles.enumerated_moments(model, n)
            sw = oracles.spitzer_widom_EL([table.expected_norm(k) for k in range(1, n + 1)])
            bnb = oracles.bnb_EA(model, n)
            if abs(sw - el) > 1e-12 * max(1.0, el):
                return _result(
                    "exact_vs_enumerated", False, f"{name} n={n} EL {sw} != {el}"
                )
            if abs(bnb - ea) > 1e-12 * max(1.0, ea):
                return _result(
                    "exact_vs_enumerated", False, f"{name} n={n} EA {bnb} != {ea}"
                )
    return _result("exact_vs_enumerated", True, f"3 models, n <= {n_max}")


def check_gaussian_triangle(seed: int, samples: int = 10**7) -> CheckResult:
    """E T(W1, W2) = 1/2 for independent standard Gaussian pairs."""
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((samples, 2))
    w2 = rng.standard_normal((samples, 2))
    t = 0.5 * np.abs(w1[:, 0] * w2[:, 1] - w1[:, 1] * w2[:, 0])
    mean = float(t.mean())
    se = float(t.std(ddof=1) / math.sqrt(samples))
    ok = abs(mean - 0.5) <= 4.0 * se
    return _result("gaussian_triangle_half", ok, f"mean={mean:.5f} se={se:.1e}")


def check_bounds_table() -> CheckResult:
    rows = oracles.table2_rows()
    want = [
        ("u0(I)", "2.65e-03", "1.08", "9.87"),
        ("v0", "8.15e-07", "0.30", "5.22"),
        ("v_plus", "1.44e-06", "0.019", "2.08"),
    ]
    if rows != want:
        return _result("bounds_table_printed", False, f"got {rows}")
    rep = oracles.bounds_from_trace(2.0)
    ordered = (
        rep.u0_identity_lower < oracles.TABLE2_SIMULATION["u0_identity"] < rep.u0_upper
        and rep.v0_lower < oracles.TABLE2_SIMULATION["v0"] < rep.v0_upper
        and rep.vplus_lower < oracles.TABLE2_SIMULATION["vplus"] < rep.vplus_upper
    )
    return _result("bounds_table_printed", ordered, "estimates strictly inside bounds")


def check_pi_sum() -> CheckResult:
    ok = (
        abs(oracles.pi_sum_check(2) - 1.0) < 1e-15
        and abs(oracles.pi_sum_check(3) - math.sqrt(2.0)) < 1e-14
        and abs(oracles.pi_sum_check(10**6) - math.pi) < 1e-2
    )
    return _result("pi_sum_limit", ok, f"k=1e6 -> {oracles.pi_sum_check(10**6):.5f}")


def check_norm_examples() -> CheckResult:
    ssrw = walks.BUILTIN_MODELS["ssrw_z2"]
    lazy = walks.BUILTIN_MODELS["lazy_right"]
    ok = (
        abs(oracles.expected_norm_atoms(ssrw, 1) - math.sqrt(2)) < 1e-14
        and abs(oracles.expected_norm_atoms(ssrw, 2) - (1 + math.sqrt(2) / 2)) < 1e-14
        and abs(oracles.expected_norm_atoms(lazy, 3) - 3.0) < 1e-14
    )
    return _result("expected_norm_examples", ok, "ssrw k=1,2; lazy k=3")


# ---------------------------------------------------------------------------
# limit checks (desk scale; minutes of runtime)


def _within(value: float, target: float, band: float) -> bool:
    return abs(value - target) <= band * abs(target)


def check_desk_asymptotics(
    seed: int, n: int = 10**4, replicas: int = 10**4, threads: Optional[int] = None
) -> list[CheckResult]:
    out = []
    cfg = montecarlo.ExperimentConfig(
        model=walks.BUILTIN_MODELS["ssrw_z2"], n=n, replicas=replicas,
        master_seed=seed, threads=threads,
    )
    rep = montecarlo.run_experiment(cfg)
    out.append(_result(
        "ssrw_scaled_mean_L",
        _within(rep.scaled["scaled_mean_L"].value, oracles.LIMITS.E_ell1, 0.02),
        f"{rep.scaled['scaled_mean_L'].value:.4f} vs {oracles.LIMITS.E_ell1:.4f} (2%)",
    ))
    out.append(_result(
        "ssrw_scaled_mean_A",
        _within(rep.scaled["scaled_mean_A"].value, oracles.LIMITS.E_a1, 0.03),
        f"{rep.scaled['scaled_mean_A'].value:.4f} vs {oracles.LIMITS.E_a1:.4f} (3%)",
    ))
    st = montecarlo.run_experiment(montecarlo.ExperimentConfig(
        model=walks.BUILTIN_MODELS["spacetime_pm1"], n=n, replicas=replicas,
        master_seed=seed + 1, threads=threads,
    ))
    out.append(_result(
        "spacetime_scaled_mean_L",
        _within(st.scaled["scaled_mean_L"].value, 2.0, 0.02),
        f"{st.scaled['scaled_mean_L'].value:.4f} vs 2 (2%)",
    ))
    out.append(_result(
        "spacetime_scaled_mean_A",
        _within(st.scaled["scaled_mean_A"].value, oracles.LIMITS.E_atilde1, 0.03),
        f"{st.scaled['scaled_mean_A'].value:.4f} vs {oracles.LIMITS.E_atilde1:.4f} (3%)",
    ))
    lazy = montecarlo.run_experiment(montecarlo.ExperimentConfig(
        model=walks.BUILTIN_MODELS["lazy_right"], n=n, replicas=replicas,
        master_seed=seed + 2, threads=threads,
    ))
    out.append(_result(
        "lazy_zero_area",
        lazy.metrics["A"].mean == 0.0 and lazy.metrics["A"].variance == 0.0,
        "A identically zero",
    ))
    out.append(_result(
        "lazy_scaled_var_L",
        _within(lazy.scaled["scaled_var_L"].value, 4.0, 0.10),
        f"{lazy.scaled['scaled_var_L'].value:.4f} vs 4 (10%)",
    ))
    for name, rep_i in (("ssrw", rep), ("spacetime_pm1", st), ("lazy_right", lazy)):
        stats = walks.increment_stats(rep_i and walks.BUILTIN_MODELS[
            {"ssrw": "ssrw_z2", "spacetime_pm1": "spacetime_pm1", "lazy_right": "lazy_right"}[name]
        ])
        ok, slack = montecarlo.snyder_steele_check(rep_i, stats)
        out.append(_result(f"snyder_steele_{name}", ok, f"slack {slack:.3f}"))
    return out


def check_ks_limits(
    seed: int, n: int = 10**4, replicas: int = 10**4, threads: Optional[int] = None
) -> list[CheckResult]:
    out = []
    vals = montecarlo.sample_functionals(
        walks.BUILTIN_MODELS["ssrw_z2"], n, replicas, seed, metrics=("L",), threads=threads
    )["L"]
    walk_l = montecarlo.Sample(vals / math.sqrt(n))
    ref_l = montecarlo.brownian_reference(n, replicas, "ell1", seed + 10, threads=threads)
    d = montecarlo.ks_distance(walk_l, ref_l)
    out.append(_result("ks_perimeter_zero_drift", d <= KS_BAND, f"KS={d:.4f} band {KS_BAND}"))
    vals = montecarlo.sample_functionals(
        walks.BUILTIN_MODELS["spacetime_pm1"], n, replicas, seed + 20, metrics=("A",),
        threads=threads,
    )["A"]
    walk_a = montecarlo.Sample(vals / n**1.5)
    ref_a = montecarlo.brownian_reference(n, replicas, "atilde1", seed + 30, threads=threads)
    d = montecarlo.ks_distance(walk_a, ref_a)
    out.append(_result("ks_area_drift", d <= KS_BAND, f"KS={d:.4f} band {KS_BAND}"))
    return out


def check_moment_slopes(seed: int, replicas: int = 600, threads: Optional[int] = None) -> list[CheckResult]:
    grid = (1000, 4642, 21544, 100000)
    out = []
    fit = montecarlo.moment_growth_diagnostic(
        walks.BUILTIN_MODELS["ssrw_z2"], 2, grid, replicas, seed, threads=threads
    )
    out.append(_result(
        "moment_slope_zero_drift",
        fit.slope is not None and abs(fit.slope - 1.0) <= 0.1,
        f"slope {fit.slope:.3f} (want 1 +- 0.1)",
    ))
    fit = montecarlo.moment_growth_diagnostic(
        walks.BUILTIN_MODELS["lazy_right"], 2, grid, replicas, seed + 1, threads=threads
    )
    out.append(_result(
        "moment_slope_drift_projection",
        fit.slope is not None and abs(fit.slope - 2.0) <= 0.1,
        f"slope {fit.slope:.3f} (want 2 +- 0.1)",
    ))
    return out


# ---------------------------------------------------------------------------
# suites


def run_suite(name: str, seed: int = 20250, threads: Optional[int] = None) -> list[CheckResult]:
    if name == "geometry":
        return [
            check_hull_oracle(seed),
            check_hull_containment(seed + 1),
            check_cauchy_identity(seed + 2),
            check_steiner(seed + 3),
            check_contraction(seed + 4),
            check_functional_continuity(seed + 5),
            check_monotonicity(seed + 6),
            check_affine_equivariance(seed + 7),
            check_merge_hulls(seed + 8),
            check_scaling_commutes(seed + 9),
        ]
    if name == "oracles":
        return [
            check_oracle_equivalence(),
            check_norm_examples(),
            check_gaussian_triangle(seed),
            check_bounds_table(),
            check_pi_sum(),
        ]
    if name == "limits":
        out = check_desk_asymptotics(seed, threads=threads)
        out += check_ks_limits(seed + 100, threads=threads)
        out += check_moment_slopes(seed + 200, threads=threads)
        return out
    raise KeyError(name)


SUITES = ("geometry", "oracles", "limits")
