"""Increment laws, derived walk statistics, path sampling, and scaling maps.

A model is one of three frozen dataclasses: `Atoms` (finite support),
`Gaussian` (bivariate normal), or `SpaceTime` (unit horizontal step, random
vertical step; the walk is a space-time diagram of a one-dimensional walk).
`increment_stats` derives the drift vector, covariance, the variance split
along/across the drift direction, and the symmetric matrix square root used
to push standard Brownian increments to general covariances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geometry import ConvexPolygon, Vec2, convex_hull, merge_hulls
from .rng import normal_pairs, normals

PROB_TOL = 1e-12
SYM_TOL = 1e-12

# Full path storage up to this many steps; longer walks are generated in
# chunks whose hulls are merged so memory tracks hull size, not walk length.
MAX_FULL_PATH = 10**6
CHUNK_STEPS = 10**5


@dataclass(frozen=True)
class Atoms:
    """Finitely supported increment law: ((prob, (x, y)), ...)."""

    atoms: tuple[tuple[float, tuple[float, float]], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("atom list is empty")
        total = 0.0
        for prob, xy in self.atoms:
            if not prob > 0:
                raise ValueError("atom probabilities must be positive")
            if len(xy) != 2:
                raise ValueError("atom values must be planar")
            total += prob
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"atom probabilities sum to {total}, not 1")


@dataclass(frozen=True)
class Gaussian:
    """Bivariate normal increment law N(mean, cov)."""

    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        c = np.asarray(self.cov, dtype=float)
        if abs(c[0, 1] - c[1, 0]) > SYM_TOL * max(1.0, abs(c).max()):
            raise ValueError("covariance must be symmetric")
        if min(_eigenvalues_2x2(c)) < -SYM_TOL * max(1.0, abs(c).max()):
            raise ValueError("covariance must be positive semidefinite")


@dataclass(frozen=True)
class SpaceTime:
    """Z = (1, xi): unit time step, vertical law either atoms or normal."""

    vertical_atoms: Optional[tuple[tuple[float, float], ...]] = None
    vertical_normal: Optional[tuple[float, float]] = None  # (mean, variance)

    def __post_init__(self):
        if (self.vertical_atoms is None) == (self.vertical_normal is None):
            raise ValueError("specify exactly one vertical law")
        if self.vertical_atoms is not None:
            total = sum(p for p, _ in self.vertical_atoms)
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError("vertical atom probabilities must sum to 1")
        if self.vertical_normal is not None and self.vertical_normal[1] < 0:
            raise ValueError("vertical variance must be nonnegative")


IncrementModel = Union[Atoms, Gaussian, SpaceTime]

BUILTIN_MODELS: dict[str, IncrementModel] = {
    # symmetric simple random walk on Z^2 (diagonal steps)
    "ssrw_z2": Atoms((
        (0.25, (1.0, 1.0)),
        (0.25, (-1.0, -1.0)),
        (0.25, (-1.0, 1.0)),
        (0.25, (1.0, -1.0)),
    )),
    # space-time diagram of 1-d simple symmetric random walk
    "spacetime_pm1": Atoms((
        (0.5, (1.0, 1.0)),
        (0.5, (1.0, -1.0)),
    )),
    # drift along x with all variance in the drift direction; flat hulls
    "lazy_right": Atoms((
        (0.5, (2.0, 0.0)),
        (0.5, (0.0, 0.0)),
    )),
    # space-time diagram with standard normal vertical steps
    "spacetime_gauss": SpaceTime(vertical_normal=(0.0, 1.0)),
}


def describe_model(model: IncrementModel) -> dict:
    """JSON-friendly echo of a model, with its builtin name when it has one."""
    for name, builtin in BUILTIN_MODELS.items():
        if model == builtin:
            return {"builtin": name}
    if isinstance(model, Atoms):
        return {"kind": "atoms", "atoms": [[p, list(xy)] for p, xy in model.atoms]}
    if isinstance(model, Gaussian):
        return {"kind": "gaussian", "mean": list(model.mean), "cov": [list(r) for r in model.cov]}
    if isinstance(model, SpaceTime):
        if model.vertical_atoms is not None:
            return {"kind": "spacetime", "vertical_atoms": [list(a) for a in model.vertical_atoms]}
        return {"kind": "spacetime", "vertical_normal": list(model.vertical_normal)}
    raise TypeError(f"not an increment model: {model!r}")


@dataclass(frozen=True)
class WalkStats:
    """Derived law parameters of an increment model.

    sigma2_mu / sigma2_perp split trace(Sigma) into the variance along and
    across the drift direction; both are None for driftless laws, where the
    split is not defined.
    """

    mu: Vec2
    sigma_mat: np.ndarray
    sigma2: float
    sigma2_mu: Optional[float]
    sigma2_perp: Optional[float]
    sqrt_sigma: np.ndarray
    lambda_max: float
    mu_hat: Optional[Vec2]
    mu_hat_perp: Optional[Vec2]

    @property
    def has_drift(self) -> bool:
        return self.mu_hat is not None

    @property
    def det_sigma(self) -> float:
        s = self.sigma_mat
        return float(s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0])


def _eigenvalues_2x2(m: np.ndarray) -> tuple[float, float]:
    half_tr = 0.5 * (m[0, 0] + m[1, 1])
    disc = math.sqrt(max((0.5 * (m[0, 0] - m[1, 1])) ** 2 + m[0, 1] * m[1, 0], 0.0))
    return half_tr - disc, half_tr + disc


def matrix_sqrt(sigma) -> np.ndarray:
    """Symmetric PSD square root via closed-form 2x2 spectral decomposition."""
    m = np.asarray(sigma, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    scale = max(1.0, float(np.abs(m).max()))
    if abs(m[0, 1] - m[1, 0]) > SYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    b = 0.5 * (m[0, 1] + m[1, 0])
    lo, hi = _eigenvalues_2x2(np.array([[m[0, 0], b], [b, m[1, 1]]]))
    if lo < -SYM_TOL * scale:
        raise ValueError("matrix is not positive semidefinite")
    lo = max(lo, 0.0)
    if b == 0.0 and m[0, 0] >= m[1, 1]:
        vec = np.array([1.0, 0.0])
    elif b == 0.0:
        vec = np.array([0.0, 1.0])
    else:
        vec = np.array([hi - m[1, 1], b])
        vec /= math.hypot(vec[0], vec[1])
    perp = np.array([-vec[1], vec[0]])
    root = math.sqrt(hi) * np.outer(vec, vec) + math.sqrt(lo) * np.outer(perp, perp)
    return 0.5 * (root + root.T)


def _moments_atoms(atoms) -> tuple[np.ndarray, np.ndarray]:
    mean = np.zeros(2)
    for prob, xy in atoms:
        mean += prob * np.asarray(xy, dtype=float)
    cov = np.zeros((2, 2))
    for prob, xy in atoms:
        d = np.asarray(xy, dtype=float) - mean
        cov += prob * np.outer(d, d)
    return mean, cov


def increment_stats(model: IncrementModel) -> WalkStats:
    """Exact mean, covariance, and drift decomposition of the step law."""
    if isinstance(model, Atoms):
        mean, cov = _moments_atoms(model.atoms)
    elif isinstance(model, Gaussian):
        mean = np.asarray(model.mean, dtype=float)
        cov = np.asarray(model.cov, dtype=float)
        cov = 0.5 * (cov + cov.T)
    elif isinstance(model, SpaceTime):
        if model.vertical_atoms is not None:
            vm = sum(p * y for p, y in model.vertical_atoms)
            vv = sum(p * (y - vm) ** 2 for p, y in model.vertical_atoms)
        else:
            vm, vv = model.vertical_normal
        mean = np.array([1.0, vm])
        cov = np.array([[0.0, 0.0], [0.0, float(vv)]])
    else:
        raise TypeError(f"not an increment model: {model!r}")

    sigma2 = float(cov[0, 0] + cov[1, 1])
    mu_norm = math.hypot(mean[0], mean[1])
    scale = max(1.0, float(np.abs(mean).max()))
    if mu_norm <= PROB_TOL * scale:
        mu_hat = mu_hat_perp = None
        sigma2_mu = sigma2_perp = None
    else:
        mu_hat = Vec2(mean[0] / mu_norm, mean[1] / mu_norm)
        mu_hat_perp = Vec2(-mu_hat.y, mu_hat.x)
        h = np.array(mu_hat)
        sigma2_mu = float(h @ cov @ h)
        hp = np.array(mu_hat_perp)
        sigma2_perp = float(hp @ cov @ hp)
    _, lam = _eigenvalues_2x2(cov)
    return WalkStats(
        mu=Vec2(float(mean[0]), float(mean[1])),
        sigma_mat=cov,
        sigma2=sigma2,
        sigma2_mu=sigma2_mu,
        sigma2_perp=sigma2_perp,
        sqrt_sigma=matrix_sqrt(cov),
        lambda_max=float(lam),
        mu_hat=mu_hat,
        mu_hat_perp=mu_hat_perp,
    )


@dataclass(frozen=True)
class PathSample:
    """Partial sums S_0..S_n as an (n+1, 2) array, S_0 = 0."""

    points: np.ndarray
    n: int


def sample_increments(model: IncrementModel, count: int, stream: np.random.Generator) -> np.ndarray:
    """(count, 2) i.i.d. increments drawn from the model on the stream.

    Atoms use inverse-CDF lookup on one uniform per step (atom order as
    declared); Gaussian laws use Box-Muller pairs.
    """
    if isinstance(model, Atoms):
        cum = np.cumsum([p for p, _ in model.atoms])
        cum[-1] = 1.0
        values = np.asarray([xy for _, xy in model.atoms], dtype=float)
        idx = np.searchsorted(cum, stream.random(count), side="right")
        return values[np.minimum(idx, len(values) - 1)]
    if isinstance(model, Gaussian):
        w = normal_pairs(stream, count)
        root = matrix_sqrt(model.cov)
        return np.asarray(model.mean, dtype=float) + w @ root.T
    if isinstance(model, SpaceTime):
        out = np.empty((count, 2))
        out[:, 0] = 1.0
        if model.vertical_atoms is not None:
            cum = np.cumsum([p for p, _ in model.vertical_atoms])
            cum[-1] = 1.0
            values = np.asarray([y for _, y in model.vertical_atoms], dtype=float)
            idx = np.searchsorted(cum, stream.random(count), side="right")
            out[:, 1] = values[np.minimum(idx, len(values) - 1)]
        else:
            vm, vv = model.vertical_normal
            out[:, 1] = vm + math.sqrt(vv) * normals(stream, count)
        return out
    raise TypeError(f"not an increment model: {model!r}")


def sample_path(model: IncrementModel, n: int, stream: np.random.Generator) -> PathSample:
    """Walk of n steps as partial sums (full storage; see walk_hull for long walks)."""
    if n < 1:
        raise ValueError("need n >= 1")
    steps = sample_increments(model, n, stream)
    pts = np.empty((n + 1, 2))
    pts[0] = 0.0
    np.cumsum(steps, axis=0, out=pts[1:])
    return PathSample(points=pts, n=n)


def walk_hull(
    model: IncrementModel,
    n: int,
    stream: np.random.Generator,
    *,
    track_norms: bool = False,
    mu_hat: Optional[Vec2] = None,
) -> tuple[ConvexPolygon, float, float]:
    """Hull of an n-step walk; optionally max |S_m| and max |S_m . mu_hat|.

    For n beyond MAX_FULL_PATH the path is generated in chunks and the
    running hull merged, bounding memory by hull complexity.
    """
    if n <= MAX_FULL_PATH:
        pts = sample_path(model, n, stream).points
        hull = convex_hull(pts)
        if not track_norms:
            return hull, 0.0, 0.0
        max_norm = float(np.hypot(pts[:, 0], pts[:, 1]).max())
        proj = 0.0
        if mu_hat is not None:
            proj = float(np.abs(pts @ np.array(mu_hat)).max())
        return hull, max_norm, proj

    hat = np.array(mu_hat) if mu_hat is not None else None
    hull = convex_hull(np.zeros((1, 2)))
    last = np.zeros(2)
    max_norm = 0.0
    max_proj = 0.0
    done = 0
    while done < n:
        m = min(CHUNK_STEPS, n - done)
        pts = np.cumsum(sample_increments(model, m, stream), axis=0)
        pts += last
        hull = merge_hulls(hull, convex_hull(pts))
        if track_norms:
            max_norm = max(max_norm, float(np.hypot(pts[:, 0], pts[:, 1]).max()))
            if hat is not None:
                max_proj = max(max_proj, float(np.abs(pts @ hat).max()))
        last = pts[-1].copy()
        done += m
    return hull, max_norm, max_proj


def scale_zero_drift(p: ConvexPolygon, n: int) -> ConvexPolygon:
    """Diffusive rescaling: each vertex multiplied by n**-0.5."""
    if n < 1:
        raise ValueError("need n >= 1")
    f = 1.0 / math.sqrt(n)
    if not p.vertices:
        return p
    return convex_hull([(v.x * f, v.y * f) for v in p.vertices])


def scale_drift(p: ConvexPolygon, n: int, stats: WalkStats) -> ConvexPolygon:
    """Anisotropic rescaling for drifting walks.

    Rotates the drift direction onto the x-axis, then shrinks by n|mu|
    horizontally and sqrt(n sigma2_perp) vertically; areas scale by the
    product of the two factors.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if stats.mu_hat is None or not stats.sigma2_perp or stats.sigma2_perp <= 0:
        raise ValueError("scaling undefined")
    hx = stats.mu_hat
    hy = stats.mu_hat_perp
    mu_norm = stats.mu.norm()
    fx = 1.0 / (n * mu_norm)
    fy = 1.0 / math.sqrt(n * stats.sigma2_perp)
    if not p.vertices:
        return p
    mapped = [
        ((v.x * hx.x + v.y * hx.y) * fx, (v.x * hy.x + v.y * hy.y) * fy)
        for v in p.vertices
    ]
    return convex_hull(mapped)
