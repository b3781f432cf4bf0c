"""Exact planar convex hulls and their integral-geometry functionals.

Everything here is a pure function of immutable values: points are `Vec2`,
hulls are `ConvexPolygon` (counterclockwise vertex list plus a degeneracy
tag), and piecewise-linear paths are `PolyPath`.  Degenerate hulls are first
class: a segment has perimeter twice its length so that the Steiner formula
area(dilate(A, r)) = area(A) + r * perimeter(A) + pi * r^2 holds verbatim
for every tag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Vec2",
    "ConvexPolygon",
    "PolyPath",
    "convex_hull",
    "merge_hulls",
    "area",
    "perimeter",
    "support_function",
    "cauchy_perimeter",
    "hausdorff",
    "path_sup_distance",
    "hull_of_path",
    "parallel_body_area_mc",
]

# Relative tolerance for declaring three float points collinear; scaled by
# the square of the coordinate magnitude because cross products are.
COLLINEAR_REL_EPS = 1e-12

# Below this many points the candidate pre-filter costs more than it saves.
_FILTER_MIN_POINTS = 256


class Vec2(NamedTuple):
    """A point/vector in the plane. Coordinates may be int (kept exact)."""

    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s):  # type: ignore[override]
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other) -> float:
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex hull as a counterclockwise vertex tuple.

    tag is one of "full" (>= 3 vertices in strictly convex position),
    "segment" (2 distinct vertices), "point" (1), "empty" (0).
    """

    vertices: tuple[Vec2, ...]
    tag: str

    def __post_init__(self):
        counts = {"full": 3, "segment": 2, "point": 1, "empty": 0}
        if self.tag not in counts:
            raise ValueError(f"unknown tag {self.tag!r}")
        n = len(self.vertices)
        if self.tag == "full":
            if n < 3:
                raise ValueError("full polygon needs >= 3 vertices")
        elif n != counts[self.tag]:
            raise ValueError(f"tag {self.tag} requires {counts[self.tag]} vertices, got {n}")

    @property
    def is_degenerate(self) -> bool:
        return self.tag != "full"


EMPTY_POLYGON = ConvexPolygon((), "empty")


def _chain(pts: list, tol: float) -> list:
    """Monotone chain over lexicographically sorted points.

    Pops while the turn is right or collinear-within-tol, so collinear
    interior points are dropped.  Exact when coordinates are integral
    (tol = 0 and integer cross products do not round).
    """
    if len(pts) == 1:
        return list(pts)
    lower: list = []
    for p in pts:
        while len(lower) > 1:
            o = lower[-2]
            a = lower[-1]
            if (a[0] - o[0]) * (p[1] - o[1]) - (p[0] - o[0]) * (a[1] - o[1]) <= tol:
                lower.pop()
            else:
                break
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) > 1:
            o = upper[-2]
            a = upper[-1]
            if (a[0] - o[0]) * (p[1] - o[1]) - (p[0] - o[0]) * (a[1] - o[1]) <= tol:
                upper.pop()
            else:
                break
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and tuple(hull[0]) == tuple(hull[1]):
        return hull[:1]
    return hull


# Hand the remainder to the exact chain once a peel gets this small.
_PEEL_STOP = 256


def _peel(x: np.ndarray, y: np.ndarray, margin: float, upper: bool) -> np.ndarray:
    """Surviving indices of one envelope after iterative chord peeling.

    Over lexicographically sorted distinct points, an interior point
    on-or-below (resp. on-or-above) the chord of its current neighbors
    cannot be a strict vertex of the upper (resp. lower) hull, so it is
    dropped; with margin > 0 only clear cases are dropped and
    near-collinear points are left for the exact chain.  A true hull
    vertex is above (below) every chord of points straddling it, so it is
    never dropped and early termination only affects speed.
    """
    idx = np.arange(len(x))
    xs = x
    ys = y
    while len(xs) > _PEEL_STOP:
        cross = (xs[2:] - xs[:-2]) * (ys[1:-1] - ys[:-2]) - (xs[1:-1] - xs[:-2]) * (
            ys[2:] - ys[:-2]
        )
        drop = cross <= -margin if upper else cross >= margin
        if not drop.any():
            break
        keep = np.ones(len(xs), dtype=bool)
        keep[1:-1] = ~drop
        idx = idx[keep]
        xs = xs[keep]
        ys = ys[keep]
    return idx


def _hull_candidates(arr: np.ndarray, margin: float) -> np.ndarray:
    """Conservative hull-candidate reduction; output is lexicographically
    sorted and duplicate-free.

    Each x-column is squeezed to its y-extremes (interior column points
    are convex combinations of those), then both envelopes are peeled.
    """
    xs = np.ascontiguousarray(arr[:, 0])
    ys = np.ascontiguousarray(arr[:, 1])
    if not bool((xs[1:] >= xs[:-1]).all()):  # drifting walks arrive sorted
        order = np.argsort(xs)
        xs = xs[order]
        ys = ys[order]
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    colx = xs[starts]
    ymin = np.minimum.reduceat(ys, starts)
    ymax = np.maximum.reduceat(ys, starts)
    c = len(starts)
    qx = np.empty(2 * c)
    qy = np.empty(2 * c)
    qx[0::2] = colx
    qx[1::2] = colx
    qy[0::2] = ymin
    qy[1::2] = ymax
    keep = np.ones(2 * c, dtype=bool)
    keep[1::2] = ymax != ymin
    qx = qx[keep]
    qy = qy[keep]
    mask = np.zeros(len(qx), dtype=bool)
    mask[_peel(qx, qy, margin, upper=True)] = True
    mask[_peel(qx, qy, margin, upper=False)] = True
    return np.column_stack((qx[mask], qy[mask]))


def convex_hull(points) -> ConvexPolygon:
    """Convex hull of a finite point set (sequence of pairs or (n,2) array).

    Monotone chain, O(n log n).  The tag reflects the affine span of the
    input: collinear input yields a segment, coincident input a point.
    """
    if isinstance(points, np.ndarray):
        arr = points
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("expected an (n, 2) array")
        if arr.shape[0] == 0:
            raise ValueError("empty point set")
        if not np.isfinite(arr).all():
            raise ValueError("non-finite input")
        scale = float(np.abs(arr).max())
        integral = bool((arr == np.floor(arr)).all())
        if len(arr) >= _FILTER_MIN_POINTS:
            # integral inputs have exact cross products, so clear-cut
            # drops are safe at margin 0 and collinear runs collapse early
            margin = 0.0 if integral else COLLINEAR_REL_EPS * scale * scale
            arr = _hull_candidates(arr, margin)
        else:
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
        pts = arr.tolist()
    else:
        pts = [tuple(p) for p in points]
        if not pts:
            raise ValueError("empty point set")
        for p in pts:
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError("non-finite input")
        scale = max(max(abs(p[0]), abs(p[1])) for p in pts)
        integral = all(float(c).is_integer() for p in pts for c in p)
        pts.sort()
    tol = 0.0 if integral else COLLINEAR_REL_EPS * scale * scale
    hull = _chain(pts, tol)
    verts = tuple(Vec2(p[0], p[1]) for p in hull)
    if len(verts) == 1:
        return ConvexPolygon(verts, "point")
    if len(verts) == 2:
        return ConvexPolygon(verts, "segment")
    return ConvexPolygon(verts, "full")


def merge_hulls(p: ConvexPolygon, q: ConvexPolygon) -> ConvexPolygon:
    """Hull of the union; associative and commutative on vertex sets."""
    if not p.vertices:
        return q if q.vertices else EMPTY_POLYGON
    if not q.vertices:
        return p
    return convex_hull(p.vertices + q.vertices)


def area(p: ConvexPolygon) -> float:
    """Lebesgue area via the shoelace sum; zero for degenerate tags."""
    if p.tag != "full":
        return 0.0
    v = p.vertices
    acc = 0.0
    for i in range(len(v)):
        a = v[i]
        b = v[(i + 1) % len(v)]
        acc += a.x * b.y - b.x * a.y
    return 0.5 * abs(acc)


def perimeter(p: ConvexPolygon) -> float:
    """Boundary length; a segment counts twice (out and back) so the
    Steiner formula stays exact for flat hulls."""
    v = p.vertices
    if p.tag == "full":
        total = 0.0
        for i in range(len(v)):
            total += (v[(i + 1) % len(v)] - v[i]).norm()
        return total
    if p.tag == "segment":
        return 2.0 * (v[1] - v[0]).norm()
    return 0.0


def support_function(p: ConvexPolygon, theta: float) -> float:
    """h_P(theta) = max over vertices of v . (cos theta, sin theta)."""
    if not p.vertices:
        raise ValueError("support function of empty polygon")
    c = math.cos(theta)
    s = math.sin(theta)
    return max(v.x * c + v.y * s for v in p.vertices)


def cauchy_perimeter(p: ConvexPolygon) -> float:
    """Perimeter as the full-circle integral of the support function.

    Integrated exactly arc by arc: on the directions between the outward
    normals of the two edges meeting at a vertex v, the support function is
    ||v|| cos(theta - arg v), whose antiderivative is a sine.  Recentering
    at the vertex mean only improves conditioning; the shift integrates to
    zero over the circle.
    """
    v = p.vertices
    if len(v) < 2:
        return 0.0
    cx = sum(q.x for q in v) / len(v)
    cy = sum(q.y for q in v) / len(v)
    verts = [(q.x - cx, q.y - cy) for q in v]
    m = len(verts)
    psi = []
    for i in range(m):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % m]
        psi.append(math.atan2(-(bx - ax), by - ay))
    total = 0.0
    for j in range(m):
        vx, vy = verts[j]
        r = math.hypot(vx, vy)
        if r == 0.0:
            continue
        phi = math.atan2(vy, vx)
        lo = psi[(j - 1) % m]
        delta = (psi[j] - lo) % (2.0 * math.pi)
        total += r * (math.sin(lo + delta - phi) - math.sin(lo - phi))
    return total


def _segment_dist2(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        ex = px - ax
        ey = py - ay
        return ex * ex + ey * ey
    t = ((px - ax) * dx + (py - ay) * dy) / dd
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return ex * ex + ey * ey


def _dist_to_polygon(px: float, py: float, p: ConvexPolygon) -> float:
    v = p.vertices
    if p.tag == "point":
        return math.hypot(px - v[0].x, py - v[0].y)
    if p.tag == "segment":
        return math.sqrt(_segment_dist2(px, py, v[0].x, v[0].y, v[1].x, v[1].y))
    inside = True
    best = math.inf
    for i in range(len(v)):
        a = v[i]
        b = v[(i + 1) % len(v)]
        if (b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y) < 0.0:
            inside = False
        d2 = _segment_dist2(px, py, a.x, a.y, b.x, b.y)
        if d2 < best:
            best = d2
    return 0.0 if inside else math.sqrt(best)


def hausdorff(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """Hausdorff distance between two convex polygons.

    Exact for convex sets: x -> dist(x, Q) is convex, so its maximum over P
    is attained at a vertex of P; ditto the other direction.
    """
    if not p.vertices or not q.vertices:
        raise ValueError("hausdorff distance of empty polygon")
    d = 0.0
    for v in p.vertices:
        d = max(d, _dist_to_polygon(v.x, v.y, q))
    for v in q.vertices:
        d = max(d, _dist_to_polygon(v.x, v.y, p))
    return d


@dataclass(frozen=True)
class PolyPath:
    """Piecewise-linear path from the origin on a uniform time grid."""

    breakpoints: tuple[Vec2, ...]

    def __post_init__(self):
        if not self.breakpoints:
            raise ValueError("path needs at least one breakpoint")
        o = self.breakpoints[0]
        if o.x != 0 or o.y != 0:
            raise ValueError("path must start at the origin")
        for b in self.breakpoints:
            if not (math.isfinite(b.x) and math.isfinite(b.y)):
                raise ValueError("non-finite input")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "PolyPath":
        return cls(tuple(Vec2(p[0], p[1]) for p in points))


def path_sup_distance(f: PolyPath, g: PolyPath) -> float:
    """sup_t |f(t) - g(t)| for paths sharing a breakpoint grid.

    Between shared breakpoints the squared distance is a convex quadratic
    in t, so its maximum sits at a breakpoint; the max over breakpoints is
    exact.
    """
    if len(f.breakpoints) != len(g.breakpoints):
        raise ValueError("mismatched grids")
    return max((a - b).norm() for a, b in zip(f.breakpoints, g.breakpoints))


def hull_of_path(f: PolyPath) -> ConvexPolygon:
    """Hull of the path image (= hull of breakpoints for polygonal paths)."""
    return convex_hull(f.breakpoints)


def parallel_body_area_mc(
    p: ConvexPolygon, r: float, samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Rejection-sampling estimate of the area of the r-parallel body.

    Samples the bounding box of the dilated hull and tests dist(x, P) <= r;
    returns (estimate, binomial standard error).
    """
    if r < 0:
        raise ValueError("negative dilation radius")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if not p.vertices:
        raise ValueError("empty polygon")
    vx = np.array([v.x for v in p.vertices])
    vy = np.array([v.y for v in p.vertices])
    lo_x, hi_x = vx.min() - r, vx.max() + r
    lo_y, hi_y = vy.min() - r, vy.max() + r
    box = (hi_x - lo_x) * (hi_y - lo_y)
    if box == 0.0:
        return 0.0, 0.0
    xs = lo_x + (hi_x - lo_x) * rng.random(samples)
    ys = lo_y + (hi_y - lo_y) * rng.random(samples)

    if p.tag == "full":
        inside = np.ones(samples, dtype=bool)
        best = np.full(samples, np.inf)
        n = len(vx)
        for i in range(n):
            ax, ay = vx[i], vy[i]
            bx, by = vx[(i + 1) % n], vy[(i + 1) % n]
            inside &= (bx - ax) * (ys - ay) - (xs - ax) * (by - ay) >= 0.0
            best = np.minimum(best, _segment_dist2_vec(xs, ys, ax, ay, bx, by))
        hit = inside | (best <= r * r)
    elif p.tag == "segment":
        d2 = _segment_dist2_vec(xs, ys, vx[0], vy[0], vx[1], vy[1])
        hit = d2 <= r * r
    else:
        d2 = (xs - vx[0]) ** 2 + (ys - vy[0]) ** 2
        hit = d2 <= r * r
    frac = hit.mean()
    est = box * frac
    se = box * math.sqrt(max(frac * (1.0 - frac), 0.0) / samples)
    return float(est), float(se)


def _segment_dist2_vec(xs, ys, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return (xs - ax) ** 2 + (ys - ay) ** 2
    t = np.clip(((xs - ax) * dx + (ys - ay) * dy) / dd, 0.0, 1.0)
    ex = xs - (ax + t * dx)
    ey = ys - (ay + t * dy)
    return ex * ex + ey * ey
