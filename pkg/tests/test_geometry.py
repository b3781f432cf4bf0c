import math

import numpy as np
import pytest

from hullwalk import geometry
from hullwalk.checks import brute_force_hull
from hullwalk.geometry import (
    ConvexPolygon,
    PolyPath,
    Vec2,
    area,
    cauchy_perimeter,
    convex_hull,
    hausdorff,
    hull_of_path,
    merge_hulls,
    parallel_body_area_mc,
    path_sup_distance,
    perimeter,
    support_function,
)

SQUARE = convex_hull([(0, 0), (1, 0), (1, 1), (0, 1)])


def verts(p):
    return {(v.x, v.y) for v in p.vertices}


class TestConvexHull:
    def test_triangle_already_convex(self):
        h = convex_hull([(0, 0), (1, 0), (0, 1)])
        assert h.tag == "full"
        assert verts(h) == {(0, 0), (1, 0), (0, 1)}

    def test_collinear_input_gives_segment(self):
        h = convex_hull([(0, 0), (1, 1), (2, 2)])
        assert h.tag == "segment"
        assert verts(h) == {(0, 0), (2, 2)}

    def test_single_and_duplicate_points(self):
        assert convex_hull([(3, 4)]).tag == "point"
        h = convex_hull([(3, 4), (3, 4), (3, 4)])
        assert h.tag == "point" and verts(h) == {(3, 4)}

    def test_counterclockwise_orientation(self):
        v = SQUARE.vertices
        for i in range(len(v)):
            a, b, c = v[i], v[(i + 1) % 4], v[(i + 2) % 4]
            assert (b - a).cross(c - b) > 0

    def test_matches_bruteforce_on_lattice_points(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            pts = rng.integers(-10, 11, size=(30, 2)).astype(float)
            assert verts(convex_hull(pts)) == brute_force_hull(pts)

    def test_matches_bruteforce_on_floats(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            pts = rng.uniform(-10, 10, size=(int(rng.integers(3, 31)), 2))
            got = sorted(verts(convex_hull(pts)))
            want = sorted(brute_force_hull(pts))
            assert len(got) == len(want)
            for g, w in zip(got, want):
                assert math.hypot(g[0] - w[0], g[1] - w[1]) <= 1e-9

    def test_errors(self):
        with pytest.raises(ValueError, match="empty point set"):
            convex_hull([])
        with pytest.raises(ValueError, match="non-finite input"):
            convex_hull([(0.0, float("nan"))])
        with pytest.raises(ValueError, match="non-finite input"):
            convex_hull(np.array([[0.0, np.inf]]))


class TestArea:
    def test_unit_square(self):
        assert area(SQUARE) == 1.0

    def test_segment_has_no_area(self):
        assert area(convex_hull([(0, 0), (2, 2)])) == 0.0

    def test_matches_rejection_sampling(self):
        # independent MC oracle: uniform points in the bounding box,
        # containment via per-edge half-plane tests written out here
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(20, 2))
        hull = convex_hull(pts)
        v = np.array([(q.x, q.y) for q in hull.vertices])
        lo, hi = v.min(axis=0), v.max(axis=0)
        samples = 200_000
        xy = lo + (hi - lo) * rng.random((samples, 2))
        inside = np.ones(samples, dtype=bool)
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            inside &= (b[0] - a[0]) * (xy[:, 1] - a[1]) - (xy[:, 0] - a[0]) * (
                b[1] - a[1]
            ) >= 0
        box = np.prod(hi - lo)
        frac = inside.mean()
        est = box * frac
        se = box * math.sqrt(frac * (1 - frac) / samples)
        assert abs(area(hull) - est) <= 3 * se


class TestPerimeter:
    def test_unit_square(self):
        assert perimeter(SQUARE) == 4.0

    def test_segment_counts_twice(self):
        assert perimeter(convex_hull([(0, 0), (2, 2)])) == pytest.approx(
            4 * math.sqrt(2), abs=1e-12
        )

    def test_regular_hexagon(self):
        pts = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
        assert perimeter(convex_hull(pts)) == pytest.approx(6.0, abs=1e-12)


class TestSupportFunction:
    def test_unit_square_diagonal(self):
        assert support_function(SQUARE, math.pi / 4) == pytest.approx(math.sqrt(2))

    def test_origin_point(self):
        p = convex_hull([(0, 0)])
        for theta in np.linspace(0, 2 * math.pi, 17):
            assert support_function(p, theta) == 0.0

    def test_majorizes_every_input_point(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(40, 2))
        hull = convex_hull(pts)
        for theta in np.linspace(0, 2 * math.pi, 256, endpoint=False):
            h = support_function(hull, theta)
            dots = pts @ np.array([math.cos(theta), math.sin(theta)])
            assert h >= dots.max() - 1e-12
            assert any(
                abs(v.x * math.cos(theta) + v.y * math.sin(theta) - h) < 1e-12
                for v in hull.vertices
            )

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            support_function(ConvexPolygon((), "empty"), 0.0)


class TestCauchyPerimeter:
    def test_unit_square(self):
        assert cauchy_perimeter(SQUARE) == pytest.approx(4.0, rel=1e-12)

    def test_unit_segment_through_origin(self):
        seg = convex_hull([(-0.5, 0), (0.5, 0)])
        assert cauchy_perimeter(seg) == pytest.approx(2.0, rel=1e-12)

    def test_matches_edge_sum_on_random_hulls(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            pts = rng.normal(scale=rng.uniform(0.1, 50), size=(int(rng.integers(3, 40)), 2))
            pts += rng.normal(scale=10, size=2)  # off-center on purpose
            hull = convex_hull(pts)
            assert cauchy_perimeter(hull) == pytest.approx(perimeter(hull), rel=1e-9)


class TestHausdorff:
    def test_nested_squares(self):
        big = convex_hull([(0, 0), (2, 0), (2, 2), (0, 2)])
        assert hausdorff(SQUARE, big) == pytest.approx(math.sqrt(2))

    def test_identity(self):
        assert hausdorff(SQUARE, SQUARE) == 0.0

    def test_matches_support_grid(self):
        rng = np.random.default_rng(12)
        grid = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
        for _ in range(20):
            p = convex_hull(np.vstack([[0, 0], rng.normal(size=(12, 2))]))
            q = convex_hull(np.vstack([[0, 0], rng.normal(size=(12, 2))]))
            sup = max(
                abs(support_function(p, t) - support_function(q, t)) for t in grid
            )
            rad = max(v.norm() for v in p.vertices + q.vertices)
            lipschitz_err = 2 * rad * (2 * math.pi / 4096)
            d = hausdorff(p, q)
            assert sup - 1e-12 <= d <= sup + lipschitz_err


class TestPathSupDistance:
    def test_identical_paths(self):
        f = PolyPath.from_points([(0, 0), (1, 2), (3, 1)])
        assert path_sup_distance(f, f) == 0.0

    def test_zero_vs_segment(self):
        f = PolyPath.from_points([(0, 0), (0, 0)])
        g = PolyPath.from_points([(0, 0), (1, 0)])
        assert path_sup_distance(f, g) == 1.0

    def test_at_least_dense_sampling(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            k = int(rng.integers(2, 20))
            f = PolyPath.from_points(
                np.vstack([[0, 0], np.cumsum(rng.normal(size=(k, 2)), axis=0)])
            )
            g = PolyPath.from_points(
                np.vstack([[0, 0], np.cumsum(rng.normal(size=(k, 2)), axis=0)])
            )
            fa = np.array([(v.x, v.y) for v in f.breakpoints])
            ga = np.array([(v.x, v.y) for v in g.breakpoints])
            ts = rng.random(10_000) * k
            idx = np.minimum(ts.astype(int), k - 1)
            frac = (ts - idx)[:, None]
            fv = fa[idx] * (1 - frac) + fa[idx + 1] * frac
            gv = ga[idx] * (1 - frac) + ga[idx + 1] * frac
            dense = np.hypot(*(fv - gv).T).max()
            assert path_sup_distance(f, g) >= dense - 1e-12

    def test_mismatched_grids(self):
        f = PolyPath.from_points([(0, 0), (1, 0)])
        g = PolyPath.from_points([(0, 0), (1, 0), (2, 0)])
        with pytest.raises(ValueError, match="mismatched grids"):
            path_sup_distance(f, g)

    def test_path_must_start_at_origin(self):
        with pytest.raises(ValueError):
            PolyPath.from_points([(1, 0), (2, 0)])


class TestMergeHulls:
    def test_idempotent(self):
        assert verts(merge_hulls(SQUARE, SQUARE)) == verts(SQUARE)

    def test_disjoint_squares(self):
        other = convex_hull([(10, 0), (11, 0), (11, 1), (10, 1)])
        merged = merge_hulls(SQUARE, other)
        assert verts(merged) == {(0, 0), (0, 1), (10, 0), (10, 1), (11, 0), (11, 1)}

    def test_chunked_equals_one_shot(self):
        rng = np.random.default_rng(17)
        steps = rng.choice([-1.0, 1.0], size=(10_000, 2))
        pts = np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
        running = convex_hull(pts[:1])
        for chunk in np.array_split(pts, 10):
            running = merge_hulls(running, convex_hull(chunk))
        assert verts(running) == verts(convex_hull(pts))


class TestParallelBodyAreaMC:
    def test_point_dilates_to_disk(self):
        rng = np.random.default_rng(2)
        est, se = parallel_body_area_mc(convex_hull([(0, 0)]), 1.0, 100_000, rng)
        assert abs(est - math.pi) <= 3 * se

    def test_square_r0(self):
        rng = np.random.default_rng(4)
        est, se = parallel_body_area_mc(SQUARE, 0.0, 50_000, rng)
        assert abs(est - 1.0) <= 3 * se

    def test_steiner_on_random_hull(self):
        rng = np.random.default_rng(6)
        hull = convex_hull(rng.normal(size=(15, 2)))
        r = 0.5
        est, se = parallel_body_area_mc(hull, r, 200_000, rng)
        exact = area(hull) + r * perimeter(hull) + math.pi * r * r
        assert abs(est - exact) <= 3 * se

    def test_errors(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            parallel_body_area_mc(SQUARE, -0.1, 10_000, rng)
        with pytest.raises(ValueError):
            parallel_body_area_mc(SQUARE, 0.1, 10, rng)


class TestPathHullLemmas:
    def test_contraction(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            k = int(rng.integers(2, 30))
            f = PolyPath.from_points(
                np.vstack([[0, 0], np.cumsum(rng.normal(size=(k, 2)), axis=0)])
            )
            g = PolyPath.from_points(
                np.vstack([[0, 0], np.cumsum(rng.normal(size=(k, 2)), axis=0)])
            )
            assert hausdorff(hull_of_path(f), hull_of_path(g)) <= path_sup_distance(
                f, g
            ) + 1e-12

    def test_functional_continuity(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            a = convex_hull(np.vstack([[0, 0], rng.normal(size=(10, 2))]))
            b = convex_hull(np.vstack([[0, 0], rng.normal(size=(10, 2))]))
            d = hausdorff(a, b)
            la, lb = perimeter(a), perimeter(b)
            assert abs(la - lb) <= 2 * math.pi * d + 1e-9
            assert abs(area(a) - area(b)) <= math.pi * d * d + max(la, lb) * d + 1e-9

    def test_monotonicity(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            pts = rng.normal(size=(20, 2))
            sub = pts[: int(rng.integers(1, 20))]
            assert perimeter(convex_hull(sub)) <= perimeter(convex_hull(pts)) + 1e-9
            assert area(convex_hull(sub)) <= area(convex_hull(pts)) + 1e-9
