from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbmset.errors import (
    CollinearInput,
    DuplicatePointsBeyondTolerance,
    EmptyReferenceSet,
    TooFewPoints,
)
from rbmset.geometry import (
    Arc,
    Disk,
    _exact_ints,
    delaunay,
    euclidean_mst,
    incircle,
    merge_duplicates,
    nn_distances,
    orient2d,
    polygon_area,
)

# brute-force Prim on default_rng(200).random((200, 2)), computed once
PRIM_WEIGHT_200 = 9.417920341605706
PRIM_MAX_EDGE_200 = 0.11117716507251033


def _prim(p):
    n = len(p)
    d = np.hypot(*(p[:, None] - p[None]).transpose(2, 0, 1))
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    total = 0.0
    for _ in range(n - 1):
        b = np.where(in_tree, np.inf, best)
        k = int(np.argmin(b))
        total += b[k]
        in_tree[k] = True
        best = np.minimum(best, d[k])
    return total


# -- predicates ---------------------------------------------------------------


def _orient_fraction(a, b, c):
    fa = [Fraction(v) for v in (*a, *b, *c)]
    ax, ay, bx, by, cx, cy = fa
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _incircle_fraction(a, b, c, d):
    rows = []
    for p in (a, b, c):
        dx, dy = Fraction(p[0]) - Fraction(d[0]), Fraction(p[1]) - Fraction(d[1])
        rows.append((dx, dy, dx * dx + dy * dy))
    (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = rows
    return a1 * (b2 * c3 - b3 * c2) - a2 * (b1 * c3 - b3 * c1) + a3 * (b1 * c2 - b2 * c1)


def _sign(v):
    return (v > 0) - (v < 0)


def test_orient2d_basic_signs():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1
    assert orient2d((0, 0), (1, 1), (2, 2)) == 0


def test_orient2d_nearly_collinear_matches_rationals():
    # points within a few ulps of the line y = x
    rng = np.random.default_rng(7)
    for _ in range(300):
        t = rng.random(3) * 10
        eps = rng.integers(-3, 4, size=3) * np.finfo(float).eps
        pts = [(t[k], t[k] * (1 + eps[k])) for k in range(3)]
        assert orient2d(*pts) == _sign(_orient_fraction(*pts))


def test_incircle_cocircular_is_zero():
    assert incircle((0, 0), (1, 0), (1, 1), (0, 1)) == 0
    assert incircle((0, 0), (1, 0), (0, 1), (0.5, 0.5)) == 1
    assert incircle((0, 0), (1, 0), (0, 1), (3, 3)) == -1


def test_incircle_matches_rationals_near_degenerate():
    rng = np.random.default_rng(3)
    for _ in range(300):
        ang = rng.random(4) * 2 * np.pi
        pts = [(math.cos(a), math.sin(a)) for a in ang]
        a, b, c, d = pts
        if _sign(_orient_fraction(a, b, c)) <= 0:
            a, b = b, a
        assert incircle(a, b, c, d) == _sign(_incircle_fraction(a, b, c, d))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False), min_size=6, max_size=6))
def test_orient2d_property_matches_rationals(v):
    a, b, c = (v[0], v[1]), (v[2], v[3]), (v[4], v[5])
    assert orient2d(a, b, c) == _sign(_orient_fraction(a, b, c))


def test_exact_scaling_is_lossless():
    vals = [0.1, -3.5e-7, 12345.678, 0.0, 2.0**-60]
    ints = _exact_ints(*vals)
    # a common power-of-two factor: all ratios are preserved exactly
    unit = Fraction(vals[0]) / ints[0]
    for v, k in zip(vals, ints):
        assert isinstance(k, int)
        assert Fraction(k) * unit == Fraction(v)


# -- arcs and disks -------------------------------------------------------------


def test_arc_normalises_angles_and_length():
    a = Arc((0.0, 0.0), 2.0, -math.pi / 2, 3 * math.pi)
    assert 0 <= a.start_angle < 2 * math.pi
    assert a.end_angle == pytest.approx(math.pi)
    assert a.span == pytest.approx(3 * math.pi / 2)
    assert a.length == pytest.approx(3 * math.pi)
    assert Arc((0.0, 0.0), 2.0, -math.pi / 2, 3 * math.pi, "cw").span == pytest.approx(math.pi / 2)


def test_arc_rejects_bad_radius():
    with pytest.raises(ValueError):
        Arc((0, 0), 0.0, 0, 1)


@pytest.mark.parametrize("orientation", ["ccw", "cw"])
def test_arc_green_half_circles_give_disk_area(orientation):
    r = 0.7
    if orientation == "ccw":
        arcs = [Arc.from_span((1, 2), r, 0, math.pi), Arc.from_span((1, 2), r, math.pi, math.pi)]
        expected = math.pi * r * r
    else:
        arcs = [Arc.from_span((1, 2), r, math.pi, math.pi, "cw"), Arc.from_span((1, 2), r, 0, math.pi, "cw")]
        expected = -math.pi * r * r
    assert sum(a.green() for a in arcs) == pytest.approx(expected, rel=1e-14)


def test_arc_green_tiny_span_is_accurate():
    a = Arc.from_span((0.0, 0.0), 1.0, 0.3, 1e-6)
    # chord part plus segment area (span^3 / 12)
    p, q = a.start_point, a.end_point
    chord = 0.5 * (p[0] * q[1] - p[1] * q[0])
    assert a.green() - chord == pytest.approx(1e-18 / 12, rel=1e-6)


def test_arc_flatten_respects_chord_tolerance():
    a = Arc.from_span((0.0, 0.0), 1.0, 0.0, math.pi)
    pts = a.flatten(1e-4)
    mids = 0.5 * (pts[1:] + pts[:-1])
    sag = 1.0 - np.hypot(mids[:, 0], mids[:, 1])
    assert sag.max() <= 1e-4 + 1e-15
    assert np.allclose(pts[0], a.start_point) and np.allclose(pts[-1], a.end_point)


def test_disk_contains_closed():
    d = Disk((0.0, 0.0), 1.0)
    assert d.contains((1.0, 0.0))
    assert not d.contains((1.0 + 1e-9, 0.0))
    assert d.area == pytest.approx(math.pi)


def test_polygon_area_signed():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert polygon_area(sq) == 1.0
    assert polygon_area(sq[::-1]) == -1.0


# -- Delaunay -------------------------------------------------------------------


def test_delaunay_three_points_one_triangle():
    t = delaunay([(0, 0), (1, 0), (0, 1)])
    assert t.triangles.shape == (1, 3)


def test_delaunay_unit_square_lexicographic_diagonal():
    t = delaunay([(1, 1), (0, 1), (0, 0), (1, 0)])
    assert len(t.triangles) == 2
    shared = set(map(tuple, t.vertices[t.triangles[0]].tolist())) & set(
        map(tuple, t.vertices[t.triangles[1]].tolist())
    )
    assert shared == {(0.0, 0.0), (1.0, 1.0)}


def test_delaunay_square_deterministic_under_permutation():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    ref = delaunay(pts)
    ref_tris = {frozenset(map(tuple, ref.vertices[t].tolist())) for t in ref.triangles}
    rng = np.random.default_rng(0)
    for _ in range(10):
        perm = rng.permutation(4)
        t = delaunay([pts[k] for k in perm])
        tris = {frozenset(map(tuple, t.vertices[tri].tolist())) for tri in t.triangles}
        assert tris == ref_tris


def test_delaunay_euler_count_1000_points():
    p = np.random.default_rng(1000).random((1000, 2))
    t = delaunay(p)
    hull = t.hull_vertex_count()
    assert hull == 18
    assert len(t.triangles) == 2 * (1000 - hull) + hull - 2 == 1980


def test_delaunay_ccw_and_empty_circumcircle():
    p = np.random.default_rng(5).random((300, 2))
    t = delaunay(p)
    v = t.vertices
    for tri in t.triangles:
        assert orient2d(*v[tri]) == 1
    centers, radii = t.circumcircles()
    d = np.hypot(*(v[None, :, :] - centers[:, None, :]).transpose(2, 0, 1))
    assert np.all(d >= radii[:, None] * (1 - 1e-10))


def test_delaunay_neighbors_are_consistent():
    t = delaunay(np.random.default_rng(9).random((100, 2)))
    for k, tri in enumerate(t.triangles):
        for j in range(3):
            nb = t.neighbors[k, j]
            if nb < 0:
                continue
            edge = {tri[(j + 1) % 3], tri[(j + 2) % 3]}
            assert edge <= set(t.triangles[nb])
            assert k in t.neighbors[nb]


def test_delaunay_cocircular_many_points():
    a = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    t = delaunay(np.column_stack([np.cos(a), np.sin(a)]))
    assert len(t.triangles) == 62


def test_delaunay_merges_close_duplicates():
    t = delaunay([(0, 0), (1, 0), (0, 1), (1e-13, 0)])
    assert t.n_vertices == 3


def test_delaunay_errors():
    with pytest.raises(TooFewPoints):
        delaunay([(0, 0), (1, 1)])
    with pytest.raises(CollinearInput):
        delaunay([(0, 0), (1, 1), (2, 2), (3, 3)])
    with pytest.raises(DuplicatePointsBeyondTolerance):
        delaunay([(0, 0), (0, 0), (1, 1)])


def test_merge_duplicates_keeps_first_occurrence():
    u, inv, rep = merge_duplicates(np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 1.0 + 1e-14]]))
    assert u.tolist() == [[1.0, 1.0], [0.0, 0.0]]
    assert inv.tolist() == [0, 1, 0]
    assert rep.tolist() == [0, 1]


# -- minimum spanning tree -----------------------------------------------------


def test_mst_collinear():
    e = euclidean_mst([(0, 0), (1, 0), (2, 0), (3, 0)])
    assert sorted(e.length.tolist()) == [1.0, 1.0, 1.0]
    assert e.max_length == 1.0


def test_mst_two_clusters_single_bridge():
    rng = np.random.default_rng(1)
    a = rng.random((30, 2)) * 0.1
    b = rng.random((30, 2)) * 0.1 + [2.0, 0.0]
    p = np.vstack([a, b])
    e = euclidean_mst(p)
    cross = (e.i < 30) != (e.j < 30)
    assert cross.sum() == 1
    gap = np.hypot(*(a[:, None] - b[None]).transpose(2, 0, 1)).min()
    assert e.max_length == pytest.approx(gap, abs=1e-15)


def test_mst_matches_frozen_prim_weight():
    p = np.random.default_rng(200).random((200, 2))
    e = euclidean_mst(p)
    assert len(e) == 199
    assert e.total_length == pytest.approx(PRIM_WEIGHT_200, abs=1e-12)
    assert e.max_length == pytest.approx(PRIM_MAX_EDGE_200, abs=1e-15)
    assert e.total_length == pytest.approx(_prim(p), abs=1e-12)


def test_mst_is_spanning_tree():
    p = np.random.default_rng(4).random((150, 2))
    e = euclidean_mst(p)
    parent = list(range(150))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in zip(e.i, e.j):
        ri, rj = find(i), find(j)
        assert ri != rj  # acyclic
        parent[ri] = rj
    assert len({find(k) for k in range(150)}) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5))
def test_mst_invariant_under_rigid_motion_and_permutation(seed, theta, tx, ty):
    rng = np.random.default_rng(seed)
    p = rng.random((40, 2))
    c, s = math.cos(theta), math.sin(theta)
    q = p @ np.array([[c, s], [-s, c]]) + [tx, ty]
    q = q[rng.permutation(40)]
    a, b = euclidean_mst(p), euclidean_mst(q)
    assert b.max_length == pytest.approx(a.max_length, abs=1e-12)
    assert b.total_length == pytest.approx(a.total_length, abs=1e-10)


def test_mst_too_few_points():
    with pytest.raises(TooFewPoints):
        euclidean_mst([(0, 0)])


# -- nearest neighbours ---------------------------------------------------------


def test_nn_trivial_cases():
    p = np.random.default_rng(0).random((20, 2))
    assert np.all(nn_distances(p, p) == 0)
    assert nn_distances([(0, 0)], [(3, 0), (0, 4)]).tolist() == [3.0]


def test_nn_matches_brute_force():
    rng = np.random.default_rng(11)
    q, r = rng.random((500, 2)), rng.random((500, 2))
    brute = np.hypot(*(q[:, None] - r[None]).transpose(2, 0, 1)).min(1)
    assert np.max(np.abs(nn_distances(q, r) - brute)) <= 1e-12


def test_nn_two_point_symmetry():
    a, b = np.array([[0.3, 0.1]]), np.array([[-1.0, 2.0]])
    assert nn_distances(a, b)[0] == nn_distances(b, a)[0]


def test_nn_empty_reference():
    with pytest.raises(EmptyReferenceSet):
        nn_distances([(0, 0)], np.zeros((0, 2)))
