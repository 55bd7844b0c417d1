"""Low-level planar geometry: disks, arcs, robust predicates, Delaunay
triangulation, Euclidean minimum spanning tree and nearest-neighbour queries.

Point sets are plain ``(n, 2)`` float arrays throughout the package.
The triangulation is computed by Qhull (through :mod:`scipy.spatial`) and then
legalised with exact predicates, so that the result is a true Delaunay
triangulation with a deterministic, order independent choice of diagonal in
cocircular configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import Delaunay as _QhullDelaunay
from scipy.spatial import cKDTree

from .errors import (
    CollinearInput,
    DuplicatePointsBeyondTolerance,
    EmptyReferenceSet,
    TooFewPoints,
)

TWO_PI = 2.0 * math.pi

#: absolute distance under which two input points are treated as one site
MERGE_TOL = 1e-12

#: relative size (|det| / permanent) below which predicates go exact
PREDICATE_TOL = 1e-10


def as_points(points, name: str = "points") -> np.ndarray:
    """Return ``points`` as a C-contiguous ``(n, 2)`` float64 array."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim == 1 and arr.shape[0] == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return np.ascontiguousarray(arr)


# ---------------------------------------------------------------------------
# Disks and arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def contains(self, points, closed: bool = True) -> np.ndarray:
        p = as_points(points)
        d2 = (p[:, 0] - self.center[0]) ** 2 + (p[:, 1] - self.center[1]) ** 2
        r2 = self.radius**2
        return d2 <= r2 if closed else d2 < r2


def _one_minus_sin(phi: float) -> float:
    """phi - sin(phi), accurate for tiny phi."""
    if abs(phi) < 1e-2:
        p2 = phi * phi
        return phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0))
    return phi - math.sin(phi)


@dataclass(frozen=True)
class Arc:
    """Circular arc from ``start_angle`` to ``end_angle`` around ``center``.

    Angles are stored normalised to ``[0, 2*pi)``.  A full circle cannot be
    represented by a single arc; boundaries store it as two half circles.
    """

    center: tuple[float, float]
    radius: float
    start_angle: float
    end_angle: float
    orientation: str = "ccw"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")
        if self.orientation not in ("ccw", "cw"):
            raise ValueError("orientation must be 'ccw' or 'cw'")
        object.__setattr__(self, "start_angle", float(self.start_angle) % TWO_PI)
        object.__setattr__(self, "end_angle", float(self.end_angle) % TWO_PI)

    @classmethod
    def from_span(cls, center, radius, start, span, orientation="ccw") -> "Arc":
        end = start + span if orientation == "ccw" else start - span
        return cls((float(center[0]), float(center[1])), float(radius), start, end, orientation)

    @property
    def span(self) -> float:
        if self.orientation == "ccw":
            return (self.end_angle - self.start_angle) % TWO_PI
        return (self.start_angle - self.end_angle) % TWO_PI

    @property
    def length(self) -> float:
        return self.radius * self.span

    def point_at(self, angle: float) -> np.ndarray:
        return np.array(
            [
                self.center[0] + self.radius * math.cos(angle),
                self.center[1] + self.radius * math.sin(angle),
            ]
        )

    @property
    def start_point(self) -> np.ndarray:
        return self.point_at(self.start_angle)

    @property
    def end_point(self) -> np.ndarray:
        return self.point_at(self.end_angle)

    def sample(self, n: int) -> np.ndarray:
        """``n >= 2`` points along the arc, endpoints included."""
        sign = 1.0 if self.orientation == "ccw" else -1.0
        t = self.start_angle + sign * self.span * np.linspace(0.0, 1.0, n)
        return np.column_stack(
            [self.center[0] + self.radius * np.cos(t), self.center[1] + self.radius * np.sin(t)]
        )

    def flatten(self, chord_tol: float = 1e-4) -> np.ndarray:
        """Polyline whose chords deviate from the arc by at most ``chord_tol``."""
        if chord_tol >= self.radius:
            n_seg = max(2, int(math.ceil(self.span / (math.pi / 2))))
        else:
            max_step = 2.0 * math.acos(1.0 - chord_tol / self.radius)
            n_seg = max(1, int(math.ceil(self.span / max_step)))
        return self.sample(n_seg + 1)

    def green(self) -> float:
        """Contribution of the arc to the boundary integral (x dy - y dx) / 2."""
        p, q = self.start_point, self.end_point
        chord = 0.5 * (p[0] * q[1] - p[1] * q[0])
        seg = 0.5 * self.radius**2 * _one_minus_sin(self.span)
        return chord + seg if self.orientation == "ccw" else chord - seg


def arc_green(cx, cy, r, a0, a1, ccw: bool = True):
    """Vectorised version of :meth:`Arc.green` for angular spans ``a1 - a0 >= 0``
    measured in the direction of travel.  ``a0`` is the start angle."""
    a0 = np.asarray(a0, dtype=float)
    span = np.asarray(a1, dtype=float) - a0
    a_end = a0 + span if ccw else a0 - span
    px, py = cx + r * np.cos(a0), cy + r * np.sin(a0)
    qx, qy = cx + r * np.cos(a_end), cy + r * np.sin(a_end)
    chord = 0.5 * (px * qy - py * qx)
    small = np.abs(span) < 1e-2
    s2 = span * span
    oms = np.where(
        small,
        span * s2 / 6.0 * (1.0 - s2 / 20.0 * (1.0 - s2 / 42.0)),
        span - np.sin(span),
    )
    seg = 0.5 * r * r * oms
    return chord + seg if ccw else chord - seg


# ---------------------------------------------------------------------------
# Robust predicates
# ---------------------------------------------------------------------------


def _exact_ints(*coords):
    """Scale floats by a common power of two so that they become integers;
    signs of polynomial predicates are unchanged by the scaling."""
    parts = []
    for v in coords:
        m, e = math.frexp(v)
        parts.append((int(math.ldexp(m, 53)), e - 53))
    emin = min(e for _, e in parts)
    return [m << (e - emin) for m, e in parts]


def _orient_exact(a, b, c) -> int:
    ax, ay, bx, by, cx, cy = _exact_ints(a[0], a[1], b[0], b[1], c[0], c[1])
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def _incircle_exact(a, b, c, d) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = _exact_ints(
        a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1]
    )
    rows = []
    for px, py in ((ax - dx, ay - dy), (bx - dx, by - dy), (cx - dx, cy - dy)):
        rows.append((px, py, px * px + py * py))
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = rows
    det = a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)
    return (det > 0) - (det < 0)


def orient2d(a, b, c) -> int:
    """Sign of the orientation of ``(a, b, c)``: +1 counter-clockwise, -1
    clockwise, 0 collinear.  Falls back to rational arithmetic when the
    floating point determinant is not clearly separated from zero."""
    t1 = (b[0] - a[0]) * (c[1] - a[1])
    t2 = (b[1] - a[1]) * (c[0] - a[0])
    det = t1 - t2
    if abs(det) > PREDICATE_TOL * (abs(t1) + abs(t2)):
        return 1 if det > 0 else -1
    return _orient_exact(a, b, c)


def incircle(a, b, c, d) -> int:
    """+1 if ``d`` is strictly inside the circle through the counter-clockwise
    triangle ``(a, b, c)``, -1 if outside and 0 if cocircular."""
    det, perm = _incircle_float(
        np.asarray(a, float)[None], np.asarray(b, float)[None], np.asarray(c, float)[None],
        np.asarray(d, float)[None],
    )
    if abs(det[0]) > PREDICATE_TOL * perm[0]:
        return 1 if det[0] > 0 else -1
    return _incircle_exact(a, b, c, d)


def _incircle_float(a, b, c, d):
    adx, ady = a[:, 0] - d[:, 0], a[:, 1] - d[:, 1]
    bdx, bdy = b[:, 0] - d[:, 0], b[:, 1] - d[:, 1]
    cdx, cdy = c[:, 0] - d[:, 0], c[:, 1] - d[:, 1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    bc = bdx * cdy - bdy * cdx
    ca = cdx * ady - cdy * adx
    ab = adx * bdy - ady * bdx
    det = alift * bc + blift * ca + clift * ab
    perm = (
        alift * (np.abs(bdx * cdy) + np.abs(bdy * cdx))
        + blift * (np.abs(cdx * ady) + np.abs(cdy * adx))
        + clift * (np.abs(adx * bdy) + np.abs(ady * bdx))
    )
    return det, perm


def incircle_many(a, b, c, d) -> np.ndarray:
    """Vectorised :func:`incircle`; returns an int array of signs."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    det, perm = _incircle_float(a, b, c, d)
    out = np.sign(det).astype(int)
    unsure = np.nonzero(np.abs(det) <= PREDICATE_TOL * perm)[0]
    for k in unsure:
        out[k] = _incircle_exact(a[k], b[k], c[k], d[k])
    return out


def orient_many(a, b, c) -> np.ndarray:
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    t1 = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
    t2 = (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    det = t1 - t2
    out = np.sign(det).astype(int)
    unsure = np.nonzero(np.abs(det) <= PREDICATE_TOL * (np.abs(t1) + np.abs(t2)))[0]
    for k in unsure:
        out[k] = _orient_exact(a[k], b[k], c[k])
    return out


def circumcircles(vertices: np.ndarray, triangles: np.ndarray):
    """Circumcentres ``(m, 2)`` and circumradii ``(m,)`` of the triangles."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]] - a
    c = vertices[triangles[:, 2]] - a
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    b2 = (b * b).sum(1)
    c2 = (c * c).sum(1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (c[:, 1] * b2 - b[:, 1] * c2) / d
        uy = (b[:, 0] * c2 - c[:, 0] * b2) / d
    centers = a + np.column_stack([ux, uy])
    radii = np.hypot(ux, uy)
    return centers, radii


# ---------------------------------------------------------------------------
# Duplicate merging
# ---------------------------------------------------------------------------


def merge_duplicates(points, tol: float = MERGE_TOL):
    """Collapse points closer than ``tol``.

    Returns ``(unique, inverse, representative)`` where ``unique`` keeps the
    first occurrence of every cluster in input order, ``unique[inverse] ~
    points`` and ``representative[k]`` is the input index of ``unique[k]``.
    """
    p = as_points(points)
    n = len(p)
    if n == 0:
        return p, np.zeros(0, int), np.zeros(0, int)
    pairs = cKDTree(p).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        idx = np.arange(n)
        return p.copy(), idx, idx.copy()
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    # relabel clusters by first occurrence
    first = np.full(labels.max() + 1, n, dtype=int)
    np.minimum.at(first, labels, np.arange(n))
    order = np.argsort(first)
    new_label = np.empty_like(order)
    new_label[order] = np.arange(len(order))
    inverse = new_label[labels]
    rep = first[order]
    return p[rep].copy(), inverse, rep


# ---------------------------------------------------------------------------
# Delaunay triangulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Triangulation:
    """Delaunay triangulation of the distinct input sites.

    ``triangles`` are counter-clockwise index triples into ``vertices``;
    ``neighbors[t, k]`` is the triangle opposite vertex ``k`` of ``t`` (or -1).
    ``input_index[i]`` maps input point ``i`` to its (merged) vertex.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    neighbors: np.ndarray
    input_index: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def edges(self):
        """Unique edges ``(e, 2)`` with ``i < j`` and, per edge, the two
        incident triangles ``(e, 2)`` (-1 on the convex hull)."""
        t = self.triangles
        m = len(t)
        # edge k of a triangle is opposite vertex k
        ei = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
        ej = np.concatenate([t[:, 2], t[:, 0], t[:, 1]])
        tri = np.tile(np.arange(m), 3)
        lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
        key = lo.astype(np.int64) * (self.n_vertices + 1) + hi
        order = np.argsort(key, kind="stable")
        key_s = key[order]
        starts = np.concatenate([[True], key_s[1:] != key_s[:-1]])
        gid = np.cumsum(starts) - 1
        n_e = gid[-1] + 1
        edges = np.column_stack([lo[order][starts], hi[order][starts]])
        adj = np.full((n_e, 2), -1, dtype=int)
        pos = np.zeros(len(order), dtype=int)
        pos[1:] = np.where(starts[1:], 0, 1)
        adj[gid, pos] = tri[order]
        return edges, adj

    def hull_vertex_count(self) -> int:
        edges, adj = self.edges()
        on_hull = edges[(adj == -1).any(axis=1)]
        return len(np.unique(on_hull))

    def circumcircles(self):
        return circumcircles(self.vertices, self.triangles)


def _build_neighbors(triangles: np.ndarray, n_vertices: int) -> np.ndarray:
    m = len(triangles)
    ei = np.concatenate([triangles[:, 1], triangles[:, 2], triangles[:, 0]])
    ej = np.concatenate([triangles[:, 2], triangles[:, 0], triangles[:, 1]])
    slot = np.repeat(np.arange(3), m)
    tri = np.tile(np.arange(m), 3)
    lo, hi = np.minimum(ei, ej), np.maximum(ei, ej)
    key = lo.astype(np.int64) * (n_vertices + 1) + hi
    order = np.argsort(key, kind="stable")
    ks = key[order]
    nb = np.full((m, 3), -1, dtype=int)
    same = np.nonzero(ks[1:] == ks[:-1])[0]
    t1, t2 = tri[order][same], tri[order][same + 1]
    s1, s2 = slot[order][same], slot[order][same + 1]
    nb[t1, s1] = t2
    nb[t2, s2] = t1
    return nb


def _all_collinear(p: np.ndarray) -> bool:
    a = p[np.lexsort((p[:, 1], p[:, 0]))[0]]
    d2 = ((p - a) ** 2).sum(1)
    b = p[int(np.argmax(d2))]
    signs = orient_many(np.broadcast_to(a, p.shape), np.broadcast_to(b, p.shape), p)
    return bool(np.all(signs == 0))


def _legalize(vertices, triangles, rank, max_passes: int = 100):
    """Lawson flips driven by exact in-circle tests.  Cocircular quads get the
    diagonal incident to the lexicographically smallest of their four
    vertices, which makes the result independent of input order."""
    triangles = triangles.copy()
    for _ in range(max_passes):
        nb = _build_neighbors(triangles, len(vertices))
        t_idx, k_idx = np.nonzero(nb >= 0)
        keep = t_idx < nb[t_idx, k_idx]
        t_idx, k_idx = t_idx[keep], k_idx[keep]
        if len(t_idx) == 0:
            return triangles
        u_idx = nb[t_idx, k_idx]
        w = triangles[t_idx, k_idx]  # opposite vertex in t
        a = triangles[t_idx, (k_idx + 1) % 3]
        b = triangles[t_idx, (k_idx + 2) % 3]
        # vertex of u not on the shared edge
        tu = triangles[u_idx]
        d = tu.sum(1) - a - b
        det, perm = _incircle_float(vertices[w], vertices[a], vertices[b], vertices[d])
        sign = np.sign(det).astype(int)
        unsure = np.nonzero(np.abs(det) <= PREDICATE_TOL * perm)[0]
        for k in unsure:
            sign[k] = _incircle_exact(vertices[w[k]], vertices[a[k]], vertices[b[k]], vertices[d[k]])
        tie = sign == 0
        min_on_edge = np.minimum(rank[a], rank[b]) < np.minimum(rank[w], rank[d])
        want = np.nonzero((sign > 0) | (tie & ~min_on_edge))[0]
        if len(want) == 0:
            return triangles
        touched = np.zeros(len(triangles), dtype=bool)
        flipped = 0
        for k in want:
            t, u = t_idx[k], u_idx[k]
            if touched[t] or touched[u]:
                continue
            # only flip strictly convex quads
            if orient2d(vertices[w[k]], vertices[a[k]], vertices[d[k]]) <= 0:
                continue
            if orient2d(vertices[w[k]], vertices[d[k]], vertices[b[k]]) <= 0:
                continue
            triangles[t] = (w[k], a[k], d[k])
            triangles[u] = (w[k], d[k], b[k])
            touched[t] = touched[u] = True
            flipped += 1
        if flipped == 0:
            return triangles
    return triangles


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of a planar point set.

    Points closer than ``MERGE_TOL`` are merged first.  Raises
    :class:`TooFewPoints` for fewer than three points,
    :class:`DuplicatePointsBeyondTolerance` when fewer than three distinct
    sites remain and :class:`CollinearInput` when all sites are collinear.
    """
    p = as_points(points)
    if len(p) < 3:
        raise TooFewPoints("delaunay needs at least 3 points")
    uniq, inverse, _ = merge_duplicates(p)
    if len(uniq) < 3:
        raise DuplicatePointsBeyondTolerance(
            f"only {len(uniq)} distinct sites after merging at {MERGE_TOL}"
        )
    if _all_collinear(uniq):
        raise CollinearInput("all points are collinear")

    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    rank = np.empty(len(uniq), dtype=int)
    rank[order] = np.arange(len(uniq))
    sorted_pts = uniq[order]
    qh = _QhullDelaunay(sorted_pts, qhull_options="Qbb Qc Qz Q12")
    tri = order[qh.simplices]
    if len(qh.coplanar):
        # sites Qhull could not separate from an existing vertex
        cop = qh.coplanar
        inverse = inverse.copy()
        remap = np.arange(len(uniq))
        remap[order[cop[:, 0]]] = order[cop[:, 2]]
        inverse = remap[inverse]
    sgn = orient_many(uniq[tri[:, 0]], uniq[tri[:, 1]], uniq[tri[:, 2]])
    tri = tri[sgn != 0]
    flip = sgn[sgn != 0] < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    tri = _legalize(uniq, tri, rank)
    # canonical storage: rotate each triangle so its lowest rank vertex is first,
    # then sort triangles
    first = np.argmin(rank[tri], axis=1)
    tri = np.stack([tri[np.arange(len(tri)), (first + s) % 3] for s in range(3)], axis=1)
    tri = tri[np.lexsort((rank[tri[:, 2]], rank[tri[:, 1]], rank[tri[:, 0]]))]
    nb = _build_neighbors(tri, len(uniq))
    return Triangulation(uniq, tri, nb, inverse)


# ---------------------------------------------------------------------------
# Minimum spanning tree and nearest neighbours
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EdgeSet:
    i: np.ndarray
    j: np.ndarray
    length: np.ndarray

    def __len__(self) -> int:
        return len(self.length)

    @property
    def max_length(self) -> float:
        return float(self.length.max()) if len(self.length) else 0.0

    @property
    def total_length(self) -> float:
        return float(self.length.sum())

    def as_tuples(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.i, self.j, self.length)]


def euclidean_mst(points) -> EdgeSet:
    """Euclidean minimum spanning tree, computed on the Delaunay edge graph.

    Edge endpoints are indices into the input; coincident points are joined by
    zero-length edges so that the tree always has ``n - 1`` edges.
    """
    p = as_points(points)
    n = len(p)
    if n < 2:
        raise TooFewPoints("a spanning tree needs at least 2 points")
    uniq, inverse, rep = merge_duplicates(p)
    dup_i, dup_j = [], []
    for k in range(n):
        if rep[inverse[k]] != k:
            dup_i.append(rep[inverse[k]])
            dup_j.append(k)
    m = len(uniq)
    if m == 1:
        ui = uj = np.zeros(0, dtype=int)
    elif m == 2:
        ui, uj = np.array([0]), np.array([1])
    elif _all_collinear(uniq):
        direction = uniq[int(np.argmax(((uniq - uniq[0]) ** 2).sum(1)))] - uniq[0]
        order = np.argsort(uniq @ direction, kind="stable")
        ui, uj = order[:-1], order[1:]
    else:
        edges, _ = delaunay(uniq).edges()
        w = np.hypot(*(uniq[edges[:, 0]] - uniq[edges[:, 1]]).T)
        g = coo_matrix((w, (edges[:, 0], edges[:, 1])), shape=(m, m)).tocsr()
        tree = minimum_spanning_tree(g).tocoo()
        ui, uj = tree.row, tree.col
    i = np.concatenate([rep[ui], np.asarray(dup_i, dtype=int)]).astype(int)
    j = np.concatenate([rep[uj], np.asarray(dup_j, dtype=int)]).astype(int)
    lengths = np.hypot(*(p[i] - p[j]).T) if len(i) else np.zeros(0)
    order = np.lexsort((j, i))
    return EdgeSet(i[order], j[order], lengths[order])


def nn_distances(queries, refs) -> np.ndarray:
    """Exact distance from every query to its nearest reference point."""
    r = as_points(refs, "refs")
    if len(r) == 0:
        raise EmptyReferenceSet("reference set is empty")
    q = as_points(queries, "queries")
    if len(q) == 0:
        return np.zeros(0)
    d, _ = cKDTree(r).query(q, k=1)
    return np.asarray(d, dtype=float)


def bounding_box(points: np.ndarray) -> tuple[float, float, float, float]:
    p = as_points(points)
    return (float(p[:, 0].min()), float(p[:, 1].min()), float(p[:, 0].max()), float(p[:, 1].max()))


def polygon_area(poly: Sequence[Sequence[float]]) -> float:
    """Signed shoelace area of a closed polygon (counter-clockwise positive)."""
    v = np.asarray(poly, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def convex_hull_area(points) -> float:
    from scipy.spatial import ConvexHull

    return float(ConvexHull(as_points(points)).volume)
