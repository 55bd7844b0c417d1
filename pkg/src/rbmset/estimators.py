"""Set estimators built from a finite sample: the r-convex hull and the union
of closed disks ("sausage"), plus a brute-force raster oracle for the hull.

r-convex hull
-------------
``C_r(A)`` is what remains of the plane after deleting every open disk of
radius ``r`` that misses ``A``.  Writing ``F = {c : d(c, A) >= r}`` for the
admissible disk centres, ``x`` belongs to the hull iff ``d(x, F) >= r``.

The construction used here works on the Delaunay triangulation of ``A``:

* triangles with circumradius ``>= r`` (minus their vertices) lie inside an
  empty open disk, so only triangles with circumradius ``< r`` can carry area;
* the relevant deleted disks are centred at the vertices of ``F``'s boundary,
  points at distance exactly ``r`` from two sites and at least ``r`` from all,
  which are found from the Delaunay edges shorter than ``2 r``;
* each small triangle is clipped against those disks exactly, and its area
  and boundary pieces are accumulated with Green's theorem.

Everything that is not part of the two-dimensional region is a site, and such
sites are reported as isolated points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import _circles as ci
from .domains import GridMask
from .errors import CellSizeTooLarge, DegenerateAllCoincident, EmptyInput
from .geometry import Arc, _all_collinear, arc_green, as_points, delaunay, merge_duplicates

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Segment:
    start: tuple[float, float]
    end: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def start_point(self) -> np.ndarray:
        return np.asarray(self.start)

    @property
    def end_point(self) -> np.ndarray:
        return np.asarray(self.end)

    def green(self) -> float:
        return 0.5 * (self.start[0] * self.end[1] - self.start[1] * self.end[0])

    def flatten(self, chord_tol: float = 1e-4) -> np.ndarray:
        return np.array([self.start, self.end], dtype=float)


@dataclass(frozen=True)
class BoundaryLoop:
    """Closed chain of arcs and segments; the region lies to its left."""

    pieces: tuple
    area: float
    length: float
    closure_gap: float
    regular: bool

    def __len__(self) -> int:
        return len(self.pieces)


def _chain(pieces, tol: float) -> list[BoundaryLoop]:
    """Link pieces end-to-start into closed loops."""
    m = len(pieces)
    if m == 0:
        return []
    starts = np.array([p.start_point for p in pieces])
    ends = np.array([p.end_point for p in pieces])
    tree = cKDTree(starts)
    used = np.zeros(m, dtype=bool)
    loops = []
    k_nn = min(8, m)
    for first in range(m):
        if used[first]:
            continue
        used[first] = True
        chain = [first]
        cur = first
        gap = 0.0
        while True:
            dist, idx = tree.query(ends[cur], k=k_nn)
            dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
            nxt = -1
            for dd, ii in zip(dist, idx):
                if ii < m and not used[ii] and dd <= tol:
                    nxt = int(ii)
                    gap = max(gap, float(dd))
                    break
            if nxt < 0:
                gap = max(gap, float(np.hypot(*(ends[cur] - starts[first]))))
                break
            used[nxt] = True
            chain.append(nxt)
            cur = nxt
        loop_pieces = tuple(pieces[i] for i in chain)
        area = sum(p.green() for p in loop_pieces)
        length = sum(p.length for p in loop_pieces)
        loops.append(BoundaryLoop(loop_pieces, area, length, gap, True))
    return loops


# ---------------------------------------------------------------------------
# r-convex hull
# ---------------------------------------------------------------------------


class AlphaHull:
    """The r-convex hull ``C_r`` of a finite point set.

    Attributes
    ----------
    points
        Input sample.
    r
        Disk radius.
    area
        Lebesgue measure of the two-dimensional part.
    loops
        Boundary loops (arcs of radius ``r`` bulging inwards and straight
        pieces), region on the left.
    isolated_points
        Sites not attached to the two-dimensional part.
    """

    def __init__(self, points, r: float):
        p = as_points(points)
        if len(p) == 0:
            raise EmptyInput("alpha_hull needs at least one point")
        if not r > 0:
            raise ValueError("r must be positive")
        self.points = p
        self.r = float(r)
        sites, _, _ = merge_duplicates(p)
        if len(p) > 1 and len(sites) == 1:
            raise DegenerateAllCoincident("all input points coincide")
        self.sites = sites
        self._site_tree = cKDTree(sites)
        self._scale = max(float(np.ptp(sites, axis=0).max()) if len(sites) > 1 else 1.0, 1e-300)
        self.area = 0.0
        self.loops: list[BoundaryLoop] = []
        self.fvertices = np.zeros((0, 2))
        if len(sites) <= 2 or _all_collinear(sites):
            # no triangle survives; only the sites themselves remain
            self.isolated_points = sites.copy()
            self._finish_membership()
            return
        self._build()

    # -- construction -------------------------------------------------------
    def _build(self):
        r = self.r
        sites = self.sites
        tri = delaunay(sites)
        self.triangulation = tri
        centers, radii = tri.circumcircles()
        edges, adj = tri.edges()
        a, b = sites[edges[:, 0]], sites[edges[:, 1]]
        length = np.hypot(*(b - a).T)
        short = length < 2 * r
        m = 0.5 * (a[short] + b[short])
        e = (b[short] - a[short]) / length[short, None]
        nrm = np.column_stack([-e[:, 1], e[:, 0]])
        s = np.sqrt(np.maximum(r * r - 0.25 * length[short] ** 2, 0.0))
        cand = np.vstack([m + s[:, None] * nrm, m - s[:, None] * nrm])
        if len(cand):
            dnear, _ = self._site_tree.query(cand)
            cand = cand[dnear >= r * (1 - 1e-10)]
        if len(cand):
            cand, _, _ = merge_duplicates(cand, tol=1e-9 * r)
        self.fvertices = cand
        fv_tree = cKDTree(cand) if len(cand) else None

        k2 = radii < r
        t_idx = np.nonzero(k2)[0]
        tris = tri.triangles
        nb = tri.neighbors
        bnd_edge = np.zeros((len(tris), 3), dtype=bool)
        bnd_edge[t_idx] = (nb[t_idx] < 0) | ~k2[np.maximum(nb[t_idx], 0)]
        P0, P1, P2 = sites[tris[t_idx, 0]], sites[tris[t_idx, 1]], sites[tris[t_idx, 2]]
        tri_area = 0.5 * ((P1[:, 0] - P0[:, 0]) * (P2[:, 1] - P0[:, 1]) - (P1[:, 1] - P0[:, 1]) * (P2[:, 0] - P0[:, 0]))
        # a triangle is untouched when no deleted disk reaches its circumdisk
        simple = np.ones(len(t_idx), dtype=bool)
        if fv_tree is not None and len(t_idx):
            dfv, _ = fv_tree.query(centers[t_idx], distance_upper_bound=2 * r * (1 + 1e-9))
            simple = dfv > r + radii[t_idx]
        area = float(tri_area[simple].sum())

        segments: list[Segment] = []
        arc_pieces: dict[int, list[tuple[float, float]]] = {}
        ts = t_idx[simple]
        for j in range(3):
            hit = ts[bnd_edge[ts, (j + 2) % 3]]
            for pa, pb in zip(sites[tris[hit, j]], sites[tris[hit, (j + 1) % 3]]):
                segments.append(Segment((pa[0], pa[1]), (pb[0], pb[1])))
        hard = np.nonzero(~simple)[0]
        near = fv_tree.query_ball_point(centers[t_idx[hard]], r + radii[t_idx[hard]]) if len(hard) else []
        for k, nl in zip(hard, near):
            t = t_idx[k]
            area += self._clip_triangle(t, tris[t], nl, bnd_edge[t], segments, arc_pieces)
        self.area = max(area, 0.0)
        self._k2 = k2

        arcs = []
        for kdisk, pieces in sorted(arc_pieces.items()):
            merged = _union_with_tol(pieces, 1e-12)
            for lo, span in ci.to_arcs(merged):
                c = cand[kdisk]
                arcs.append(Arc((float(c[0]), float(c[1])), r, lo + span, lo, "cw"))
        self.loops = _chain(arcs + segments, tol=max(1e-7 * r, 1e-12 * self._scale))
        tiny = 1e-12 * max(r, self._scale) ** 2
        self.loops = [
            BoundaryLoop(l.pieces, l.area, l.length, l.closure_gap, abs(l.area) > tiny) for l in self.loops
        ]
        self.isolated_points = self._find_isolated(tri, k2, arcs)
        self._finish_membership()

    def _clip_triangle(self, t, vid, disk_ids, bnd, segments, arc_pieces) -> float:
        """Area of triangle ``t`` minus the open disks, recording boundary pieces."""
        r = self.r
        V = self.sites[vid]
        ox, oy = V[0]
        disks = self.fvertices[disk_ids]
        area = 0.0
        for j in range(3):
            px, py = V[j]
            qx, qy = V[(j + 1) % 3]
            covers = []
            for cx, cy in disks:
                iv = ci.segment_disk_cover(px, py, qx, qy, cx, cy, r)
                if iv is not None:
                    covers.append(iv)
            for s0, s1 in ci.line_complement(covers):
                ax, ay = px + s0 * (qx - px), py + s0 * (qy - py)
                bx, by = px + s1 * (qx - px), py + s1 * (qy - py)
                area += 0.5 * ((ax - ox) * (by - oy) - (ay - oy) * (bx - ox))
                if bnd[(j + 2) % 3]:
                    segments.append(Segment((ax, ay), (bx, by)))
        for k, (cx, cy) in enumerate(disks):
            inside = list(ci.FULL)
            for j in range(3):
                px, py = V[j]
                qx, qy = V[(j + 1) % 3]
                inside = ci.intersect(inside, ci.halfplane_on_circle(cx, cy, r, px, py, qx - px, qy - py))
                if not inside:
                    break
            if not inside:
                continue
            removed = []
            for kk, (dx, dy) in enumerate(disks):
                if kk != k:
                    removed.extend(ci.disk_cover_on_circle(cx, cy, dx, dy, r))
            keep = ci.subtract(inside, removed)
            for lo, hi in keep:
                # clockwise from hi back to lo, relative to the local origin
                span = hi - lo
                area += float(arc_green(cx - ox, cy - oy, r, hi, hi + span, ccw=False))
            if keep:
                arc_pieces.setdefault(int(disk_ids[k]), []).extend(keep)
        return area

    def _find_isolated(self, tri, k2, arcs) -> np.ndarray:
        """Sites with no two-dimensional neighbourhood in the hull."""
        r = self.r
        sites = self.sites
        n = len(sites)
        attached = np.zeros(n, dtype=bool)
        tris = tri.triangles[k2]
        if len(tris) == 0:
            return sites.copy()
        if len(self.fvertices):
            fv_tree = cKDTree(self.fvertices)
            through = fv_tree.query_ball_point(sites, r * (1 + 1e-9))
        else:
            through = [[] for _ in range(n)]
        has_tri = np.zeros(n, dtype=bool)
        has_tri[tris.ravel()] = True
        for v in range(n):
            if has_tri[v] and not through[v]:
                attached[v] = True
        # arc endpoints (cusps included) attach their site
        if arcs:
            ends = np.array([a.start_point for a in arcs] + [a.end_point for a in arcs])
            d, idx = self._site_tree.query(ends)
            attached[idx[d <= 1e-9 * max(r, 1.0)]] = True
        todo = np.nonzero(has_tri & ~attached)[0]
        if len(todo):
            corner_of = {}
            for t, (i0, i1, i2) in enumerate(tris):
                for a_, b_, c_ in ((i0, i1, i2), (i1, i2, i0), (i2, i0, i1)):
                    corner_of.setdefault(a_, []).append((b_, c_))
            for v in todo:
                a = sites[v]
                disks = [
                    self.fvertices[k] for k in through[v]
                    if np.hypot(*(self.fvertices[k] - a)) >= r * (1 - 1e-9)
                ]
                blocked = []
                for c in disks:
                    mid = math.atan2(c[1] - a[1], c[0] - a[0])
                    blocked.extend(ci.normalize(mid - 0.5 * math.pi, mid + 0.5 * math.pi))
                for b_, c_ in corner_of.get(v, []):
                    th0 = math.atan2(*(sites[b_] - a)[::-1])
                    th1 = math.atan2(*(sites[c_] - a)[::-1])
                    span = (th1 - th0) % TWO_PI
                    free = ci.subtract(ci.normalize(th0, th0 + span), blocked)
                    if sum(hi - lo for lo, hi in free) > 1e-12:
                        attached[v] = True
                        break
        return sites[~attached].copy()

    def _finish_membership(self):
        r = self.r
        sites = self.sites
        # sites that own arcs of the boundary of the admissible centre set
        owners = np.zeros(len(sites), dtype=bool)
        if len(self.fvertices):
            lists = cKDTree(self.fvertices).query_ball_point(sites, r * (1 + 1e-9))
            owners |= np.array([len(l) > 0 for l in lists], dtype=bool)
        if len(sites) > 1:
            d2, _ = self._site_tree.query(sites, k=2)
            owners |= d2[:, 1] >= 2 * r
        else:
            owners[:] = True
        self._owners = sites[owners]
        self._fv_tree = cKDTree(self.fvertices) if len(self.fvertices) else None
        nbrs = self._voronoi_neighbours()
        self._owner_free = [self._free_angles(sites[k], nbrs(k)) for k in np.nonzero(owners)[0]]

    def _voronoi_neighbours(self):
        """``k -> sites`` that can cover part of the r-circle around site ``k``.

        A point at distance ``r`` from site ``k`` is within ``r`` of another
        site iff it lies outside the Voronoi cell of ``k``, and that cell is
        cut out by the Delaunay neighbours of ``k`` alone.
        """
        tri = getattr(self, "triangulation", None)
        if tri is None:
            reach = self.r * (2 - 1e-10)
            return lambda k: self.sites[self._site_tree.query_ball_point(self.sites[k], reach)]
        back = np.empty(len(tri.vertices), dtype=int)
        back[tri.input_index] = np.arange(len(self.sites))
        e = back[tri.edges()[0]]
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.argsort(src, kind="stable")
        dst = dst[order]
        ptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=len(self.sites)))])
        return lambda k: self.sites[dst[ptr[k] : ptr[k + 1]]]

    def _free_angles(self, a, nb) -> tuple[np.ndarray, np.ndarray]:
        """Closed angular set of the circle ``|c - a| = r`` whose points are
        admissible centres, as arrays of interval ends."""
        r = self.r
        rho = r * (1 - 1e-10)
        v = nb - a
        d = np.hypot(v[:, 0], v[:, 1])
        v, d = v[d > 0], d[d > 0]
        kappa = (r * r + d * d - rho * rho) / (2 * r * d)
        if np.any(kappa <= -1.0):
            return np.zeros(0), np.zeros(0)
        keep = kappa < 1.0
        half = np.arccos(kappa[keep])
        lo = (np.arctan2(v[keep, 1], v[keep, 0]) - half) % TWO_PI
        hi = lo + 2 * half
        wrap = hi > TWO_PI
        lo = np.concatenate([lo, np.zeros(wrap.sum())])
        hi = np.concatenate([np.minimum(hi, TWO_PI), hi[wrap] - TWO_PI])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
        reach = np.maximum.accumulate(hi) if len(hi) else hi
        # gaps between the running coverage and the next interval start
        f_lo = np.concatenate([[0.0], reach])
        f_hi = np.concatenate([lo, [TWO_PI]])
        gap = f_hi > f_lo
        return f_lo[gap], f_hi[gap]

    # -- queries ------------------------------------------------------------
    def contains(self, points, block: int = 65536) -> np.ndarray:
        """Exact pointwise membership: ``x`` is in the hull iff no point of the
        admissible centre set lies within distance ``r`` of it."""
        q = as_points(points)
        out = np.zeros(len(q), dtype=bool)
        for s in range(0, len(q), block):
            out[s : s + block] = self._contains_block(q[s : s + block])
        return out

    def _contains_block(self, q):
        r = self.r
        d_site, _ = self._site_tree.query(q)
        res = d_site <= 1e-12 * self._scale
        cand = np.nonzero(~res & (d_site < r))[0]
        if len(cand) == 0:
            return res
        ok = np.ones(len(cand), dtype=bool)
        if self._fv_tree is not None:
            dv, _ = self._fv_tree.query(q[cand])
            ok &= dv >= r * (1 - 1e-12)
        if len(self._owners):
            idx = np.nonzero(ok)[0]
            qq = q[cand[idx]]
            tree = cKDTree(qq)
            for a, (lo, hi) in zip(self._owners, self._owner_free):
                if len(lo) == 0:
                    continue
                hits = np.asarray(tree.query_ball_point(a, 2 * r), dtype=int)
                if len(hits) == 0:
                    continue
                v = qq[hits] - a
                good = (v[:, 0] != 0.0) | (v[:, 1] != 0.0)
                hits, v = hits[good], v[good]
                # an admissible centre at the radial projection of x onto the
                # owner's circle captures x
                th = np.arctan2(v[:, 1], v[:, 0]) % TWO_PI
                k = np.searchsorted(lo, th, side="right") - 1
                inside = (k >= 0) & (th <= hi[np.maximum(k, 0)])
                ok[idx[hits[inside]]] = False
        res[cand] = ok
        return res

    @property
    def boundary(self) -> list[BoundaryLoop]:
        return self.loops

    @property
    def arcs(self) -> list[Arc]:
        return [p for l in self.loops for p in l.pieces if isinstance(p, Arc)]

    def perimeter(self, drop_isolated: bool = True) -> float:
        return perimeter(self, drop_isolated)

    def to_mask(self, like: GridMask) -> GridMask:
        """Raster of the hull on the grid of ``like`` (cell centre rule) with
        the cells holding input points switched on."""
        mask = like.evaluate(self.contains)
        return _force_points(mask, self.points)

    def __repr__(self) -> str:
        return (
            f"AlphaHull(n={len(self.points)}, r={self.r:g}, area={self.area:.6g}, "
            f"loops={len(self.loops)}, isolated={len(self.isolated_points)})"
        )


def _union_with_tol(pieces, tol):
    out: list[list[float]] = []
    for lo, hi in sorted(pieces):
        if out and lo <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def _force_points(mask: GridMask, points) -> GridMask:
    i, j = mask.cell_index(points)
    ok = (i >= 0) & (i < mask.width) & (j >= 0) & (j < mask.height)
    bits = mask.bits.copy()
    bits[j[ok], i[ok]] = True
    return mask.with_bits(bits)


def alpha_hull(points, r: float) -> AlphaHull:
    """r-convex hull of a finite planar point set (see :class:`AlphaHull`)."""
    return AlphaHull(points, r)


def perimeter(geom, drop_isolated: bool = True) -> float:
    """Boundary length of a hull or sausage.

    With ``drop_isolated`` only loops enclosing positive area are summed;
    otherwise degenerate loops are included too.  Isolated points have no
    length in either case.
    """
    loops = geom.loops
    return float(sum(l.length for l in loops if l.regular or not drop_isolated))


def alpha_hull_oracle(points, r: float, cell_size: float, grid: GridMask | None = None) -> GridMask:
    """Brute-force raster of ``C_r(points)``.

    Candidate disk centres are the nodes of a sub-grid with spacing
    ``cell_size / 2``; a node is admissible when its distance to the sample is
    at least ``r``.  A cell is dropped iff its centre lies within distance
    ``< r`` of an admissible node, and cells holding sample points are kept.
    Because only a subset of the admissible centres is tried, the mask can only
    err on the side of inclusion.  The error is about one cell along the
    boundary, except where the free region ``{y : d(y, points) >= r}`` has a
    component thinner than the sub-grid: no node lands in it and a whole empty
    disk of area up to ``pi r^2`` is missed.
    """
    p = as_points(points)
    if len(p) == 0:
        raise EmptyInput("oracle needs at least one point")
    if cell_size > r / 10:
        raise CellSizeTooLarge("oracle needs cell_size <= r / 10")
    if grid is None:
        lo, hi = p.min(0), p.max(0)
        grid = GridMask.blank((lo[0], lo[1], hi[0], hi[1]), cell_size, pad=cell_size)
    h = grid.cell_size
    if h > r / 10:
        raise CellSizeTooLarge("oracle needs cell_size <= r / 10")
    sub = 0.5 * h
    m = int(math.ceil((r + h) / sub))
    nx = 2 * grid.width - 1 + 2 * m
    ny = 2 * grid.height - 1 + 2 * m
    x0 = grid.origin[0] + 0.5 * h - m * sub
    y0 = grid.origin[1] + 0.5 * h - m * sub
    xs = x0 + sub * np.arange(nx)
    ys = y0 + sub * np.arange(ny)
    tree = cKDTree(p)
    admissible = np.empty((ny, nx), dtype=bool)
    rows = max(1, (1 << 18) // nx)
    for j0 in range(0, ny, rows):
        gy, gx = np.meshgrid(ys[j0 : j0 + rows], xs, indexing="ij")
        d, _ = tree.query(np.column_stack([gx.ravel(), gy.ravel()]), distance_upper_bound=r)
        admissible[j0 : j0 + rows] = (d >= r).reshape(gy.shape)
    if admissible.all():
        far = np.full((ny, nx), 0.0)
    else:
        far = ndimage.distance_transform_edt(~admissible, sampling=sub)
    centre = far[m : m + 2 * grid.height : 2, m : m + 2 * grid.width : 2]
    mask = grid.with_bits(centre >= r)
    return _force_points(mask, p)


# ---------------------------------------------------------------------------
# Union of disks
# ---------------------------------------------------------------------------


class UnionOfBalls:
    """Union of closed disks of common radius ``eps``.

    The boundary consists of the exposed arcs of the circles, each traversed
    counter-clockwise around its own centre; the area follows from Green's
    theorem over these arcs.
    """

    def __init__(self, points, eps: float):
        p = as_points(points)
        if len(p) == 0:
            raise EmptyInput("sausage needs at least one point")
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.points = p
        self.eps = float(eps)
        self.centers, _, _ = merge_duplicates(p)
        self._tree = cKDTree(self.centers)
        self._arcs()
        self._loops = None

    def _neighbour_pairs(self) -> np.ndarray:
        """Delaunay edges of the centres.

        With a common radius, the part of circle ``i`` covered by disk ``j``
        is the part beyond their bisector, so the covered part of every
        circle is decided by its Voronoi neighbours alone.  The minimum
        spanning tree is a Delaunay subgraph, so connectivity is too.
        """
        c = self.centers
        n = len(c)
        if n < 2:
            return np.zeros((0, 2), dtype=int)
        if n == 2 or _all_collinear(c):
            order = np.lexsort((c[:, 1], c[:, 0]))
            return np.sort(np.column_stack([order[:-1], order[1:]]), axis=1)
        tri = delaunay(c)
        back = np.empty(len(tri.vertices), dtype=int)
        back[tri.input_index] = np.arange(n)
        return back[tri.edges()[0]]

    def _arcs(self):
        c = self.centers
        eps = self.eps
        n = len(c)
        pairs = self._neighbour_pairs()
        if len(pairs):
            d = np.hypot(*(c[pairs[:, 0]] - c[pairs[:, 1]]).T)
            touch = d <= 2 * eps
            pairs, d, touch = pairs[touch], d[touch], touch[touch]
            g = coo_matrix((np.ones(touch.sum()), (pairs[touch, 0], pairs[touch, 1])), shape=(n, n))
            self.n_components = int(connected_components(g, directed=False)[0])
            over = d < 2 * eps * (1 - 1e-14)
            pi_, pj, d = pairs[over, 0], pairs[over, 1], d[over]
        else:
            self.n_components = n
            pi_ = pj = np.zeros(0, dtype=int)
            d = np.zeros(0)
        own = np.concatenate([pi_, pj])
        other = np.concatenate([pj, pi_])
        dd = np.concatenate([d, d])
        vec = c[other] - c[own]
        mid = np.arctan2(vec[:, 1], vec[:, 0])
        half = np.arccos(np.clip(dd / (2 * eps), -1.0, 1.0))
        lo = np.mod(mid - half, TWO_PI)
        hi = lo + 2 * half
        wrap = hi > TWO_PI
        own = np.concatenate([own, own[wrap]])
        lo2 = np.concatenate([lo, np.zeros(wrap.sum())])
        hi2 = np.concatenate([np.minimum(hi, TWO_PI), hi[wrap] - TWO_PI])
        # segmented running maximum: offsetting by circle index keeps groups apart
        off = 8.0 * own
        order = np.lexsort((lo2, own))
        own_s, lo_s, hi_s = own[order], lo2[order], hi2[order]
        run = np.maximum.accumulate(off[order] + hi_s) - 8.0 * own_s
        first = np.ones(len(own_s), dtype=bool)
        first[1:] = own_s[1:] != own_s[:-1]
        last = np.ones(len(own_s), dtype=bool)
        last[:-1] = own_s[1:] != own_s[:-1]
        arc_c, arc_lo, arc_hi = [], [], []
        # interior gaps
        gap = ~first
        gap[1:] &= lo_s[1:] > run[:-1]
        gi = np.nonzero(gap)[0]
        arc_c.append(own_s[gi])
        arc_lo.append(run[gi - 1])
        arc_hi.append(lo_s[gi])
        # gap across angle zero
        fi = np.nonzero(first)[0]
        li = np.nonzero(last)[0]
        lead = lo_s[fi]
        trail = run[li]
        wraps = (lead > 0) | (trail < TWO_PI)
        arc_c.append(own_s[fi][wraps])
        arc_lo.append(trail[wraps])
        arc_hi.append(lead[wraps] + TWO_PI)
        # free circles: two half arcs
        covered = np.zeros(n, dtype=bool)
        covered[own] = True
        free = np.nonzero(~covered)[0]
        arc_c += [free, free]
        arc_lo += [np.zeros(len(free)), np.full(len(free), math.pi)]
        arc_hi += [np.full(len(free), math.pi), np.full(len(free), TWO_PI)]
        self.arc_center = np.concatenate(arc_c).astype(int)
        start = np.concatenate(arc_lo)
        span = np.concatenate(arc_hi) - start
        keep = span > 0
        self.arc_center, self.arc_start, self.arc_span = self.arc_center[keep], start[keep], span[keep]
        cx, cy = c[self.arc_center, 0], c[self.arc_center, 1]
        self.area = float(np.sum(arc_green(cx, cy, eps, self.arc_start, self.arc_start + self.arc_span)))

    @property
    def arcs(self) -> list[Arc]:
        c = self.centers
        return [
            Arc.from_span(c[k], self.eps, s, sp, "ccw")
            for k, s, sp in zip(self.arc_center, self.arc_start, self.arc_span)
        ]

    @property
    def loops(self) -> list[BoundaryLoop]:
        if self._loops is None:
            self._loops = _chain(self.arcs, tol=1e-7 * self.eps)
        return self._loops

    @property
    def boundary(self) -> list[BoundaryLoop]:
        return self.loops

    @property
    def n_loops(self) -> int:
        return len(self.loops)

    @property
    def perimeter(self) -> float:
        return float(self.eps * self.arc_span.sum())

    def contains(self, points) -> np.ndarray:
        d, _ = self._tree.query(as_points(points))
        return d <= self.eps * (1 + 1e-12)

    def to_mask(self, like: GridMask) -> GridMask:
        return _force_points(like.evaluate(self.contains), self.points)

    def __repr__(self) -> str:
        return f"UnionOfBalls(n={len(self.centers)}, eps={self.eps:g}, area={self.area:.6g})"


def sausage(points, eps: float) -> UnionOfBalls:
    """Union of closed disks of radius ``eps`` around the points."""
    return UnionOfBalls(points, eps)


def is_connected(u: UnionOfBalls) -> bool:
    """True iff the disks form one connected set (tangent disks connect)."""
    return u.n_components == 1
