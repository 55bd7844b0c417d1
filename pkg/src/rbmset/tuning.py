"""Data-driven choice of the sausage radius ``eps`` and the hull radius ``r``.

* ``eps_connectivity``: smallest radius for which the union of disks is
  connected, i.e. half the longest edge of the Euclidean minimum spanning tree.
* ``eps_split``: split the sample at random into two halves and take the
  largest (or a high quantile of the) nearest-neighbour distances from one
  half to the other.
* ``select_r``: the hull radius whose hull best matches the sausage in
  Hausdorff distance, searched over a finite grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .domains import GridMask
from .errors import EmptyGrid, TooFewPoints
from .estimators import alpha_hull, sausage
from .geometry import as_points, euclidean_mst, nn_distances
from .metrics import hausdorff_points

DEFAULT_DELTA = 0.05
DEFAULT_R_GRID_SIZE = 32


@dataclass(frozen=True)
class TuningReport:
    eps_conn: float | None
    eps_split: float
    eps_split_quantile: float
    delta: float
    r_hat: float
    r_search_grid: list = field(default_factory=list)
    matching_distances: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "eps_conn": self.eps_conn,
            "eps_split": self.eps_split,
            "eps_split_quantile": self.eps_split_quantile,
            "delta": self.delta,
            "r_hat": self.r_hat,
            "r_search_grid": list(self.r_search_grid),
            "matching_distances": [list(p) for p in self.matching_distances],
        }


def eps_connectivity(points) -> float:
    """Half the longest minimum spanning tree edge: the exact infimum of the
    radii for which the union of closed disks is connected."""
    p = as_points(points)
    if len(p) < 2:
        raise TooFewPoints("eps_connectivity needs at least 2 points")
    return 0.5 * euclidean_mst(p).max_length


def split_halves(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random split into a reference half (gets the odd point) and a
    query half."""
    perm = np.random.default_rng(seed).permutation(n)
    n_ref = (n + 1) // 2
    return np.sort(perm[:n_ref]), np.sort(perm[n_ref:])


def nearest_rank_quantile(values, level: float) -> float:
    """Empirical ``level`` quantile by the nearest-rank rule."""
    v = np.sort(np.asarray(values, dtype=float))
    k = max(1, int(math.ceil(level * len(v) - 1e-12)))
    return float(v[k - 1])


def eps_split(points, delta: float = DEFAULT_DELTA, seed: int = 0) -> tuple[float, float]:
    """``(max_i d_i, (1 - delta) quantile of d)`` where ``d_i`` is the distance
    from the ``i``-th query-half point to the reference half."""
    p = as_points(points)
    if len(p) < 4:
        raise TooFewPoints("eps_split needs at least 4 points")
    if not 0.0 <= delta < 1.0:
        raise ValueError("delta must lie in [0, 1)")
    ref, qry = split_halves(len(p), seed)
    d = nn_distances(p[qry], p[ref])
    return float(d.max()), nearest_rank_quantile(d, 1.0 - delta)


def default_r_grid(points, eps: float, size: int = DEFAULT_R_GRID_SIZE) -> np.ndarray:
    """``size`` log-spaced radii from ``eps`` to the sample diameter."""
    p = as_points(points)
    try:
        hv = p[ConvexHull(p).vertices]
    except QhullError:
        hv = p
    diam = float(np.max(np.hypot(*(hv[:, None, :] - hv[None, :, :]).transpose(2, 0, 1))))
    lo = max(eps, 1e-12)
    hi = max(diam, lo * 1.0001)
    return np.geomspace(lo, hi, size)


def _shared_grid(points, eps: float, hull_sample: int) -> GridMask:
    p = as_points(points)
    lo, hi = p.min(0) - eps, p.max(0) + eps
    side = float(max(hi - lo))
    return GridMask.blank((lo[0], lo[1], hi[0], hi[1]), side / hull_sample)


def select_r(points, eps: float, r_grid=None, delta_slack: float = 0.0, hull_sample: int = 200) -> dict:
    """Grid search for the hull radius closest to the sausage.

    Both the hull and the sausage are rasterised on a common grid with
    ``hull_sample`` cells along the longer side (sample cells always on); the
    Hausdorff distance between the two sets of cell centres is computed for
    every ``r``.  The smallest ``r`` within ``delta_slack`` of the best
    distance is returned.
    """
    p = as_points(points)
    grid = np.asarray(default_r_grid(p, eps) if r_grid is None else r_grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("r_grid is empty")
    if np.any(np.diff(grid) < 0):
        raise ValueError("r_grid must be sorted ascending")
    if np.any(grid <= 0):
        raise ValueError("r_grid values must be positive")
    like = _shared_grid(p, eps, hull_sample)
    ref = sausage(p, eps).to_mask(like).cell_centers(only_set=True)
    dists = []
    for r in grid:
        hull_cells = alpha_hull(p, float(r)).to_mask(like).cell_centers(only_set=True)
        dists.append(hausdorff_points(hull_cells, ref))
    dists = np.asarray(dists)
    best = float(dists.min())
    # relative tolerance absorbs rounding noise between equal distances
    k = int(np.nonzero(dists <= best + delta_slack + 1e-12 * best)[0][0])
    return {
        "r_hat": float(grid[k]),
        "r_search_grid": grid.tolist(),
        "matching_distances": [(float(r), float(d)) for r, d in zip(grid, dists)],
    }


def tune(
    points,
    delta: float = DEFAULT_DELTA,
    seed: int = 0,
    r_grid=None,
    delta_slack: float = 0.0,
    hull_sample: int = 200,
) -> TuningReport:
    """Run all tuning rules; ``select_r`` is matched against the sausage with
    radius ``eps_split`` (the maximum rule)."""
    p = as_points(points)
    e_conn = eps_connectivity(p) if len(p) >= 2 else None
    e_max, e_q = eps_split(p, delta, seed)
    sel = select_r(p, e_max, r_grid, delta_slack, hull_sample)
    return TuningReport(e_conn, e_max, e_q, delta, sel["r_hat"], sel["r_search_grid"], sel["matching_distances"])
