"""Distances between estimators and the target set, and log-log rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .domains import Domain, GridMask, rasterize
from .errors import DegenerateDesign, EmptyInput, EpsTooSmallForGrid, GridMismatch
from .geometry import as_points

# ---------------------------------------------------------------------------
# Hausdorff distances
# ---------------------------------------------------------------------------


def hausdorff_points(a, b) -> float:
    """Exact Hausdorff distance between two finite point sets."""
    a = as_points(a, "a")
    b = as_points(b, "b")
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("hausdorff_points needs two nonempty sets")
    dab, _ = cKDTree(b).query(a)
    dba, _ = cKDTree(a).query(b)
    return float(max(dab.max(), dba.max()))


def _boundary_samples(geom, spacing: float) -> np.ndarray:
    """Points along the boundary loops of a hull or sausage."""
    pts = []
    for loop in geom.loops:
        for piece in loop.pieces:
            n = max(2, int(math.ceil(piece.length / spacing)) + 1)
            if hasattr(piece, "sample"):
                pts.append(piece.sample(n))
            else:
                t = np.linspace(0.0, 1.0, n)[:, None]
                pts.append(piece.start_point + t * (piece.end_point - piece.start_point))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def _representation(est, spacing: float):
    """``(contains, samples)`` for an estimator: a membership function (or
    ``None`` for finite sets) and points covering its boundary."""
    if isinstance(est, GridMask):
        return None, est.cell_centers(only_set=True)
    if hasattr(est, "loops") and hasattr(est, "contains"):
        extra = getattr(est, "isolated_points", None)
        if extra is None:
            extra = est.points
        samples = np.vstack([_boundary_samples(est, spacing), as_points(extra)])
        return est.contains, samples
    return None, as_points(est)


def domain_samples(domain: Domain, cell_size: float, boundary_samples: int) -> np.ndarray:
    """Dense sample of ``S``: raster cell centres plus boundary points."""
    inner = rasterize(domain, cell_size).cell_centers(only_set=True)
    return np.vstack([inner, domain.boundary_points(boundary_samples)])


def hausdorff_set_vs_domain(est, domain: Domain, boundary_samples: int = 4000, cell_size: float = 0.005) -> float:
    """Hausdorff distance between an estimator and the domain.

    ``est`` may be a point array (e.g. a trajectory), a :class:`GridMask`
    (its set cell centres are used), or a hull/sausage object.  The domain is
    represented by its raster cell centres at ``cell_size`` plus
    ``boundary_samples`` boundary points, so the result carries a
    discretisation error of at most ``max(cell_size, boundary spacing)``.
    """
    if boundary_samples < 1000:
        raise ValueError("boundary_samples must be at least 1000")
    spacing = min(cell_size, domain.perimeter / boundary_samples)
    contains, e_pts = _representation(est, spacing)
    if len(e_pts) == 0:
        raise EmptyInput("estimator is empty")
    s_pts = domain_samples(domain, cell_size, boundary_samples)
    # estimator -> S: exact through the signed distance
    e_to_s = float(np.maximum(domain.signed_distance(e_pts), 0.0).max())
    # S -> estimator
    if hasattr(est, "eps") and hasattr(est, "centers"):
        d, _ = cKDTree(est.centers).query(s_pts)
        s_to_e = float(np.maximum(d - est.eps, 0.0).max())
    else:
        d, _ = cKDTree(e_pts).query(s_pts)
        if contains is not None:
            inside = contains(s_pts)
            d = np.where(inside, 0.0, d)
        s_to_e = float(d.max())
    return max(e_to_s, s_to_e)


# ---------------------------------------------------------------------------
# Measure based functionals
# ---------------------------------------------------------------------------


def dmu_masks(a: GridMask, b: GridMask) -> float:
    """Measure of the symmetric difference of two masks on the same grid."""
    if not a.same_geometry(b):
        raise GridMismatch("masks must share origin, cell size and shape")
    return float(np.count_nonzero(a.bits ^ b.bits)) * a.cell_size**2


def parallel_set_mask(domain: Domain, eps: float, like: GridMask) -> GridMask:
    """Raster of ``B(S, eps)`` on the grid of ``like``."""
    return like.evaluate(lambda p: domain.signed_distance(p) <= eps)


def minkowski_content(mask: GridMask, eps: float) -> float:
    """``mu(B(mask, eps) minus mask) / eps`` using exact Euclidean distances
    between cell centres."""
    h = mask.cell_size
    if eps < 2 * h:
        raise EpsTooSmallForGrid("eps must be at least twice the cell size")
    pad = int(math.ceil(eps / h)) + 1
    bits = np.pad(mask.bits, pad)
    if not bits.any():
        return 0.0
    d = ndimage.distance_transform_edt(~bits, sampling=h)
    ring = np.count_nonzero((d > 0) & (d <= eps * (1 + 1e-12)))
    return ring * h * h / eps


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    model: str = "raw_T"

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
            "model": self.model,
        }


def rate_abscissa(T, model: str) -> np.ndarray:
    """``log T`` (``raw_T``) or ``log(T / log(T)^2)`` (``log2_corrected``)."""
    T = np.asarray(T, dtype=float)
    if model == "raw_T":
        return np.log(T)
    if model == "log2_corrected":
        if np.any(T <= 1.0):
            raise DegenerateDesign("log2_corrected needs every T > 1")
        return np.log(T) - 2.0 * np.log(np.log(T))
    raise ValueError(f"unknown rate model {model!r}")


def fit_rate(samples, model: str = "raw_T") -> RateFit:
    """Least-squares slope of ``log(value)`` against the model abscissa.

    ``samples`` is a sequence of ``(T, value)`` pairs; repeated ``T`` values
    are allowed but at least three distinct ones are needed.
    """
    arr = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    if len(arr) < 3:
        raise DegenerateDesign("fit_rate needs at least 3 samples")
    T, v = arr[:, 0], arr[:, 1]
    if len(np.unique(T)) < 3:
        raise DegenerateDesign("fit_rate needs at least 3 distinct T values")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise DegenerateDesign("fit_rate needs positive finite values")
    x = rate_abscissa(T, model)
    y = np.log(v)
    if np.ptp(x) == 0:
        raise DegenerateDesign("abscissa does not vary")
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - intercept - slope * x) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-300 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return RateFit(slope, intercept, r2, len(arr), model)
