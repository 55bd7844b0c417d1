from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from rbmset.domains import CrookedEggMinusDisk, Disk, GridMask, Rectangle, rasterize
from rbmset.errors import DegenerateDesign, EmptyInput, EpsTooSmallForGrid, GridMismatch
from rbmset.estimators import sausage
from rbmset.experiments import interior_point
from rbmset.metrics import dmu_masks, fit_rate, hausdorff_points, hausdorff_set_vs_domain, minkowski_content
from rbmset.simulate import simulate

point_sets = st.integers(0, 10_000).map(lambda s: np.random.default_rng(s).random((int(s % 17) + 1, 2)))


def _brute_hausdorff(a, b):
    d = cdist(a, b)
    return max(d.min(1).max(), d.min(0).max())


# -- Hausdorff -------------------------------------------------------------------


def test_hausdorff_examples():
    a = np.random.default_rng(0).random((20, 2))
    assert hausdorff_points(a, a) == 0.0
    assert hausdorff_points([[0, 0]], [[3, 0]]) == 3.0
    assert hausdorff_points([[0, 0], [1, 0]], [[0, 0]]) == 1.0
    with pytest.raises(EmptyInput):
        hausdorff_points(np.zeros((0, 2)), a)


@settings(max_examples=50, deadline=None)
@given(point_sets, point_sets, point_sets)
def test_hausdorff_is_a_metric(a, b, c):
    ab = hausdorff_points(a, b)
    assert ab == pytest.approx(_brute_hausdorff(a, b), abs=1e-12)
    assert ab == hausdorff_points(b, a) and ab >= 0
    assert ab <= hausdorff_points(a, c) + hausdorff_points(c, b) + 1e-12


def test_domain_against_its_own_raster():
    disk = Disk()
    mask = rasterize(disk, 0.01)
    assert hausdorff_set_vs_domain(mask, disk, cell_size=0.01) <= 0.01 * math.sqrt(2)


@pytest.mark.parametrize("rho", [0.1, 0.2])
def test_domain_minus_inner_ball(rho):
    disk = Disk()
    cell = 0.005
    mask = rasterize(disk, cell)
    c = mask.cell_centers()
    hole = (np.hypot(c[:, 0] - 0.2, c[:, 1] + 0.1) < rho).reshape(mask.bits.shape)
    dented = mask.with_bits(mask.bits & ~hole)
    got = hausdorff_set_vs_domain(dented, disk, cell_size=cell)
    assert abs(got - rho) <= 2 * cell


def test_boundary_sample_floor():
    with pytest.raises(ValueError):
        hausdorff_set_vs_domain(np.zeros((1, 2)), Disk(), boundary_samples=999)


def test_points_inside_domain_measure_only_the_gap():
    sq = Rectangle()
    pts = np.array([[0.5, 0.5]])
    # farthest domain point is a corner
    assert hausdorff_set_vs_domain(pts, sq, cell_size=0.01) == pytest.approx(math.sqrt(0.5), abs=1e-9)


def test_egg_sausage_hausdorff():
    egg = CrookedEggMinusDisk()
    traj = simulate(egg, None, interior_point(egg), 9.999, 1e-3, seed=0)
    assert len(traj) == 10_000
    got = hausdorff_set_vs_domain(sausage(traj.points, 0.04), egg, cell_size=0.005)
    assert got < 0.08


# -- measure distances -----------------------------------------------------------


def test_dmu_examples():
    mask = rasterize(Disk(), 0.02)
    assert dmu_masks(mask, mask) == 0.0
    comp = mask.with_bits(~mask.bits)
    w, h = mask.width * 0.02, mask.height * 0.02
    assert dmu_masks(mask, comp) == pytest.approx(w * h, rel=1e-12)
    other = GridMask.blank((0, 0, 1, 1), 0.02)
    with pytest.raises(GridMismatch):
        dmu_masks(mask, other)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_dmu_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    like = GridMask.blank((0, 0, 1, 1), 0.1)
    a, b, c = (like.with_bits(rng.random(like.bits.shape) < 0.5) for _ in range(3))
    assert dmu_masks(a, b) == dmu_masks(b, a)
    assert dmu_masks(a, a) == 0
    assert dmu_masks(a, b) <= dmu_masks(a, c) + dmu_masks(c, b) + 1e-15


def test_minkowski_content_of_square_and_disk():
    sq = rasterize(Rectangle(), 0.002)
    assert minkowski_content(sq, 0.02) == pytest.approx(4.0, rel=0.03)
    disk = rasterize(Disk(), 0.002)
    assert minkowski_content(disk, 0.02) == pytest.approx(2 * math.pi, rel=0.03)
    with pytest.raises(EpsTooSmallForGrid):
        minkowski_content(sq, 0.003)


def test_minkowski_content_under_refinement():
    vals = [minkowski_content(rasterize(Disk(), c, pad=0.1), 0.05) for c in (0.02, 0.01, 0.005)]
    assert all(v > 0 for v in vals)
    steiner = 2 * math.pi + math.pi * 0.05
    errs = [abs(v - steiner) for v in vals]
    assert errs[-1] <= errs[0]


@pytest.mark.parametrize(
    "domain, per",
    [(Rectangle(), 4.0), (Disk(), 2 * math.pi), (Rectangle((0, 0), (2, 0.5)), 5.0)],
)
@pytest.mark.parametrize("frac", [0.02, 0.05])
def test_steiner_formula_for_convex_masks(domain, per, frac):
    b = domain.bbox
    diam = math.hypot(b[2] - b[0], b[3] - b[1])
    eps = frac * diam
    cell = eps / 10
    mask = rasterize(domain, cell, pad=eps + 2 * cell)
    assert minkowski_content(mask, eps) == pytest.approx(per + math.pi * eps, rel=0.05)


# -- rate fits -------------------------------------------------------------------


def test_fit_exact_power_law():
    T = np.array([2.0, 4, 8, 16, 32])
    fit = fit_rate(zip(T, T**-0.5))
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points_used == 5


def test_fit_constant_and_log2_model():
    T = np.array([2.0, 4, 8, 16])
    assert fit_rate(zip(T, np.full(4, 3.0))).slope == pytest.approx(0.0, abs=1e-12)
    x = np.log(T / np.log(T) ** 2)
    fit = fit_rate(zip(T, np.exp(-0.5 * x)), model="log2_corrected")
    assert fit.slope == pytest.approx(-0.5, abs=1e-12)


def test_fit_errors():
    with pytest.raises(DegenerateDesign):
        fit_rate([(2, 1.0), (4, 1.0)])
    with pytest.raises(DegenerateDesign):
        fit_rate([(2, 1.0), (2, 2.0), (4, 1.0)])
    with pytest.raises(DegenerateDesign):
        fit_rate([(2, 1.0), (4, 0.0), (8, 1.0)])
    with pytest.raises(DegenerateDesign):
        fit_rate([(1, 1.0), (4, 1.0), (8, 1.0)], model="log2_corrected")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_fit_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    T = np.array([2.0, 4, 8, 16, 32, 64])
    v = rng.random(6) + 0.1
    a = fit_rate(zip(T, v))
    b = fit_rate(zip(T, c * v))
    assert b.slope == pytest.approx(a.slope, abs=1e-9)
    assert b.intercept - a.intercept == pytest.approx(math.log(c), abs=1e-9)
    assert 0.0 <= a.r_squared <= 1.0
