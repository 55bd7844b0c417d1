from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from rbmset.domains import CrookedEggMinusDisk, Disk, Rectangle
from rbmset.errors import StartOutsideDomain
from rbmset.simulate import DiffusionSpec, Trajectory, decimate, n_steps_for, occupancy, simulate

EGG = CrookedEggMinusDisk()
SQUARE = Rectangle()


def test_free_increments_have_variance_h():
    big = Rectangle((-1e6, -1e6), (1e6, 1e6))
    tr = simulate(big, None, (0.0, 0.0), 100.0, 1e-3, seed=4)
    assert tr.n_steps == 100_000
    assert tr.reflections == 0 and tr.l_proxy == 0.0
    inc = np.diff(tr.points, axis=0)
    var = inc.var(axis=0, ddof=1)
    assert np.all(np.abs(var / 1e-3 - 1) < 0.05)


def test_egg_run_stays_inside():
    tr = simulate(EGG, None, (0.5, 0.3), 10.0, 1e-3, seed=1)
    assert len(tr.points) == 10_001
    assert EGG.contains(tr.points).all()
    assert tr.reflections > 0 and tr.l_proxy > 0


@pytest.mark.parametrize("T, h, n", [(1.0, 1e-3, 1000), (0.3, 0.1, 3), (0.7, 0.1, 7), (2.0, 0.5, 4)])
def test_step_count_floor(T, h, n):
    assert n_steps_for(T, h) == n


def test_determinism_and_method_equivalence():
    a = simulate(EGG, None, (0.5, 0.3), 3.0, 1e-3, seed=9)
    b = simulate(EGG, None, (0.5, 0.3), 3.0, 1e-3, seed=9)
    c = simulate(EGG, None, (0.5, 0.3), 3.0, 1e-3, seed=9, method="loop")
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.points, c.points)
    assert (a.reflections, a.l_proxy) == (c.reflections, c.l_proxy)


def test_prefix_of_long_run_equals_short_run():
    long = simulate(Disk(), None, (0.0, 0.0), 4.0, 1e-3, seed=2)
    short = simulate(Disk(), None, (0.0, 0.0), 1.0, 1e-3, seed=2)
    assert np.array_equal(long.points[: len(short.points)], short.points)
    # the displacement sum only grows with time
    assert short.l_proxy <= long.l_proxy


def test_different_seeds_differ():
    a = simulate(Disk(), None, (0.0, 0.0), 0.1, 1e-3, seed=0)
    b = simulate(Disk(), None, (0.0, 0.0), 0.1, 1e-3, seed=1)
    assert not np.array_equal(a.points, b.points)


def test_callable_coefficients_use_loop():
    spec = DiffusionSpec(drift=lambda x: -2.0 * x, diffusion=lambda x: 0.5 * np.eye(2), label="ou")
    tr = simulate(Disk(), spec, (0.2, 0.1), 1.0, 1e-3, seed=3)
    assert Disk().contains(tr.points).all()
    assert tr.meta["spec"]["kind"] == "callable"


def test_constant_spec_equals_callable_version():
    const = DiffusionSpec.constant((0.3, -0.2), 0.7)
    func = DiffusionSpec(drift=lambda x: np.array([0.3, -0.2]), diffusion=lambda x: 0.7 * np.eye(2))
    a = simulate(SQUARE, const, (0.5, 0.5), 1.0, 1e-3, seed=5)
    b = simulate(SQUARE, func, (0.5, 0.5), 1.0, 1e-3, seed=5)
    assert np.allclose(a.points, b.points, atol=1e-12)


def test_trajectory_is_immutable():
    tr = simulate(Disk(), None, (0.0, 0.0), 0.01, 1e-3, seed=0)
    with pytest.raises(ValueError):
        tr.points[0, 0] = 5.0


def test_errors():
    with pytest.raises(StartOutsideDomain):
        simulate(EGG, None, (0.05, 0.6), 1.0)
    with pytest.raises(ValueError):
        simulate(Disk(), None, (0, 0), 1.0, h=0.0)
    with pytest.raises(ValueError):
        simulate(Disk(), None, (0, 0), 1e-4, h=1e-3)


def test_spec_from_dict():
    assert DiffusionSpec.from_dict(None).is_rbm
    assert DiffusionSpec.from_dict({"kind": "rbm"}).is_rbm
    s = DiffusionSpec.from_dict({"drift": [0.5, 0], "sigma": 2.0})
    assert s.drift.tolist() == [0.5, 0.0]
    assert s.diffusion.tolist() == [[2.0, 0.0], [0.0, 2.0]]
    assert not s.is_rbm


# -- occupancy ---------------------------------------------------------------------


def test_zero_step_occupancy_single_cell():
    tr = Trajectory(np.array([[0.55, 0.45]]), 1e-3)
    hist = occupancy(tr, SQUARE, 0.1)
    assert hist.total == 1
    assert np.count_nonzero(hist.counts) == 1
    assert hist.counts[4, 5] == 1


def test_occupancy_counts_sum_to_recorded_steps():
    tr = simulate(EGG, None, (0.5, 0.3), 2.0, 1e-3, seed=0)
    hist = occupancy(tr, EGG, 0.05, burn_in=100)
    assert hist.total == len(tr.points) - 100
    assert np.all(hist.counts[~hist.mask.bits] == 0)


def test_occupancy_burn_in_bounds():
    tr = Trajectory(np.zeros((3, 2)) + 0.5, 1e-3)
    with pytest.raises(ValueError):
        occupancy(tr, SQUARE, 0.1, burn_in=3)


def test_drift_gives_increasing_marginal():
    spec = DiffusionSpec.constant((0.5, 0.0), 1.0)
    tr = simulate(SQUARE, spec, (0.5, 0.5), 200.0, 1e-3, seed=8)
    hist = occupancy(tr, SQUARE, 0.1, burn_in=20_000)
    dens = hist.column_density()
    # density proportional to exp(x): ends differ by a factor near e
    assert dens[-1] > dens[0]
    assert np.corrcoef(np.arange(10), dens)[0, 1] > 0.9
    dev = hist.relative_deviation().reshape(10, 10)
    assert abs(dev[:, 0].mean()) > 0.2 and abs(dev[:, -1].mean()) > 0.2


# -- decimation ----------------------------------------------------------------------


def test_decimate_examples():
    tr = Trajectory(np.random.default_rng(0).random((10_000, 2)), 1e-3)
    assert decimate(tr, 1) is tr
    d5 = decimate(tr, 5)
    assert len(d5) == 2000 and d5.h == pytest.approx(5e-3)
    assert np.array_equal(d5.points[0], tr.points[0])
    assert len(decimate(tr, 20)) == 500
    with pytest.raises(ValueError):
        decimate(tr, 0)


# -- weak convergence smoke test ------------------------------------------------------


def _energy_stat(x, y):
    return 2 * cdist(x, y).mean() - cdist(x, x).mean() - cdist(y, y).mean()


def test_halving_h_leaves_endpoint_law_unchanged():
    disk = Disk()
    x = np.array([simulate(disk, None, (0.0, 0.0), 0.5, 2e-3, seed=s).points[-1] for s in range(200)])
    y = np.array([simulate(disk, None, (0.0, 0.0), 0.5, 1e-3, seed=1000 + s).points[-1] for s in range(200)])
    obs = _energy_stat(x, y)
    both = np.vstack([x, y])
    rng = np.random.default_rng(0)
    perms = []
    for _ in range(299):
        k = rng.permutation(400)
        perms.append(_energy_stat(both[k[:200]], both[k[200:]]))
    p_value = (1 + np.sum(np.array(perms) >= obs)) / 300
    assert p_value > 0.01
