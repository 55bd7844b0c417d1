from __future__ import annotations

import json

import numpy as np
import pytest

import rbmset.experiments as ex
from rbmset.domains import Disk
from rbmset.experiments import ExperimentConfig, run_figure, run_rate_study, sausage_radius
from rbmset.simulate import simulate

SMALL = dict(
    domain="unit_disk",
    T_grid=[0.25, 0.5, 1.0],
    h=1e-3,
    replications=3,
    metrics=["d_H"],
    cell_size=0.02,
    boundary_samples=1000,
    rate_model="raw_T",
)


def test_single_duration_has_no_fit():
    cfg = ExperimentConfig(**{**SMALL, "T_grid": [1.0], "replications": 1})
    rep = run_rate_study(cfg)
    assert len(rep.rows) == 1
    assert rep.fits == {}
    assert any("omitted" in n for n in rep.notices)


def test_row_count_order_and_fit():
    cfg = ExperimentConfig(**{**SMALL, "metrics": ["d_H", "d_mu", "perimeter"], "estimator": {"kind": "sausage", "eps": 0.1}})
    rep = run_rate_study(cfg)
    assert len(rep.rows) == 3 * 3 * 3
    keys = [(r[0], r[1], r[3]) for r in rep.rows]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1], ["d_H", "d_mu", "perimeter"].index(k[2])))
    assert set(rep.fits) == {"d_H", "d_mu", "perimeter"}
    for fit in rep.fits.values():
        assert fit.points_used == 9 and 0 <= fit.r_squared <= 1
    assert rep.provenance["seeds"] == [0, 1, 2]
    assert {r[5] for r in rep.rows} == {"sausage[fixed]"}


def test_rows_match_independent_runs():
    cfg = ExperimentConfig(**SMALL)
    rep = run_rate_study(cfg)
    disk = Disk()
    x0 = ex.interior_point(disk)
    for T in cfg.T_grid:
        for i in range(cfg.replications):
            short = simulate(disk, None, x0, T, cfg.h, seed=i)
            want = ex.hausdorff_set_vs_domain(short.points, disk, cfg.boundary_samples, cfg.cell_size)
            got = [r[4] for r in rep.rows if r[0] == T and r[1] == i]
            assert got == [want]


def test_report_is_byte_reproducible(tmp_path):
    a = run_rate_study(ExperimentConfig(**SMALL, report_csv=str(tmp_path / "a.csv")))
    b = run_rate_study(ExperimentConfig(**SMALL, report_csv=str(tmp_path / "b.csv")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.csv_text().splitlines()[0] == "T,replicate,seed,metric,value,estimator,param"
    assert a.provenance["config_sha256"] == b.provenance["config_sha256"]


def test_worker_pool_matches_sequential():
    seq = run_rate_study(ExperimentConfig(**SMALL))
    par = run_rate_study(ExperimentConfig(**SMALL, workers=2))
    assert par.csv_text() == seq.csv_text()


def test_partial_rows_flushed_on_failure(tmp_path, monkeypatch):
    real = ex.simulate

    def flaky(domain, spec, x0, T, h, seed):
        if seed == 2:
            raise RuntimeError("boom")
        return real(domain, spec, x0, T, h, seed)

    monkeypatch.setattr(ex, "simulate", flaky)
    out = tmp_path / "partial.csv"
    with pytest.raises(RuntimeError):
        run_rate_study(ExperimentConfig(**SMALL, report_csv=str(out)))
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert {ln.split(",")[1] for ln in lines[1:]} == {"0", "1"}


def test_config_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(T_grid=[2, 1])
    with pytest.raises(ValueError):
        ExperimentConfig(metrics=["perimeter"])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({**SMALL, "outputs": {"report_csv": "r.csv"}}))
    cfg = ExperimentConfig.from_json(p)
    assert cfg.report_csv == "r.csv"
    assert cfg.sha256() == ExperimentConfig(**SMALL).sha256()


def test_sausage_radius_rules():
    pts = np.random.default_rng(0).random((50, 2))
    assert sausage_radius({"eps_rule": "fixed", "eps": 0.3}, pts, 4.0, 0) == 0.3
    assert sausage_radius({"eps_rule": "rate", "c": 2.0}, pts, 4.0, 0) == pytest.approx(2 * np.log(4) / 2)
    assert sausage_radius({"eps_rule": "connectivity"}, pts, 4.0, 0) == pytest.approx(ex.eps_connectivity(pts))
    assert sausage_radius({"eps_rule": "split"}, pts, 4.0, 5) == ex.eps_split(pts, 0.05, 5)[0]
    with pytest.raises(ex.DegenerateDesign):
        sausage_radius({"eps_rule": "rate"}, pts, 1.0, 0)


# -- figures ---------------------------------------------------------------------


def test_rbm2_figure(tmp_path):
    files = run_figure("rbm2", seed=0, outdir=tmp_path)
    assert sorted(f.suffix for f in files) == [".csv", ".svg", ".svg", ".svg"]
    table = (tmp_path / "rbm2_metrics.csv").read_text().splitlines()
    assert [ln.split(",")[0] for ln in table[1:]] == ["1000", "5000", "10000"]


def test_rbm3_figure_deterministic(tmp_path):
    a = run_figure("rbm3", seed=1, outdir=tmp_path / "a")
    b = run_figure("rbm3", seed=1, outdir=tmp_path / "b")
    assert [f.name for f in a if f.suffix == ".svg"] == ["rbm3_N10000.svg", "rbm3_N2000.svg", "rbm3_N500.svg"]
    for fa, fb in zip(a, b):
        assert fa.read_bytes() == fb.read_bytes()
    rows = [ln.split(",") for ln in (tmp_path / "a" / "rbm3_metrics.csv").read_text().splitlines()[1:]]
    areas = [float(r[2]) for r in rows]
    # sparser samples give smaller hulls
    assert areas[0] >= areas[1] >= areas[2]


@pytest.mark.parametrize("recipe", ["stationary", "drift_demo"])
def test_occupancy_figures(tmp_path, recipe):
    files = run_figure(recipe, seed=0, outdir=tmp_path)
    assert [f.suffix for f in files] == [".svg", ".csv"]
    counts = [int(ln.split(",")[2]) for ln in files[1].read_text().splitlines()[1:]]
    assert len(counts) == 100 and sum(counts) == 1_000_001 - 100_000


def test_unknown_recipe(tmp_path):
    with pytest.raises(ValueError):
        run_figure("nope", outdir=tmp_path)
