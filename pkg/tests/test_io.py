from __future__ import annotations

import json
import re
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbmset.domains import CrookedEggMinusDisk, Disk
from rbmset.errors import EmptyFile, IoError, MissingColumn, TooFewPoints, UnparseableRow
from rbmset.estimators import alpha_hull, sausage
from rbmset.experiments import interior_point
from rbmset.io import (
    export_geojson,
    export_svg,
    normalize_points,
    read_track_csv,
    read_trajectory_csv,
    truncate,
    write_trajectory_csv,
)
from rbmset.metrics import hausdorff_set_vs_domain
from rbmset.simulate import Trajectory, decimate, simulate

EGG = CrookedEggMinusDisk()


def _write(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


# -- reading -----------------------------------------------------------------------


def test_normalize_example(tmp_path):
    f = _write(tmp_path / "a.csv", ["t", "x", "y"], [(0, 0, 0), (1, 1, 0), (2, 2, 0)])
    tr = read_track_csv(f, normalize=True)
    assert tr.points.tolist() == [[0, 0], [0.5, 0], [1, 0]]
    assert tr.h == 1.0
    assert tr.meta["gaps"]["uniform"]


def test_shuffled_rows_give_same_trajectory(tmp_path):
    rng = np.random.default_rng(0)
    rows = [(float(t), float(x), float(y)) for t, (x, y) in zip(np.arange(50) * 0.5, rng.random((50, 2)))]
    a = read_track_csv(_write(tmp_path / "a.csv", ["t", "x", "y"], rows), normalize=True)
    shuffled = [rows[k] for k in rng.permutation(50)]
    b = read_track_csv(_write(tmp_path / "b.csv", ["t", "x", "y"], shuffled), normalize=True)
    assert np.array_equal(a.points, b.points)
    assert a.h == b.h == 0.5


def test_column_mapping_and_tags(tmp_path):
    f = _write(
        tmp_path / "gps.csv",
        ["timestamp", "lon", "lat", "id"],
        [(10, 5.0, 7.0, "b1"), (0, 1.0, 2.0, "b2"), (30, 3.0, 3.0, "b1")],
    )
    tr = read_track_csv(f, {"t": "timestamp", "x": "lon", "y": "lat", "tag": "id"})
    assert tr.points.tolist() == [[1, 2], [5, 7], [3, 3]]
    assert tr.meta["tags"] == ["b2", "b1", "b1"]
    assert tr.t0 == 0.0 and tr.h == 15.0
    assert not tr.meta["gaps"]["uniform"]


def test_read_errors(tmp_path):
    with pytest.raises(MissingColumn):
        read_track_csv(_write(tmp_path / "m.csv", ["t", "x"], [(0, 1)]))
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(EmptyFile):
        read_track_csv(tmp_path / "e.csv")
    with pytest.raises(EmptyFile):
        read_track_csv(_write(tmp_path / "h.csv", ["t", "x", "y"], []))
    bad = _write(tmp_path / "b.csv", ["t", "x", "y"], [(0, 0, 0), (1, "oops", 0)])
    with pytest.raises(UnparseableRow) as info:
        read_track_csv(bad)
    assert info.value.row_index == 2
    with pytest.raises(IoError):
        read_track_csv(tmp_path / "missing.csv")


def _bison_like(tmp_path, n=9635):
    """Irregularly sampled track in projected metres."""
    raw = simulate(EGG, None, interior_point(EGG), 200.0, 1e-3, seed=3)
    pts = decimate(raw, len(raw) // n).points[:n]
    rng = np.random.default_rng(1)
    t = np.cumsum(rng.choice([300.0, 600.0, 900.0], size=n))
    xy = 4.5e5 + 2.0e4 * pts
    rows = [(repr(float(a)), repr(float(x)), repr(float(y))) for a, (x, y) in zip(t, xy)]
    return _write(tmp_path / "bison.csv", ["t", "x", "y"], rows)


def test_large_track_and_hull_runtime(tmp_path):
    tr = read_track_csv(_bison_like(tmp_path), normalize=True)
    assert len(tr) == 9635
    assert tr.points.min() >= 0 and tr.points.max() <= 1 + 1e-12
    start = time.perf_counter()
    hull = alpha_hull(tr.points, 0.005)
    assert time.perf_counter() - start < 10.0
    assert hull.area > 0


# -- round trips ---------------------------------------------------------------------


def test_write_read_round_trip(tmp_path):
    pts = np.random.default_rng(2).normal(scale=1e3, size=(200, 2))
    tr = Trajectory(pts, 0.01, t0=3.0)
    write_trajectory_csv(tr, tmp_path / "t.csv")
    back = read_trajectory_csv(tmp_path / "t.csv")
    assert np.allclose(back.points, pts, rtol=1e-11, atol=0)
    assert back.h == pytest.approx(0.01, rel=1e-11)
    assert back.t0 == 3.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(-1e6, 1e6), st.floats(1e-3, 1e4))
def test_normalize_is_idempotent(seed, shift, scale):
    pts = shift + scale * np.random.default_rng(seed).random((25, 2))
    once, _, _ = normalize_points(pts)
    twice, _, _ = normalize_points(once)
    assert np.allclose(once, twice, atol=1e-12, rtol=0)
    assert once.min() == 0.0 and once.max() == pytest.approx(1.0)


# -- truncation ------------------------------------------------------------------------


def test_truncate_examples():
    tr = Trajectory(np.random.default_rng(0).random((10, 2)), 0.1)
    assert truncate(tr, 1.0) is tr
    half = truncate(tr, 0.5)
    assert len(half) == 5 and np.array_equal(half.points, tr.points[:5])
    assert len(truncate(tr, 0.31)) == 4
    with pytest.raises(TooFewPoints):
        truncate(tr, 0.1)
    with pytest.raises(ValueError):
        truncate(tr, 0.0)


def test_egg_truncations_approach_domain():
    traj = simulate(EGG, None, interior_point(EGG), 9.999, 1e-3, seed=0)
    cell = 0.005
    d = []
    for n in (1000, 5000, 10_000):
        part = truncate(traj, n / len(traj))
        assert len(part) == n
        d.append(hausdorff_set_vs_domain(sausage(part.points, 0.04), EGG, cell_size=cell))
    assert all(b <= a + cell for a, b in zip(d, d[1:]))


# -- SVG -------------------------------------------------------------------------------


def test_single_disk_svg_has_two_arcs():
    text = export_svg(sausage([[0.0, 0.0]], 0.5))
    ET.fromstring(text)
    paths = re.findall(r'<path[^>]* d="([^"]*)"', text)
    assert len(paths) == 1
    assert len(re.findall(r"A[-\d.]", paths[0])) == 2


def test_empty_trajectory_svg_has_no_paths():
    text = export_svg(Trajectory(np.zeros((0, 2)), 1e-3))
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    assert "<path" not in text and "<polyline" not in text


def test_egg_figure_bundle_is_deterministic(tmp_path):
    def bundle(path):
        traj = simulate(EGG, None, interior_point(EGG), 1.0, 1e-3, seed=11)
        return export_svg([EGG, traj, sausage(traj.points, 0.04)], path=path)

    a = bundle(tmp_path / "a.svg")
    b = bundle(tmp_path / "b.svg")
    assert a == b
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert "<polygon" in a and "<polyline" in a and "<path" in a


def test_svg_write_error(tmp_path):
    with pytest.raises(IoError):
        export_svg(np.zeros((2, 2)), path=tmp_path / "nope" / "x.svg")


# -- GeoJSON ---------------------------------------------------------------------------


def test_geojson_disk_ring():
    g = json.loads(export_geojson(sausage([[0.0, 0.0]], 1.0), chord_tol=1e-4))
    polys = [f for f in g["features"] if f["geometry"]["type"] == "MultiPolygon"]
    ring = np.array(polys[0]["geometry"]["coordinates"][0][0])
    assert np.allclose(ring[0], ring[-1])
    assert np.allclose(np.hypot(ring[:, 0], ring[:, 1]), 1.0, atol=1e-9)
    # chord sagitta stays below the tolerance
    step = np.hypot(*np.diff(ring, axis=0).T).max()
    assert 1 - np.sqrt(1 - (step / 2) ** 2) <= 1e-4 + 1e-12


def test_geojson_hull_with_hole_and_isolated_point():
    th = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    ring = np.column_stack([np.cos(th), np.sin(th)])
    pts = np.vstack([ring, 0.6 * ring, [[5.0, 5.0]]])
    hull = alpha_hull(pts, 0.3)
    g = json.loads(export_geojson(hull))
    kinds = {f["geometry"]["type"]: f["geometry"] for f in g["features"]}
    assert len(kinds["MultiPoint"]["coordinates"]) == 1
    polys = kinds["MultiPolygon"]["coordinates"]
    assert len(polys) == 1 and len(polys[0]) == 2


def test_geojson_domain_and_trajectory():
    g = json.loads(export_geojson(Disk()))
    assert g["features"][0]["geometry"]["type"] == "MultiLineString"
    tr = Trajectory(np.random.default_rng(0).random((5, 2)), 1.0)
    g = json.loads(export_geojson(tr))
    assert g["features"][0]["geometry"]["type"] == "LineString"
