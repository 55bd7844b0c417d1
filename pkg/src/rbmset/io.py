"""Track ingestion, trajectory CSV files and SVG / GeoJSON export.

All floats written by this module use 12 significant digits, so a
write-read cycle reproduces coordinates to that precision.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from .domains import Domain
from .errors import EmptyFile, IoError, MissingColumn, TooFewPoints, UnparseableRow
from .estimators import AlphaHull, BoundaryLoop, UnionOfBalls
from .geometry import Arc, as_points, polygon_area
from .simulate import Trajectory

DEFAULT_MAPPING = {"t": "t", "x": "x", "y": "y"}
FLOAT_FMT = "%.12g"


def _fmt(v: float) -> str:
    return FLOAT_FMT % v


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def normalize_points(points) -> tuple[np.ndarray, np.ndarray, float]:
    """Map the bounding box into ``[0, 1]^2`` keeping the aspect ratio.

    Returns ``(mapped, shift, scale)`` with ``mapped = (points - shift) / scale``.
    Already normalised input is returned unchanged.
    """
    p = as_points(points)
    if len(p) == 0:
        return p.copy(), np.zeros(2), 1.0
    shift = p.min(0)
    side = float(np.ptp(p, axis=0).max())
    scale = side if side > 0 else 1.0
    return (p - shift) / scale, shift, scale


def _gap_summary(t: np.ndarray) -> dict:
    gaps = np.diff(t)
    if len(gaps) == 0:
        return {"median": None, "min": None, "max": None, "uniform": True}
    med = float(np.median(gaps))
    tol = 1e-9 * max(abs(med), 1e-300)
    return {
        "median": med,
        "min": float(gaps.min()),
        "max": float(gaps.max()),
        "uniform": bool(np.all(np.abs(gaps - med) <= tol)),
    }


def read_track_csv(path, mapping: dict | None = None, normalize: bool = False) -> Trajectory:
    """Read a tracking CSV into a :class:`Trajectory`.

    Parameters
    ----------
    path
        CSV file with a header row.
    mapping
        Column names for ``t``, ``x``, ``y`` (and optionally ``tag``); missing
        keys fall back to ``"t"``, ``"x"``, ``"y"``.
    normalize
        Map the coordinates into the unit square, preserving aspect ratio.

    Records are stably sorted by time.  The step ``h`` is the median time
    gap (``1`` if it is not positive); gap statistics, the timestamps and any
    tags are kept in ``meta``.
    """
    cols = {**DEFAULT_MAPPING, **(mapping or {})}
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise IoError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyFile(f"{path} is empty")
        header = [h.strip() for h in header]
        index = {}
        for key in ("t", "x", "y", "tag"):
            if key not in cols:
                continue
            if cols[key] not in header:
                if key == "tag":
                    continue
                raise MissingColumn(f"column {cols[key]!r} not found in {path}")
            index[key] = header.index(cols[key])
        rows = []
        tags = []
        for i, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(row[index[k]]) for k in ("t", "x", "y")]
            except (IndexError, ValueError) as exc:
                raise UnparseableRow(i, str(exc)) from None
            if not all(math.isfinite(v) for v in vals):
                raise UnparseableRow(i, "non-finite value")
            rows.append(vals)
            if "tag" in index:
                tags.append(row[index["tag"]] if index["tag"] < len(row) else "")
    if not rows:
        raise EmptyFile(f"{path} has no data rows")
    arr = np.asarray(rows, dtype=float)
    order = np.argsort(arr[:, 0], kind="stable")
    arr = arr[order]
    t, pts = arr[:, 0], arr[:, 1:]
    meta = {"source": str(path), "times": t, "gaps": _gap_summary(t)}
    if tags:
        meta["tags"] = [tags[k] for k in order]
    if normalize:
        pts, shift, scale = normalize_points(pts)
        meta["normalization"] = {"shift": shift.tolist(), "scale": scale}
    med = meta["gaps"]["median"]
    h = med if med is not None and med > 0 else 1.0
    return Trajectory(pts, h, float(t[0]), None, meta=meta)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``t,x,y`` rows; times are taken from ``meta["times"]`` if present."""
    times = traj.meta.get("times")
    if times is None or len(times) != len(traj.points):
        times = traj.times
    try:
        with Path(path).open("w", newline="") as fh:
            fh.write("t,x,y\n")
            for tk, (x, y) in zip(times, traj.points):
                fh.write(f"{_fmt(tk)},{_fmt(x)},{_fmt(y)}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_trajectory_csv(path) -> Trajectory:
    return read_track_csv(path, DEFAULT_MAPPING, normalize=False)


def truncate(traj: Trajectory, fraction: float) -> Trajectory:
    """First ``ceil(fraction * n)`` points of the trajectory."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    n = len(traj.points)
    k = min(n, int(math.ceil(fraction * n - 1e-9)))
    if k < 2:
        raise TooFewPoints(f"truncation keeps {k} point(s); at least 2 are needed")
    if k == n:
        return traj
    meta = dict(traj.meta)
    if meta.get("times") is not None and len(meta["times"]) == n:
        meta["times"] = meta["times"][:k]
    meta["truncated_to"] = k
    return replace(traj, points=traj.points[:k], meta=meta)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

DEFAULT_STYLE = {
    "domain": {"stroke": "#000000", "fill": "none", "stroke-width": "1"},
    "trajectory": {"stroke": "#7f7f7f", "fill": "none", "stroke-width": "0.5"},
    "boundary": {"stroke": "#d62728", "fill": "none", "stroke-width": "1.5"},
    "isolated": {"fill": "#d62728", "stroke": "none"},
    "points": {"fill": "#1f77b4", "stroke": "none"},
}


def _style_attrs(style: dict) -> str:
    return " ".join(f'{k}="{v}"' for k, v in sorted(style.items()))


def _loop_path(loop: BoundaryLoop) -> str:
    first = loop.pieces[0].start_point
    cmds = [f"M{_fmt(first[0])},{_fmt(first[1])}"]
    for piece in loop.pieces:
        end = piece.end_point
        if isinstance(piece, Arc):
            large = 1 if piece.span > math.pi else 0
            # the y-flip of the enclosing group keeps positive angles positive
            sweep = 1 if piece.orientation == "ccw" else 0
            r = _fmt(piece.radius)
            cmds.append(f"A{r},{r} 0 {large} {sweep} {_fmt(end[0])},{_fmt(end[1])}")
        else:
            cmds.append(f"L{_fmt(end[0])},{_fmt(end[1])}")
    cmds.append("Z")
    return " ".join(cmds)


def _polyline(points) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in as_points(points))


def _layer_bbox(obj) -> np.ndarray | None:
    if isinstance(obj, Domain):
        b = obj.bbox
        return np.array([[b[0], b[1]], [b[2], b[3]]])
    if isinstance(obj, UnionOfBalls):
        c = obj.centers
        return np.vstack([c.min(0) - obj.eps, c.max(0) + obj.eps])
    if isinstance(obj, AlphaHull):
        return np.vstack([obj.points.min(0), obj.points.max(0)])
    pts = obj.points if isinstance(obj, Trajectory) else as_points(obj)
    if len(pts) == 0:
        return None
    return np.vstack([pts.min(0), pts.max(0)])


def _layer_svg(obj, style: dict, dot: float) -> list[str]:
    out = []
    if isinstance(obj, Domain):
        attrs = _style_attrs(style["domain"])
        for pts, closed in obj.outline():
            tag = "polygon" if closed else "polyline"
            out.append(f'<{tag} class="domain" points="{_polyline(pts)}" {attrs} vector-effect="non-scaling-stroke"/>')
    elif isinstance(obj, (AlphaHull, UnionOfBalls)):
        attrs = _style_attrs(style["boundary"])
        for loop in obj.loops:
            if loop.pieces:
                out.append(f'<path class="boundary" d="{_loop_path(loop)}" {attrs} vector-effect="non-scaling-stroke"/>')
        if isinstance(obj, AlphaHull):
            attrs = _style_attrs(style["isolated"])
            for x, y in obj.isolated_points:
                out.append(f'<circle class="isolated" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(dot)}" {attrs}/>')
    elif isinstance(obj, Trajectory):
        if len(obj.points) >= 2:
            attrs = _style_attrs(style["trajectory"])
            out.append(f'<polyline class="trajectory" points="{_polyline(obj.points)}" {attrs} vector-effect="non-scaling-stroke"/>')
    else:
        attrs = _style_attrs(style["points"])
        for x, y in as_points(obj):
            out.append(f'<circle class="point" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(dot)}" {attrs}/>')
    return out


def render_svg(geometry, style: dict | None = None, size: int = 600) -> str:
    """SVG document for one geometry or a sequence of layers drawn in order.

    Layers may be domains, hulls, sausages, trajectories or point arrays.
    Circular arcs are written as exact SVG arc commands.
    """
    layers = list(geometry) if isinstance(geometry, (list, tuple)) else [geometry]
    st = {k: dict(v) for k, v in DEFAULT_STYLE.items()}
    for k, v in (style or {}).items():
        st.setdefault(k, {}).update(v)
    boxes = [b for b in (_layer_bbox(o) for o in layers) if b is not None]
    if boxes:
        allb = np.vstack(boxes)
        lo, hi = allb.min(0), allb.max(0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = float(max(hi - lo)) or 1.0
    pad = 0.02 * span
    lo, hi = lo - pad, hi + pad
    w, h = float(hi[0] - lo[0]), float(hi[1] - lo[1])
    px_w = size if w >= h else max(1, int(round(size * w / h)))
    px_h = size if h >= w else max(1, int(round(size * h / w)))
    dot = 0.003 * span
    body = []
    for obj in layers:
        body.extend(_layer_svg(obj, st, dot))
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px_w}" height="{px_h}" '
        f'viewBox="{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(w)} {_fmt(h)}">\n'
        '<g transform="scale(1,-1)">\n'
    )
    return head + "".join(line + "\n" for line in body) + "</g>\n</svg>\n"


def export_svg(geometry, style: dict | None = None, path=None, size: int = 600) -> str:
    """Render ``geometry`` (see :func:`render_svg`) and write it to ``path``
    if given.  Returns the SVG text."""
    text = render_svg(geometry, style, size)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
    return text


def render_heatmap_svg(mask, counts, size: int = 600) -> str:
    """Grey-scale heat map of per-cell counts on the cells of ``mask``
    (darker is more visits)."""
    counts = np.asarray(counts, dtype=float)
    top = float(counts[mask.bits].max()) if mask.count else 0.0
    x0, y0, x1, y1 = mask.bbox
    w, h = x1 - x0, y1 - y0
    px_w = size if w >= h else max(1, int(round(size * w / h)))
    px_h = size if h >= w else max(1, int(round(size * h / w)))
    c = mask.cell_size
    body = []
    for j, i in zip(*np.nonzero(mask.bits)):
        level = counts[j, i] / top if top > 0 else 0.0
        g = int(round(255 * (1.0 - level)))
        body.append(
            f'<rect x="{_fmt(x0 + i * c)}" y="{_fmt(y0 + j * c)}" width="{_fmt(c)}" height="{_fmt(c)}" '
            f'fill="#{g:02x}{g:02x}{g:02x}"><title>{int(counts[j, i])}</title></rect>'
        )
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{px_w}" height="{px_h}" '
        f'viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(w)} {_fmt(h)}">\n'
        '<g transform="scale(1,-1)">\n'
    )
    return head + "".join(line + "\n" for line in body) + "</g>\n</svg>\n"


# ---------------------------------------------------------------------------
# GeoJSON
# ---------------------------------------------------------------------------


def _ring(loop: BoundaryLoop, chord_tol: float) -> np.ndarray:
    parts = []
    for piece in loop.pieces:
        pts = piece.flatten(chord_tol)
        parts.append(pts[:-1])
    ring = np.vstack(parts)
    return np.vstack([ring, ring[:1]])


def _in_ring(pt, ring: np.ndarray) -> bool:
    x, y = pt
    xa, ya = ring[:-1, 0], ring[:-1, 1]
    xb, yb = ring[1:, 0], ring[1:, 1]
    crosses = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = xa + (y - ya) * (xb - xa) / (yb - ya)
    return bool(np.count_nonzero(crosses & (xs > x)) % 2)


def _nest(rings: list[np.ndarray]) -> list[list[np.ndarray]]:
    """Group rings into polygons: each clockwise ring becomes a hole of the
    smallest counter-clockwise ring around it."""
    areas = [polygon_area(r[:-1]) for r in rings]
    outer = [k for k, a in enumerate(areas) if a > 0]
    polys = {k: [rings[k]] for k in outer}
    for k, a in enumerate(areas):
        if a >= 0:
            continue
        probe = rings[k][0]
        owners = [o for o in outer if areas[o] > -a and _in_ring(probe, rings[o])]
        if owners:
            best = min(owners, key=lambda o: areas[o])
            polys[best].append(rings[k])
    return [polys[k] for k in outer]


def _coords(a: np.ndarray) -> list:
    return [[float(_fmt(x)), float(_fmt(y))] for x, y in a]


def to_geojson(geometry, chord_tol: float = 1e-4) -> dict:
    """GeoJSON ``FeatureCollection`` for one geometry or a list of layers.

    Arcs are flattened to polylines within ``chord_tol``.
    """
    layers = list(geometry) if isinstance(geometry, (list, tuple)) else [geometry]
    features = []
    for obj in layers:
        if isinstance(obj, (AlphaHull, UnionOfBalls)):
            rings = [_ring(l, chord_tol) for l in obj.loops if l.pieces and l.regular]
            polys = _nest(rings)
            kind = "alpha_hull" if isinstance(obj, AlphaHull) else "sausage"
            features.append(
                {
                    "type": "Feature",
                    "properties": {"kind": kind, "area": obj.area},
                    "geometry": {"type": "MultiPolygon", "coordinates": [[_coords(r) for r in p] for p in polys]},
                }
            )
            iso = getattr(obj, "isolated_points", None)
            if iso is not None and len(iso):
                features.append(
                    {
                        "type": "Feature",
                        "properties": {"kind": "isolated_points"},
                        "geometry": {"type": "MultiPoint", "coordinates": _coords(iso)},
                    }
                )
        elif isinstance(obj, Domain):
            lines = [_coords(np.vstack([p, p[:1]]) if closed else p) for p, closed in obj.outline()]
            features.append(
                {
                    "type": "Feature",
                    "properties": {"kind": "domain", "domain": obj.kind},
                    "geometry": {"type": "MultiLineString", "coordinates": lines},
                }
            )
        elif isinstance(obj, Trajectory):
            features.append(
                {
                    "type": "Feature",
                    "properties": {"kind": "trajectory", "h": obj.h},
                    "geometry": {"type": "LineString", "coordinates": _coords(obj.points)},
                }
            )
        else:
            features.append(
                {
                    "type": "Feature",
                    "properties": {"kind": "points"},
                    "geometry": {"type": "MultiPoint", "coordinates": _coords(as_points(obj))},
                }
            )
    return {"type": "FeatureCollection", "features": features}


def export_geojson(geometry, path=None, chord_tol: float = 1e-4) -> str:
    text = json.dumps(to_geojson(geometry, chord_tol), sort_keys=True)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
    return text
