"""Command-line entry point: ``rbmset <command> ...``.

Exit status is 0 on success, 1 on a usage error (the offending flag is
printed) and 2 when the input data cannot be processed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as rio
from .domains import GridMask, resolve_domain
from .errors import RbmSetError
from .estimators import AlphaHull, alpha_hull, perimeter, sausage
from .experiments import RECIPES, ExperimentConfig, interior_point, run_figure, run_rate_study
from .geometry import euclidean_mst
from .metrics import dmu_masks, hausdorff_points, hausdorff_set_vs_domain
from .simulate import DiffusionSpec, simulate
from .tuning import tune


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit_json(obj: dict, path) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_points(path, columns: str | None, normalize: bool):
    mapping = None
    if columns:
        names = [c.strip() for c in columns.split(",")]
        if len(names) != 3:
            raise UsageError("--columns: expected three comma-separated names for t,x,y")
        mapping = dict(zip(("t", "x", "y"), names))
    return rio.read_track_csv(path, mapping, normalize)


# -- commands -------------------------------------------------------------


def cmd_simulate(a) -> int:
    domain = resolve_domain(a.domain)
    if a.drift is None and a.sigma is None:
        spec = DiffusionSpec.rbm()
    else:
        spec = DiffusionSpec.constant(a.drift or (0.0, 0.0), 1.0 if a.sigma is None else a.sigma)
    if a.h > 0.05 * domain.feature_scale:
        print(
            f"warning: h={a.h:g} exceeds 0.05 x feature scale ({domain.feature_scale:g}); "
            "projection steps may be inaccurate",
            file=sys.stderr,
        )
    x0 = a.x0 if a.x0 is not None else interior_point(domain)
    traj = simulate(domain, spec, x0, a.T, a.h, a.seed)
    rio.write_trajectory_csv(traj, a.out)
    print(
        json.dumps(
            {"points": len(traj), "reflections": traj.reflections, "l_proxy": traj.l_proxy, "out": str(a.out)},
            sort_keys=True,
        )
    )
    return 0


def _hull_regions(hull: AlphaHull) -> int:
    return sum(1 for l in hull.loops if l.regular and l.area > 0)


def cmd_estimate(a) -> int:
    traj = _load_points(a.trajectory, a.columns, a.normalize)
    pts = traj.points
    if a.alpha is not None:
        geom = alpha_hull(pts, a.alpha)
        info = {
            "estimator": "alpha_hull",
            "r": a.alpha,
            "components": _hull_regions(geom),
            "isolated_points": len(geom.isolated_points),
        }
    else:
        geom = sausage(pts, a.sausage)
        info = {"estimator": "sausage", "eps": a.sausage, "components": geom.n_components}
    info.update(
        {
            "n_points": len(pts),
            "area": geom.area,
            "perimeter": perimeter(geom, drop_isolated=True),
            "loops": len(geom.loops),
        }
    )
    if a.svg:
        rio.export_svg([traj, geom], path=a.svg)
        info["svg"] = str(a.svg)
    if a.geojson:
        rio.export_geojson(geom, a.geojson)
        info["geojson"] = str(a.geojson)
    _emit_json(info, a.json)
    return 0


def cmd_tune(a) -> int:
    traj = _load_points(a.trajectory, a.columns, a.normalize)
    rep = tune(traj.points, delta=a.delta, seed=a.seed, hull_sample=a.hull_sample)
    out = rep.as_dict()
    out["n_points"] = len(traj.points)
    _emit_json(out, a.json)
    return 0


def _build(spec: str, pts):
    """``points``, ``sausage:EPS`` or ``alpha:R``."""
    kind, _, val = spec.partition(":")
    if kind == "points":
        return pts
    try:
        v = float(val)
    except ValueError:
        raise UsageError(f"--estimator: cannot read a radius from {spec!r}") from None
    if kind == "sausage":
        return sausage(pts, v)
    if kind == "alpha":
        return alpha_hull(pts, v)
    raise UsageError(f"--estimator: unknown kind {kind!r} (points, sausage:EPS, alpha:R)")


def cmd_metrics(a) -> int:
    pa = _load_points(a.a, a.columns, a.normalize).points
    out = {"n_points_a": len(pa)}
    if len(pa) >= 2:
        out["mst_max_edge"] = euclidean_mst(pa).max_length
        out["eps_conn"] = 0.5 * out["mst_max_edge"]
    est_a = _build(a.estimator, pa)
    like = None
    if a.b:
        pb = _load_points(a.b, a.columns, a.normalize).points
        out["n_points_b"] = len(pb)
        out["d_H_points"] = hausdorff_points(pa, pb)
        if a.cell:
            est_b = _build(a.estimator, pb)
            both = np.vstack([pa, pb])
            pad = max(_radius(a.estimator), 0.0) + 2 * a.cell
            like = GridMask.blank((*both.min(0), *both.max(0)), a.cell, pad)
            out["d_mu"] = dmu_masks(_mask(est_a, like), _mask(est_b, like))
    if a.domain:
        domain = resolve_domain(a.domain)
        out["d_H_domain"] = hausdorff_set_vs_domain(est_a, domain, cell_size=a.cell or 0.005)
        if a.cell and not isinstance(est_a, np.ndarray):
            pad = _radius(a.estimator) + 2 * a.cell
            grid = GridMask.blank(domain.bbox, a.cell, pad)
            d_mu = dmu_masks(est_a.to_mask(grid), grid.evaluate(domain.contains))
            out["d_mu_domain"] = d_mu
            out["d_mu_domain_rel"] = d_mu / domain.area
    _emit_json(out, a.json)
    return 0


def _radius(spec: str) -> float:
    kind, _, val = spec.partition(":")
    return float(val) if kind == "sausage" else 0.0


def _mask(est, like: GridMask) -> GridMask:
    if isinstance(est, np.ndarray):
        i, j = like.cell_index(est)
        bits = np.zeros_like(like.bits)
        ok = (i >= 0) & (i < like.width) & (j >= 0) & (j < like.height)
        bits[j[ok], i[ok]] = True
        return like.with_bits(bits)
    return est.to_mask(like)


def cmd_experiment(a) -> int:
    cfg = ExperimentConfig.from_json(a.config)
    if a.out:
        cfg.report_csv = str(a.out)
    if a.fits:
        cfg.fits_json = str(a.fits)
    if a.workers is not None:
        cfg.workers = a.workers
    if not cfg.report_csv:
        cfg.report_csv = str(Path(a.config).with_suffix(".report.csv"))
    report = run_rate_study(cfg)
    for note in report.notices:
        print(f"notice: {note}", file=sys.stderr)
    summary = {
        "rows": len(report.rows),
        "report_csv": cfg.report_csv,
        "fits": {m: f.as_dict() for m, f in report.fits.items()},
        "config_sha256": report.provenance["config_sha256"],
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_figure(a) -> int:
    files = run_figure(a.recipe, a.seed, a.outdir)
    for f in files:
        print(f)
    return 0


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rbmset", description="Support estimation from reflected diffusion trajectories.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add_input(sp):
        sp.add_argument("--columns", help="t,x,y column names of the CSV")
        sp.add_argument("--normalize", action="store_true", help="map coordinates into the unit square")

    s = sub.add_parser("simulate", help="simulate a reflected diffusion to a trajectory CSV")
    s.add_argument("--domain", default="unit_disk", help="built-in name or domain JSON")
    s.add_argument("--drift", type=float, nargs=2, metavar=("BX", "BY"))
    s.add_argument("--sigma", type=float, help="isotropic diffusion coefficient")
    s.add_argument("--x0", type=float, nargs=2, metavar=("X", "Y"))
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--h", type=float, default=1e-3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="build a hull or sausage from a trajectory CSV")
    s.add_argument("trajectory")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float, metavar="R")
    g.add_argument("--sausage", type=float, metavar="EPS")
    s.add_argument("--json")
    s.add_argument("--svg")
    s.add_argument("--geojson")
    add_input(s)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("tune", help="data-driven eps and r")
    s.add_argument("trajectory")
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hull-sample", type=int, default=200)
    s.add_argument("--json")
    add_input(s)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("metrics", help="distances between point sets, estimators and domains")
    s.add_argument("a")
    s.add_argument("b", nargs="?")
    s.add_argument("--domain")
    s.add_argument("--estimator", default="points", help="points, sausage:EPS or alpha:R")
    s.add_argument("--cell", type=float)
    s.add_argument("--json")
    add_input(s)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("experiment", help="run a rate study from a JSON config")
    s.add_argument("config")
    s.add_argument("--out")
    s.add_argument("--fits")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("figure", help="regenerate a simulation figure")
    s.add_argument("recipe", choices=RECIPES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--outdir", default=".")
    s.set_defaults(func=cmd_figure)
    return p


def _check_ranges(a):
    for flag in ("alpha", "sausage", "T", "h", "cell"):
        v = getattr(a, flag, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{flag}: must be positive, got {v}")
    if getattr(a, "delta", None) is not None and not 0 <= a.delta < 1:
        raise UsageError(f"--delta: must lie in [0, 1), got {a.delta}")


def _unknown_flags(parser, argv) -> list[str]:
    """Option tokens that the chosen subcommand does not define."""
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    cmd = next((t for t in argv if t in sub.choices), None)
    if cmd is None:
        return []
    known = set(sub.choices[cmd]._option_string_actions)
    flags = [t.split("=", 1)[0] for t in argv[argv.index(cmd) + 1 :] if t.startswith("--")]
    return [f for f in flags if f not in known]


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        unknown = _unknown_flags(parser, argv)
        if unknown:
            raise UsageError(f"unrecognized argument: {unknown[0]}")
        args = parser.parse_args(argv)
        _check_ranges(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (RbmSetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
