"""Seeded Monte Carlo rate studies and figure recipes.

A rate study simulates one trajectory per replicate (seed ``base_seed + i``)
up to the largest duration and reads the shorter durations off its prefix;
because all Gaussian increments are drawn in one block, the prefix is
bit-identical to a separate run of that duration.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io as rio
from .domains import Domain, GridMask, rasterize, resolve_domain
from .errors import DegenerateDesign, IoError
from .estimators import alpha_hull, perimeter, sausage
from .metrics import dmu_masks, fit_rate, hausdorff_set_vs_domain
from .simulate import DiffusionSpec, Trajectory, decimate, n_steps_for, occupancy, simulate
from .tuning import eps_connectivity, eps_split

REPORT_HEADER = ("T", "replicate", "seed", "metric", "value", "estimator", "param")
METRICS = ("d_H", "d_mu", "perimeter")
EPS_RULES = ("fixed", "rate", "split", "connectivity")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a rate study.

    ``estimator`` is one of::

        {"kind": "trajectory"}
        {"kind": "alpha_hull", "r": 0.1}
        {"kind": "sausage", "eps_rule": "fixed", "eps": 0.04}
        {"kind": "sausage", "eps_rule": "rate", "c": 0.1}
        {"kind": "sausage", "eps_rule": "split", "delta": 0.05}
        {"kind": "sausage", "eps_rule": "connectivity"}
    """

    domain: object = "unit_disk"
    diffusion: dict = field(default_factory=lambda: {"kind": "rbm"})
    T_grid: list = field(default_factory=lambda: [2.0 ** k for k in range(1, 9)])
    h: float = 1e-3
    replications: int = 20
    base_seed: int = 0
    estimator: dict = field(default_factory=lambda: {"kind": "trajectory"})
    metrics: list = field(default_factory=lambda: ["d_H"])
    cell_size: float = 0.005
    boundary_samples: int = 4000
    rate_model: str = "log2_corrected"
    x0: list | None = None
    workers: int = 1
    report_csv: str | None = None
    fits_json: str | None = None

    def __post_init__(self):
        self.T_grid = [float(t) for t in self.T_grid]
        self.metrics = list(self.metrics)
        self.validate()

    def validate(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.T_grid:
            raise ValueError("T_grid must not be empty")
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise ValueError("T_grid must be strictly ascending")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if not self.h > 0:
            raise ValueError("h must be positive")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}; choose from {list(METRICS)}")
        kind = self.estimator.get("kind")
        if kind not in ("trajectory", "alpha_hull", "sausage"):
            raise ValueError(f"unknown estimator kind {kind!r}")
        if kind == "sausage" and self.estimator.get("eps_rule", "fixed") not in EPS_RULES:
            raise ValueError(f"unknown eps_rule; choose from {list(EPS_RULES)}")
        if kind == "trajectory" and "perimeter" in self.metrics:
            raise ValueError("a trajectory has no perimeter")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        outputs = d.pop("outputs", {}) or {}
        d.setdefault("report_csv", outputs.get("report_csv"))
        d.setdefault("fits_json", outputs.get("fits_json"))
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        cfg = cls.from_dict(json.loads(path.read_text()))
        # relative domain files and outputs are resolved against the config
        if isinstance(cfg.domain, str) and cfg.domain.endswith(".json") and not Path(cfg.domain).is_absolute():
            cfg.domain = str(path.parent / cfg.domain)
        return cfg

    def as_dict(self) -> dict:
        return asdict(self)

    def sha256(self) -> str:
        """Hash of the fields that determine the numbers (not paths or workers)."""
        d = self.as_dict()
        for k in ("report_csv", "fits_json", "workers"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()


def interior_point(domain: Domain) -> tuple[float, float]:
    """Deterministic start point: the centre of the raster cell that lies
    deepest inside the domain."""
    b = domain.bbox
    mask = rasterize(domain, min(b[2] - b[0], b[3] - b[1]) / 64)
    c = mask.cell_centers(only_set=True)
    d = -domain.signed_distance(c)
    k = int(np.argmax(d))
    return float(c[k, 0]), float(c[k, 1])


# ---------------------------------------------------------------------------
# one replicate
# ---------------------------------------------------------------------------


def sausage_radius(rule: dict, points: np.ndarray, T: float, seed: int) -> float:
    kind = rule.get("eps_rule", "fixed")
    if kind == "fixed":
        return float(rule["eps"])
    if kind == "rate":
        if T <= 1:
            raise DegenerateDesign("the rate rule needs T > 1")
        return float(rule.get("c", 1.0)) * math.sqrt(math.log(T) ** 2 / T)
    if kind == "split":
        return eps_split(points, rule.get("delta", 0.05), seed)[0]
    if kind == "connectivity":
        return eps_connectivity(points)
    raise ValueError(f"unknown eps_rule {kind!r}")


def build_estimator(est: dict, points: np.ndarray, T: float, seed: int):
    """``(estimator object, name, parameter)`` for one trajectory prefix."""
    kind = est.get("kind")
    if kind == "trajectory":
        return points, "trajectory", float("nan")
    if kind == "alpha_hull":
        r = float(est["r"])
        return alpha_hull(points, r), "alpha_hull", r
    eps = sausage_radius(est, points, T, seed)
    return sausage(points, eps), f"sausage[{est.get('eps_rule', 'fixed')}]", eps


def _evaluate(cfg: ExperimentConfig, domain: Domain, obj, param: float, metric: str) -> float:
    if metric == "d_H":
        return hausdorff_set_vs_domain(obj, domain, cfg.boundary_samples, cfg.cell_size)
    if metric == "perimeter":
        return perimeter(obj, drop_isolated=True)
    # symmetric difference on a grid wide enough for the estimator
    pad = (param if math.isfinite(param) else 0.0) + 2 * cfg.cell_size
    like = GridMask.blank(domain.bbox, cfg.cell_size, pad)
    ref = like.evaluate(domain.contains)
    if isinstance(obj, np.ndarray):
        est_mask = like.with_bits(np.zeros_like(like.bits))
    else:
        est_mask = obj.to_mask(like)
    return dmu_masks(est_mask, ref)


def _replicate(args) -> list[tuple]:
    cfg_dict, i = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    domain = resolve_domain(cfg.domain)
    spec = DiffusionSpec.from_dict(cfg.diffusion)
    x0 = tuple(cfg.x0) if cfg.x0 is not None else interior_point(domain)
    seed = cfg.base_seed + i
    full = simulate(domain, spec, x0, cfg.T_grid[-1], cfg.h, seed)
    rows = []
    for T in cfg.T_grid:
        pts = full.points[: n_steps_for(T, cfg.h) + 1]
        obj, name, param = build_estimator(cfg.estimator, pts, T, seed)
        for metric in cfg.metrics:
            rows.append((T, i, seed, metric, _evaluate(cfg, domain, obj, param, metric), name, param))
    return rows


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else rio.FLOAT_FMT % v
    return str(v)


@dataclass
class ExperimentReport:
    rows: list
    fits: dict
    notices: list
    summary: dict
    provenance: dict

    def csv_text(self) -> str:
        lines = [",".join(REPORT_HEADER)]
        lines += [",".join(_cell(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        _write(path, self.csv_text())

    def fits_dict(self) -> dict:
        return {
            "fits": {m: f.as_dict() for m, f in self.fits.items()},
            "notices": list(self.notices),
            "summary": self.summary,
            "provenance": self.provenance,
        }

    def write_fits(self, path) -> None:
        _write(path, json.dumps(self.fits_dict(), indent=2, sort_keys=True) + "\n")

    def values(self, metric: str, T: float | None = None) -> np.ndarray:
        return np.array([r[4] for r in self.rows if r[3] == metric and (T is None or r[0] == T)])


def _write(path, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _summarise(rows, T_grid, metrics) -> dict:
    out = {}
    for m in metrics:
        per_t = {}
        for T in T_grid:
            v = np.array([r[4] for r in rows if r[3] == m and r[0] == T])
            if len(v):
                per_t[rio.FLOAT_FMT % T] = {
                    "mean": float(v.mean()),
                    "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0,
                    "min": float(v.min()),
                    "max": float(v.max()),
                }
        out[m] = per_t
    return out


def _fits(rows, cfg: ExperimentConfig):
    fits, notices = {}, []
    if len(cfg.T_grid) < 3:
        notices.append(f"rate fits omitted: {len(cfg.T_grid)} T value(s), at least 3 are needed")
        return fits, notices
    for m in cfg.metrics:
        samples = [(r[0], r[4]) for r in rows if r[3] == m]
        try:
            fits[m] = fit_rate(samples, cfg.rate_model)
        except DegenerateDesign as exc:
            notices.append(f"rate fit for {m} omitted: {exc}")
    return fits, notices


def run_rate_study(config: ExperimentConfig | dict, write: bool = True) -> ExperimentReport:
    """Run every ``(T, replicate)`` cell of the study and fit the rates.

    Rows are ordered by ``(T, replicate, metric)`` regardless of worker
    completion order.  If a replicate fails, the rows gathered so far are
    written before the error propagates.
    """
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_dict(config)
    cfg_dict = cfg.as_dict()
    jobs = [(cfg_dict, i) for i in range(cfg.replications)]
    per_rep: dict[int, list] = {}
    try:
        if cfg.workers > 1 and cfg.replications > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for i, rows in zip(range(cfg.replications), pool.map(_replicate, jobs)):
                    per_rep[i] = rows
        else:
            for job in jobs:
                per_rep[job[1]] = _replicate(job)
    except BaseException:
        if write and cfg.report_csv:
            partial = _order([r for rows in per_rep.values() for r in rows], cfg)
            _write(cfg.report_csv, ExperimentReport(partial, {}, [], {}, {}).csv_text())
        raise
    rows = _order([r for rows in per_rep.values() for r in rows], cfg)
    fits, notices = _fits(rows, cfg)
    provenance = {
        "config_sha256": cfg.sha256(),
        "seeds": [cfg.base_seed + i for i in range(cfg.replications)],
        "cell_size": cfg.cell_size,
        "boundary_samples": cfg.boundary_samples,
        "rate_model": cfg.rate_model,
    }
    report = ExperimentReport(rows, fits, notices, _summarise(rows, cfg.T_grid, cfg.metrics), provenance)
    if write and cfg.report_csv:
        report.write_csv(cfg.report_csv)
    if write and cfg.fits_json:
        report.write_fits(cfg.fits_json)
    return report


def _order(rows, cfg: ExperimentConfig) -> list:
    t_rank = {T: k for k, T in enumerate(cfg.T_grid)}
    m_rank = {m: k for k, m in enumerate(cfg.metrics)}
    return sorted(rows, key=lambda r: (t_rank[r[0]], r[1], m_rank[r[3]]))


# ---------------------------------------------------------------------------
# figure recipes
# ---------------------------------------------------------------------------

RECIPES = ("rbm2", "rbm3", "stationary", "drift_demo")


def _csv_table(header, rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(_cell(v) for v in r) + "\n" for r in rows)


def _egg_run(seed: int, n_points: int = 10000, h: float = 1e-3) -> tuple[Domain, Trajectory]:
    domain = resolve_domain("crooked_egg")
    traj = simulate(domain, None, interior_point(domain), (n_points - 1) * h, h, seed)
    return domain, traj


def _figure_rbm2(seed, outdir: Path) -> list[Path]:
    domain, traj = _egg_run(seed)
    eps = 0.04
    like = GridMask.blank(domain.bbox, 0.002, eps + 0.004)
    ref = like.evaluate(domain.contains)
    files, rows = [], []
    for n in (1000, 5000, 10000):
        part = traj.head(n)
        u = sausage(part.points, eps)
        p = outdir / f"rbm2_N{n}.svg"
        rio.export_svg([domain, part, u], path=p)
        files.append(p)
        d_mu = dmu_masks(u.to_mask(like), ref)
        d_h = hausdorff_set_vs_domain(u, domain)
        rows.append((n, eps, u.area, u.n_components, u.n_loops, d_h, d_mu, d_mu / domain.area))
    p = outdir / "rbm2_metrics.csv"
    _write(p, _csv_table(("N", "eps", "area", "components", "loops", "d_H", "d_mu", "d_mu_rel"), rows))
    return files + [p]


def _figure_rbm3(seed, outdir: Path) -> list[Path]:
    domain, traj = _egg_run(seed)
    r = 0.1
    files, rows = [], []
    for keep in (1, 5, 20):
        part = decimate(traj, keep)
        hull = alpha_hull(part.points, r)
        p = outdir / f"rbm3_N{len(part)}.svg"
        rio.export_svg([domain, part, hull], path=p)
        files.append(p)
        rows.append((len(part), r, hull.area, hull.perimeter(), len(hull.isolated_points)))
    p = outdir / "rbm3_metrics.csv"
    _write(p, _csv_table(("N", "r", "area", "perimeter", "isolated"), rows))
    return files + [p]


def _occupancy_figure(name, spec, seed, outdir: Path) -> list[Path]:
    domain = resolve_domain("unit_square")
    traj = simulate(domain, spec, (0.5, 0.5), 1000.0, 1e-3, seed)
    hist = occupancy(traj, domain, 0.1, burn_in=100_000)
    svg = outdir / f"{name}.svg"
    _write(svg, rio.render_heatmap_svg(hist.mask, hist.counts))
    rows = []
    for j in range(hist.mask.height):
        for i in range(hist.mask.width):
            cx = hist.mask.origin[0] + (i + 0.5) * hist.mask.cell_size
            cy = hist.mask.origin[1] + (j + 0.5) * hist.mask.cell_size
            rows.append((cx, cy, int(hist.counts[j, i])))
    csv_path = outdir / f"{name}_occupancy.csv"
    _write(csv_path, _csv_table(("x", "y", "count"), rows))
    return [svg, csv_path]


def run_figure(recipe: str, seed: int = 0, outdir=".") -> list[Path]:
    """Regenerate one figure recipe; returns the files written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if recipe == "rbm2":
        return _figure_rbm2(seed, outdir)
    if recipe == "rbm3":
        return _figure_rbm3(seed, outdir)
    if recipe == "stationary":
        return _occupancy_figure("stationary", DiffusionSpec.rbm(), seed, outdir)
    if recipe == "drift_demo":
        return _occupancy_figure("drift_demo", DiffusionSpec.constant((0.5, 0.0), 1.0), seed, outdir)
    raise ValueError(f"unknown recipe {recipe!r}; choose from {list(RECIPES)}")
