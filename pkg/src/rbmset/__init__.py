"""Set estimation from reflected diffusion trajectories.

Simulate reflected Brownian motion (or a reflected diffusion) in a planar
domain, then estimate the domain from the trajectory with the r-convex hull
or the union of disks around the visited points, and measure how close the
estimates are.
"""

from __future__ import annotations

from .domains import (
    CrookedEggMinusDisk,
    Disk,
    Domain,
    GridMask,
    ImplicitGrid,
    Polygon,
    Rectangle,
    builtin,
    contains,
    from_descriptor,
    project_to_closure,
    rasterize,
    resolve_domain,
    rolling_diagnostic,
)
from .errors import RbmSetError
from .estimators import AlphaHull, UnionOfBalls, alpha_hull, alpha_hull_oracle, is_connected, perimeter, sausage
from .experiments import ExperimentConfig, ExperimentReport, run_figure, run_rate_study
from .geometry import Arc, Triangulation, delaunay, euclidean_mst, incircle, nn_distances, orient2d
from .io import export_geojson, export_svg, read_track_csv, read_trajectory_csv, truncate, write_trajectory_csv
from .metrics import (
    RateFit,
    dmu_masks,
    fit_rate,
    hausdorff_points,
    hausdorff_set_vs_domain,
    minkowski_content,
    parallel_set_mask,
)
from .simulate import DiffusionSpec, OccupancyHistogram, Trajectory, decimate, occupancy, simulate
from .tuning import TuningReport, eps_connectivity, eps_split, select_r, tune

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "AlphaHull",
    "CrookedEggMinusDisk",
    "DiffusionSpec",
    "Disk",
    "Domain",
    "ExperimentConfig",
    "ExperimentReport",
    "GridMask",
    "ImplicitGrid",
    "OccupancyHistogram",
    "Polygon",
    "RateFit",
    "RbmSetError",
    "Rectangle",
    "Trajectory",
    "Triangulation",
    "TuningReport",
    "UnionOfBalls",
    "alpha_hull",
    "alpha_hull_oracle",
    "builtin",
    "contains",
    "decimate",
    "delaunay",
    "dmu_masks",
    "eps_connectivity",
    "eps_split",
    "euclidean_mst",
    "export_geojson",
    "export_svg",
    "fit_rate",
    "from_descriptor",
    "hausdorff_points",
    "hausdorff_set_vs_domain",
    "incircle",
    "is_connected",
    "minkowski_content",
    "nn_distances",
    "occupancy",
    "orient2d",
    "parallel_set_mask",
    "perimeter",
    "project_to_closure",
    "rasterize",
    "read_track_csv",
    "read_trajectory_csv",
    "resolve_domain",
    "rolling_diagnostic",
    "run_figure",
    "run_rate_study",
    "sausage",
    "select_r",
    "simulate",
    "truncate",
    "tune",
    "write_trajectory_csv",
]
