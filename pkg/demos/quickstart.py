"""Simulate a reflected Brownian path in the unit disk and estimate the disk.

Run with ``python demos/quickstart.py [outdir]``.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from rbmset import Disk, alpha_hull, export_svg, hausdorff_set_vs_domain, perimeter, sausage, simulate

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

disk = Disk()
traj = simulate(disk, None, (0.0, 0.0), T=8.0, h=1e-3, seed=0)
print(f"{traj.n_steps} steps, {len(traj.points)} points")

hull = alpha_hull(traj.points, 0.1)
u = sausage(traj.points, 0.04)
print(f"hull: area {hull.area:.4f} (disk {np.pi:.4f}), perimeter {perimeter(hull):.4f} (disk {2 * np.pi:.4f})")
print(f"sausage: area {u.area:.4f}, connected components {u.n_components}")
print(f"d_H(trajectory, disk) = {hausdorff_set_vs_domain(traj.points, disk, 2000, 0.01):.4f}")

export_svg([disk, u, hull, traj], path=out / "quickstart.svg")
print(f"wrote {out / 'quickstart.svg'}")
