"""Pick the disk radius and the hull radius from the data alone."""

from __future__ import annotations

import numpy as np

from rbmset import Rectangle, alpha_hull, sausage, simulate, tune

sq = Rectangle()
pts = simulate(sq, None, (0.5, 0.5), T=10.0, h=1e-3, seed=3).points

rep = tune(pts, delta=0.05, seed=0, r_grid=np.geomspace(0.02, 1.0, 12))
print(f"eps_conn  = {rep.eps_conn:.5f}  (smallest radius giving a connected union)")
print(f"eps_split = {rep.eps_split:.5f}  (max split-half gap), quantile {rep.eps_split_quantile:.5f}")
for r, d in rep.matching_distances:
    print(f"  r = {r:.4f}  hull vs sausage distance {d:.4f}")
print(f"r_hat = {rep.r_hat:.4f}")

u = sausage(pts, rep.eps_split)
hull = alpha_hull(pts, rep.r_hat)
print(f"sausage area {u.area:.4f}, hull area {hull.area:.4f}, square area 1")
