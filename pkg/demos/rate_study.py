"""A small Hausdorff rate study in the unit disk.

Uses fewer durations and replicates than the acceptance run so it finishes
in seconds.
"""

from __future__ import annotations

from rbmset import ExperimentConfig, run_rate_study

cfg = ExperimentConfig(
    domain="unit_disk",
    T_grid=[16.0, 32.0, 64.0, 128.0],
    h=1e-3,
    replications=5,
    metrics=["d_H"],
    cell_size=0.01,
    rate_model="log2_corrected",
)
rep = run_rate_study(cfg, write=False)
for T, stats in rep.summary["d_H"].items():
    print(f"T = {T:>6}  mean d_H = {stats['mean']:.4f}")
fit = rep.fits["d_H"]
print(f"slope {fit.slope:.3f}, r^2 {fit.r_squared:.3f}")
