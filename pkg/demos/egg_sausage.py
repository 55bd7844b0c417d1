"""Sausage estimates of the crooked egg with a hole at three sample sizes.

Writes the same SVG panels and metrics table as ``rbmset figure rbm2``.
"""

from __future__ import annotations

import sys
from pathlib import Path

from rbmset import run_figure

out = Path(sys.argv[1] if len(sys.argv) > 1 else "egg_figures")
for f in run_figure("rbm2", seed=0, outdir=out):
    print(f)
print((out / "rbm2_metrics.csv").read_text())
