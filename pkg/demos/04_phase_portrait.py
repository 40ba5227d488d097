"""
Phase portrait of the exact solution
====================================

Colours the upper half-plane by the phase of U and writes a binary PPM.
Poles (phase winding -1) are marked white and zeros (+1) black.
"""

import sys

from transpole import PrecisionConfig
from transpole.compare import phase_image
from transpole.oracle import build_linear_solution, phase_grid

out = sys.argv[1] if len(sys.argv) > 1 else "phase.ppm"
sol = build_linear_solution(1, PrecisionConfig(256))

# a coarse grid keeps the run short; raise the resolution for a smoother picture
grid = phase_grid(sol, (-8.0, 8.0, 0.0, 8.0), (121, 61))
pts = grid.winding_points()
print(f"{sum(w < 0 for _, _, w in pts)} poles and {sum(w > 0 for _, _, w in pts)} zeros in the window")

with open(out, "wb") as fh:
    fh.write(phase_image(grid, [(complex(x, y), "pole" if w < 0 else "zero") for x, y, w in pts]))
print(f"wrote {out}")
