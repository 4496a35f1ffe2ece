"""Which axis sets are informative, and how good are they?

Run: python3 demos/02_error_scales.py
"""
import numpy as np

from spintomo.measurement import AxisSet, error_scales
from spintomo.optimize import newton_young_axes, random_axes

d = 4

# %% Fewer than 2d - 1 axes can never recover every degree.
for r in (2 * d - 2, 2 * d - 1, 3 * d):
    design = error_scales(random_axes(d, r, seed=1))
    print(f"r={r:2d} feasible={design.feasible} S_V={design.classical_scale:.3f} eps_V={design.quantum_scale:.3f}")

# %% Axes in one plane lose the top degree however many there are.
flat = AxisSet.from_angles(d, np.linspace(0, 2 * np.pi, 20, endpoint=False), np.full(20, np.pi / 2))
design = error_scales(flat)
print("coplanar: rank per degree", [b.rank for b in design.blocks], "eps_V =", design.quantum_scale)

# %% A cone of 2d - 1 axes works at any polar angle except the equator.
for theta in (0.3, 1.0, 1.3, 1.5):
    print(f"cone at theta={theta}: eps_V = {error_scales(newton_young_axes(d, theta)).quantum_scale:.3f}")
