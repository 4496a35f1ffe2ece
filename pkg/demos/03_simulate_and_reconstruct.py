"""Simulate shot-noise-limited measurements and reconstruct the state.

Run: python3 demos/03_simulate_and_reconstruct.py
"""
import numpy as np

from spintomo.measurement import error_scales
from spintomo.optimize import random_axes
from spintomo.reconstruct import (
    estimate_polarization,
    mle_project,
    random_density_matrix,
    reconstruct_state,
    simulate_measurements,
)

d = 4
rho = random_density_matrix(d, rng=7, rank=1)
design = error_scales(random_axes(d, 3 * d, seed=3))

for n in (30, 300, 3000, 30000):
    record = simulate_measurements(rho, design.axis_set, n, seed=n)
    raw = reconstruct_state(design, estimate_polarization(record))
    mle = mle_project(raw)
    print(
        f"n={n:6d}  min eig(raw)={raw.eigenvalues().min():+.4f}  "
        f"|raw - rho|={np.linalg.norm(raw.matrix - rho.matrix):.4f}  "
        f"|mle - rho|={np.linalg.norm(mle.matrix - rho.matrix):.4f}"
    )
