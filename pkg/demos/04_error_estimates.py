"""Exact shot-noise error, its a priori bound, a posteriori estimates and
the worst-case trace-one operator.

Run: python3 demos/04_error_estimates.py
"""
import math
import warnings

from spintomo.measurement import error_scales
from spintomo.optimize import random_axes
from spintomo.reconstruct import (
    estimate_polarization,
    exact_error,
    mle_project,
    random_density_matrix,
    reconstruct_state,
    sigma_star,
    simulate_measurements,
    simulate_squared_errors,
)

d, n = 5, 2000
design = error_scales(random_axes(d, 3 * d, seed=11))
rho = random_density_matrix(d, rng=2)

exact = exact_error(design, rho, n)
print(f"E_V(rho)          = {exact:.5f}")
print(f"bound eps_V/sqrt n = {design.quantum_scale / math.sqrt(n):.5f}")

mc = simulate_squared_errors(design, rho, n, 10 ** 4, seed=1)
print(f"Monte Carlo RMS    = {math.sqrt(mc.mean()):.5f}")

record = simulate_measurements(rho, design.axis_set, n, seed=5)
raw = reconstruct_state(design, estimate_polarization(record))
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    print(f"a posteriori, raw  = {exact_error(design, raw, n):.5f}")
print(f"a posteriori, MLE  = {exact_error(design, mle_project(raw), n):.5f}")

star, e_star = sigma_star(design, n)
print(f"max over trace-one Hermitian operators = {e_star:.5f} (min eigenvalue {star.eigenvalues().min():+.3f})")
