"""Best polar angle for a cone of 2d - 1 equally spaced axes.

Run: python3 demos/06_theta_scan.py        (about 4 s)
"""
import numpy as np

from spintomo.optimize import fit_theta_opt, theta_scan

grid = np.linspace(np.pi / 800, np.pi / 2, 400)
dims = list(range(3, 11))
opts = []
for d in dims:
    scan = theta_scan(d, grid)
    opts.append(scan.theta_opt)
    print(f"d={d:2d}  theta_opt={scan.theta_opt:.4f}  eps={scan.eps_opt:.4f}  eps(pi/2)={scan.eps_theta[-1]}")

x = fit_theta_opt(dims, opts)
print(f"theta_opt ~ (pi/2)(1 - 1/(x d)) with x = {x:.3f}")
