"""A lower bound on eps_V * sqrt(|V|) that no axis set can beat.

Every row of a block M_l has unit norm (sum_m |D^l_0m(v)|^2 = 1), so
||M_l||_F^2 = r.  With k = 2l + 1 singular values,
Cauchy-Schwarz gives sum_k sigma_k^-2 >= k^2 / sum_k sigma_k^2 = k^2 / r, hence

    eps_V^2 |V| >= sum_l Gamma_l^2 (2l + 1)^2,

with equality only when every block is a tight frame.  The best cone of
2d - 1 axes is an upper bound on the optimum at p = 0, so floor / cone is a
lower bound on how far any number of extra axes can push the ratio
beta(p) / beta(0).

Run: python3 demos/07_tight_frame_bound.py
"""
import math

import numpy as np

from spintomo.optimize import theta_scan
from spintomo.polarization import gamma_table

grid = np.linspace(0.05, np.pi / 2, 300)
for d in range(3, 7):
    g = gamma_table(d).gamma
    floor = math.sqrt(sum(g[l] ** 2 * (2 * l + 1) ** 2 for l in range(d)))
    cone = theta_scan(d, grid).eps_opt * math.sqrt(2 * d - 1)
    print(f"d={d}: floor {floor:.3f}   best cone (2d-1 axes) {cone:.3f}   beta(p)/beta(0) >= {floor / cone:.3f}")
