"""How much do extra axes help?  Random search for the best axis sets with
2d - 1 + p axes, scored by the measurement-adjusted scale eps_V * sqrt(|V|).

Run: python3 demos/05_beta_sweep.py        (about 10 s)
"""
from spintomo.optimize import SearchConfig, beta_sweep

for d in (3, 4, 5):
    result = beta_sweep(d, 2 * d, SearchConfig(d, 2 * d - 1, candidates=1000, seed=0))
    b = result.beta_tilde
    print(f"d={d}: " + " ".join(f"{x:.3f}" for x in b))
    print(f"      b(d)/b(0) = {b[d] / b[0]:.3f}   b(2d)/b(d) = {b[2 * d] / b[d]:.3f}")
