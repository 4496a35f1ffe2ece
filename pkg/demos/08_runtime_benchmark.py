"""Informational timing of the error-scale evaluation versus dimension.

Numbers depend on hardware; the fitted exponent is a rough guide only.

Run: python3 demos/08_runtime_benchmark.py
"""
import time

import numpy as np

from spintomo.measurement import error_scales
from spintomo.optimize import random_axes

dims = [4, 6, 8, 12, 16, 20, 24, 30]
times = []
for d in dims:
    axes = random_axes(d, 3 * d, seed=d)
    error_scales(axes)  # warm caches
    reps = 5
    start = time.perf_counter()
    for _ in range(reps):
        error_scales(axes)
    times.append((time.perf_counter() - start) / reps)
    print(f"d={d:2d}  r={3 * d:2d}  {times[-1] * 1e3:8.2f} ms")

slope = np.polyfit(np.log(dims[-4:]), np.log(times[-4:]), 1)[0]
print(f"time ~ d^{slope:.2f} over the largest four dimensions")
