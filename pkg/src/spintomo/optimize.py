"""Choosing measurement axes: random search, simplex refinement and the
single-angle family of 2d-1 axes on a cone.

Every candidate set is generated from its own seed stream keyed by
``(seed, p, candidate index)``, and winners are picked by ``(score, index)``,
so serial and threaded runs return identical results.
"""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .measurement import AxisSet, quantum_scale_of_angles
from .polarization import QuditDim, _as_dim

__all__ = [
    "SearchConfig",
    "BetaSweepResult",
    "ThetaScan",
    "OptimizationTrace",
    "random_axes",
    "optimize_axes",
    "beta_sweep",
    "random_search",
    "newton_young_axes",
    "theta_scan",
    "fit_theta_opt",
    "thread_count",
]

log = logging.getLogger(__name__)


def thread_count() -> int:
    """Worker threads for candidate evaluation.

    ``SPINTOMO_THREADS`` sets the count explicitly; otherwise one per CPU.
    """
    env = os.environ.get("SPINTOMO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer SPINTOMO_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SearchConfig:
    dim: QuditDim
    axis_count: int
    candidates: int = 1000
    local_iters: int = 0
    seed: int = 0
    time_budget: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "dim", _as_dim(self.dim))
        if self.candidates < 1:
            raise ValueError("need at least one candidate")


def _angles_from_unit_square(a, b):
    return 2 * np.pi * a, np.arccos(1 - 2 * b)


def _stream(*key) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def random_axes(dim, r: int, seed) -> AxisSet:
    """``r`` axes drawn uniformly on the sphere."""
    if r < 1:
        raise ValueError("need at least one axis")
    rng = np.random.default_rng(seed)
    a, b = rng.random((2, r))
    return AxisSet.from_angles(dim, *_angles_from_unit_square(a, b))


def _random_angles(seed, p, index, r):
    a, b = _stream(seed, p, index).random((2, r))
    return _angles_from_unit_square(a, b)


@dataclass
class OptimizationTrace:
    """Best ``epsilon_V`` after each simplex iteration."""

    values: list = field(default_factory=list)


def optimize_axes(initial: AxisSet, config: SearchConfig | None = None, trace: OptimizationTrace | None = None) -> AxisSet:
    """Locally minimize ``epsilon_V`` over the 2r axis angles with Nelder-Mead.

    Angles are unconstrained during the search (any real pair still names a
    point on the sphere) and canonicalized on return.  Rank-deficient
    candidates score +inf.  Returns ``initial`` unless strictly improved.
    """
    dim = initial.dim
    iters = config.local_iters if config and config.local_iters else 200 * len(initial)
    r = len(initial)

    def score(x):
        return quantum_scale_of_angles(dim, x[:r], x[r:])

    x0 = np.concatenate([initial.alpha, initial.beta])
    best = {"x": x0, "f": score(x0)}
    trace = trace if trace is not None else OptimizationTrace()
    trace.values.append(best["f"])

    def objective(x):
        f = score(x)
        if f < best["f"]:
            best["x"], best["f"] = np.array(x), f
        return f

    def callback(_):
        trace.values.append(best["f"])

    if not math.isfinite(best["f"]):
        log.info("initial axes are infeasible; simplex starts from an infinite score")
    minimize(
        objective,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={"maxiter": iters, "xatol": 1e-8, "fatol": 1e-12, "adaptive": True},
    )
    if best["f"] < trace.values[0]:
        return AxisSet.from_angles(dim, best["x"][:r], best["x"][r:])
    return initial


@dataclass(frozen=True)
class BetaSweepResult:
    dim: QuditDim
    p_values: tuple
    beta_tilde: tuple
    best_axes: tuple
    evaluated: tuple

    def axis_counts(self) -> list[int]:
        return [2 * self.dim.d - 1 + p for p in self.p_values]


def _evaluate(dim, sets, threads):
    def one(angles):
        return quantum_scale_of_angles(dim, *angles)

    if threads > 1 and len(sets) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, sets))
    return [one(s) for s in sets]


def _search_pool(dim, r, config, p, previous, threads, share):
    start = time.monotonic()
    chunk = 64
    best_score, best_index, best_angles = math.inf, -1, None
    index = 0
    while index < config.candidates:
        batch = []
        for i in range(index, min(index + chunk, config.candidates)):
            if i == 0 and previous is not None:
                a, b = _random_angles(config.seed, p, i, r - len(previous[0]))
                batch.append((np.append(previous[0], a), np.append(previous[1], b)))
            else:
                batch.append(_random_angles(config.seed, p, i, r))
        for offset, score in enumerate(_evaluate(dim, batch, threads)):
            if best_index < 0 or (score, index + offset) < (best_score, best_index):
                best_score, best_index, best_angles = score, index + offset, batch[offset]
        index += len(batch)
        if share is not None and time.monotonic() - start > share:
            log.info("r=%d: time share exhausted after %d candidates", r, index)
            break
    axes = AxisSet.from_angles(dim, *best_angles)
    if config.local_iters:
        axes = optimize_axes(axes, config)
        best_score = quantum_scale_of_angles(dim, axes.alpha, axes.beta)
    return axes, best_score, index


def random_search(config: SearchConfig, threads: int | None = None) -> tuple[AxisSet, float]:
    """Best of ``config.candidates`` uniform sets of ``config.axis_count`` axes,
    optionally polished with the simplex (``config.local_iters > 0``)."""
    axes, score, _ = _search_pool(
        config.dim, config.axis_count, config, 0, None, threads or thread_count(), config.time_budget
    )
    return axes, score


def beta_sweep(dim, p_max: int, config: SearchConfig, threads: int | None = None) -> BetaSweepResult:
    """Empirical measurement-adjusted error scale for ``p = 0 .. p_max`` extra axes.

    For each ``p`` the pool holds the previous winner extended by one random
    axis (candidate 0) plus ``candidates - 1`` fresh uniform sets; the
    reported value is ``min epsilon_V * sqrt(|V|)`` over the pool, after an
    optional simplex polish of the winner (``config.local_iters > 0``).
    With a time budget each ``p`` gets an equal share and keeps the best
    set found when its share runs out.
    """
    dim = _as_dim(dim)
    if p_max < 0:
        raise ValueError("p_max must be nonnegative")
    threads = threads or thread_count()
    share = None if config.time_budget is None else config.time_budget / (p_max + 1)
    betas, winners, evaluated = [], [], []
    previous = None
    for p in range(p_max + 1):
        r = 2 * dim.d - 1 + p
        axes, score, count = _search_pool(dim, r, config, p, previous, threads, share)
        previous = (axes.alpha, axes.beta)
        betas.append(score * math.sqrt(r))
        winners.append(axes)
        evaluated.append(count)
    return BetaSweepResult(dim, tuple(range(p_max + 1)), tuple(betas), tuple(winners), tuple(evaluated))


def newton_young_axes(dim, theta: float, offset: float = 0.0) -> AxisSet:
    """``2d - 1`` axes at polar angle ``theta``, equally spaced in azimuth."""
    dim = _as_dim(dim)
    if not 0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    count = 2 * dim.d - 1
    alpha = offset + 2 * np.pi * np.arange(count) / count
    return AxisSet.from_angles(dim, alpha, np.full(count, theta))


def _eps_theta(dim, theta):
    axes = newton_young_axes(dim, theta)
    return quantum_scale_of_angles(dim, axes.alpha, axes.beta)


@dataclass(frozen=True)
class ThetaScan:
    dim: QuditDim
    theta_grid: tuple
    eps_theta: tuple
    theta_opt: float
    eps_opt: float


def theta_scan(dim, grid) -> ThetaScan:
    """``epsilon_theta`` over ``grid`` plus golden-section refinement around the best point."""
    dim = _as_dim(dim)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("theta grid is empty")
    eps = np.array([_eps_theta(dim, th) for th in grid])
    i = int(np.argmin(eps))
    theta_opt, eps_opt = float(grid[i]), float(eps[i])
    if 0 < i < grid.size - 1 and math.isfinite(eps_opt):
        res = minimize_scalar(
            lambda th: _eps_theta(dim, th),
            bracket=(grid[i - 1], grid[i], grid[i + 1]),
            method="golden",
            options={"xtol": 1e-10},
        )
        if res.fun < eps_opt:
            theta_opt, eps_opt = float(res.x), float(res.fun)
    return ThetaScan(dim, tuple(grid), tuple(eps), theta_opt, eps_opt)


def fit_theta_opt(dims, theta_opts) -> float:
    """Least-squares ``x`` in ``theta_opt = (pi/2)(1 - 1/(x d))``.

    The model is linear in ``1/x``, so the fit is closed form.
    """
    dims = np.asarray(dims, dtype=float)
    theta_opts = np.asarray(theta_opts, dtype=float)
    a = np.pi / (2 * dims)
    b = np.pi / 2 - theta_opts
    return float(np.sum(a * a) / np.sum(a * b))
