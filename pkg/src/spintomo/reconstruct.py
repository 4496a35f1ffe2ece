"""Shot-noise simulation, linear state reconstruction and reconstruction error.

Sampling uses numpy's counter-based Philox generator.  A run seed is expanded
with :class:`numpy.random.SeedSequence` and split into one child stream per
axis (child ``i`` drives axis ``i``), so records do not depend on the order
in which axes are simulated.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .measurement import AxisSet, Axis, MeasurementDesign, error_scales
from .polarization import (
    GammaTable,
    PolarizationCoefficients,
    QuditDim,
    _as_dim,
    _split_blocks,
    expand_in_basis,
    gamma_table,
    polarization_operator,
    product_coefficients,
    reconstruct_from_coeffs,
    rotation_operator,
)

__all__ = [
    "DensityMatrix",
    "ReconstructionEstimate",
    "MeasurementRecord",
    "NoiseMatrix",
    "ChiVector",
    "outcome_probabilities",
    "simulate_measurements",
    "estimate_polarization",
    "exact_estimates",
    "reconstruct_state",
    "mle_project",
    "noise_matrix",
    "chi_vector",
    "exact_error",
    "exact_error_squared",
    "error_from_covariances",
    "covariance_matrix",
    "covariance_form_error_squared",
    "sigma_star",
    "noise_weighted_norm_squared",
    "simulate_squared_errors",
    "random_density_matrix",
    "saturating_state",
]

NEGATIVE_TOL = 1e-9


@dataclass(frozen=True)
class ReconstructionEstimate:
    """Hermitian, unit-trace operator that need not be positive."""

    dim: QuditDim
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def coefficients(self) -> PolarizationCoefficients:
        return expand_in_basis(self.matrix)


@dataclass(frozen=True)
class DensityMatrix(ReconstructionEstimate):
    """A physical state: Hermitian, unit trace, no eigenvalue below -1e-10."""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim.d, self.dim.d):
            raise ValueError(f"expected a {self.dim.d}x{self.dim.d} matrix, got {m.shape}")
        if not np.allclose(m, m.conj().T, atol=1e-12, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise ValueError(f"density matrix has trace {np.trace(m).real}")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix has negative eigenvalues")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        return cls(QuditDim(m.shape[0]), m)

    @classmethod
    def maximally_mixed(cls, dim) -> "DensityMatrix":
        dim = _as_dim(dim)
        return cls(dim, np.eye(dim.d, dtype=complex) / dim.d)

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls.from_matrix(np.outer(psi, psi.conj()))


def random_density_matrix(dim, rng=None, rank=None) -> DensityMatrix:
    """Random state from the Ginibre ensemble (Hilbert-Schmidt measure at full rank)."""
    dim = _as_dim(dim)
    rng = np.random.default_rng(rng)
    k = dim.d if rank is None else rank
    g = rng.normal(size=(dim.d, k)) + 1j * rng.normal(size=(dim.d, k))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(dim, rho / np.trace(rho).real)


def saturating_state(dim, ell: int, axis) -> DensityMatrix:
    """Equal mixture of the two projection states along ``axis`` with extreme ``t_l mu``.

    Its single-axis estimate of ``T_l0`` has the largest possible variance,
    ``Gamma_l^2`` per shot.
    """
    dim = _as_dim(dim)
    hi, lo = gamma_table(dim).mu_extremes(ell)
    axis = axis if isinstance(axis, Axis) else Axis(*axis)
    R = rotation_operator(dim.d, axis.alpha, axis.beta)
    m = 0.5 * (np.outer(R[:, hi], R[:, hi].conj()) + np.outer(R[:, lo], R[:, lo].conj()))
    return DensityMatrix(dim, (m + m.conj().T) / 2)


def _matrix_of(rho) -> np.ndarray:
    if isinstance(rho, ReconstructionEstimate):
        return rho.matrix
    if isinstance(rho, PolarizationCoefficients):
        return reconstruct_from_coeffs(rho)
    return np.asarray(rho, dtype=complex)


def _coefficients_of(rho) -> PolarizationCoefficients:
    if isinstance(rho, PolarizationCoefficients):
        return rho
    return expand_in_basis(_matrix_of(rho))


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome counts ``counts[v, i]`` for projection ``mu = s - i`` along axis ``v``."""

    axis_set: AxisSet
    shots: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != (len(self.axis_set), self.axis_set.dim.d):
            raise ValueError(
                f"counts must have shape {(len(self.axis_set), self.axis_set.dim.d)}, got {counts.shape}"
            )
        if np.any(counts < 0) or np.any(counts.sum(axis=1) != self.shots):
            raise ValueError("every row of counts must be nonnegative and sum to the shot number")
        counts = counts.astype(np.int64)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots


def outcome_probabilities(rho, v) -> np.ndarray:
    """Probabilities of each spin projection (basis order) along axis ``v``."""
    m = _matrix_of(rho)
    v = v if isinstance(v, Axis) else Axis(*v)
    R = rotation_operator(m.shape[0], v.alpha, v.beta)
    p = np.einsum("ij,ik,kj->j", R.conj(), m, R).real
    p[p < 0] = 0.0
    return p / p.sum()


def _axis_streams(seed, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def simulate_measurements(rho, axes: AxisSet, n: int, seed) -> MeasurementRecord:
    """Draw ``n`` projective spin measurements along every axis."""
    if n < 1:
        raise ValueError("need at least one shot per axis")
    m = _matrix_of(rho)
    if m.shape[0] != axes.dim.d:
        raise ValueError("state and axis set have different dimensions")
    counts = np.array(
        [
            rng.multinomial(n, outcome_probabilities(m, a))
            for rng, a in zip(_axis_streams(seed, len(axes)), axes)
        ]
    )
    return MeasurementRecord(axes, n, counts)


def estimate_polarization(record: MeasurementRecord, gamma: GammaTable | None = None) -> np.ndarray:
    """Empirical ``T~[v, l] = sum_mu t_{l mu} counts[v, mu] / n``."""
    gamma = gamma or gamma_table(record.axis_set.dim)
    return record.frequencies @ gamma.t.T


def exact_estimates(rho, axes: AxisSet) -> np.ndarray:
    """Noise-free ``<T_{v l 0}>_rho`` as an (r, d) array."""
    t = gamma_table(axes.dim).t
    return np.array([outcome_probabilities(rho, a) for a in axes]) @ t.T


def reconstruct_state(design: MeasurementDesign, estimates) -> ReconstructionEstimate:
    """Linear inversion of per-axis estimates ``estimates[v, l]`` block by block.

    For each degree, ``Q_lk = sum_m W[m, k] T_lm`` are the orthonormal
    operators from the right singular vectors and the coefficient of ``Q_lk``
    is ``u_k^dagger T~_l / sigma_k``.
    """
    design.require_feasible()
    estimates = np.asarray(estimates, dtype=float)
    d = design.dim.d
    blocks = []
    for blk in design.blocks:
        comps = (blk.u.conj().T @ estimates[:, blk.ell]) / blk.singular_values
        blocks.append(blk.vh.conj().T @ comps)
    matrix = reconstruct_from_coeffs(_split_blocks(QuditDim(d), np.concatenate(blocks)))
    matrix = (matrix + matrix.conj().T) / 2
    return ReconstructionEstimate(design.dim, matrix)


def mle_project(est) -> DensityMatrix:
    """Closest physical state in Frobenius norm, by eigenvalue water-filling.

    Eigenvalues are visited from the most negative up; each one that would
    stay negative after sharing the accumulated deficit uniformly with the
    remaining eigenvalues is zeroed and its mass added to the deficit.
    """
    m = _matrix_of(est)
    m = (m + m.conj().T) / 2
    vals, vecs = np.linalg.eigh(m)
    vals = vals / vals.sum()
    if vals[0] >= 0:
        new = vals
    else:
        new = np.zeros_like(vals)
        keep = len(vals)
        deficit = 0.0
        order = np.arange(len(vals))  # eigh returns ascending order
        i = 0
        while i < len(vals) and vals[order[i]] + deficit / (keep - i) < 0:
            deficit += vals[order[i]]
            i += 1
        shift = deficit / (keep - i)
        new[order[i:]] = vals[order[i:]] + shift
    rho = (vecs * new) @ vecs.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(QuditDim(m.shape[0]), rho / np.trace(rho).real)


@dataclass(frozen=True)
class NoiseMatrix:
    ell: int
    matrix: np.ndarray


def _axis_weights(block) -> np.ndarray:
    """``diag[(M^-1)^dagger M^-1]`` for one block."""
    pinv = block.pinv()
    return np.sum(np.abs(pinv) ** 2, axis=0)


def noise_matrix(design: MeasurementDesign, ell: int) -> NoiseMatrix:
    """``N_l = M_l^dagger diag[(M_l^-1)^dagger M_l^-1] M_l``."""
    design.require_feasible()
    blk = design.blocks[ell]
    w = _axis_weights(blk)
    mat = blk.matrix.conj().T @ (w[:, None] * blk.matrix)
    return NoiseMatrix(ell, (mat + mat.conj().T) / 2)


@dataclass(frozen=True)
class ChiVector:
    """``blocks[L]`` holds ``chi_{L M}`` at position ``M + L``."""

    blocks: tuple


def chi_vector(design: MeasurementDesign, noise: list | None = None) -> ChiVector:
    """Linear coefficients of the shot-noise error in the state components.

    ``chi_{LM} = sum_l sum_{m'-m=M} (-1)^m N_l[m', m] f^{LM}_{l,-m; l,m'}``.
    """
    design.require_feasible()
    d = design.dim.d
    noise = noise or [noise_matrix(design, ell).matrix for ell in range(d)]
    pc = product_coefficients(design.dim)
    chi = [np.zeros(2 * L + 1, dtype=complex) for L in range(d)]
    for ell in range(d):
        size = 2 * ell + 1
        sign = (-1.0) ** (np.arange(size) - ell)
        nt = noise[ell].T  # nt[i, j] = N[j, i]
        for L in range(0, min(2 * ell, d - 1) + 1):
            g = pc.g(L, ell)
            # A[i, j] = (-1)^m N[m', m] f^{L, m'-m}_{l,-m; l,m'} with i = m + l, j = m' + l
            A = sign[:, None] * nt * g[::-1, :]
            for M in range(-min(L, 2 * ell), min(L, 2 * ell) + 1):
                chi[L][M + L] += np.trace(A, offset=M)
    return ChiVector(tuple(chi))


def exact_error_squared(design: MeasurementDesign, rho, n: int, _cache=None) -> float:
    """Shot-noise-limited ``E_V(rho)^2`` from the chi / noise-matrix form, unclamped."""
    if n < 1:
        raise ValueError("need at least one shot per axis")
    design.require_feasible()
    noise, chi = _cache or _noise_and_chi(design)
    coeffs = _coefficients_of(rho)
    total = 0.0
    for ell in range(design.dim.d):
        r = coeffs.blocks[ell]
        total += np.vdot(chi.blocks[ell], r).real - np.vdot(r, noise[ell] @ r).real
    return total / n


def _noise_and_chi(design):
    noise = [noise_matrix(design, ell).matrix for ell in range(design.dim.d)]
    return noise, chi_vector(design, noise)


def exact_error(design: MeasurementDesign, rho, n: int) -> float:
    """Root-mean-square reconstruction error ``E_V(rho)`` under shot noise.

    Small negative round-off (above -1e-9) is clamped to zero.  A larger
    negative value raises for physical states; for non-physical operators
    (raw estimates, ``sigma*``) it is clamped with a warning.
    """
    value = exact_error_squared(design, rho, n)
    if value >= 0:
        return math.sqrt(value)
    if value > -NEGATIVE_TOL:
        return 0.0
    if np.linalg.eigvalsh(_matrix_of(rho)).min() >= -1e-10:
        raise ArithmeticError(f"negative squared error {value} for a physical state")
    warnings.warn("negative squared error for a non-physical operator; clamping to 0")
    return 0.0


def error_from_covariances(design: MeasurementDesign, variances) -> float:
    """``E_V^2`` for caller-supplied noise variances ``variances[v, l]``.

    Noise is taken uncorrelated between axes; degrees decouple because each
    block is inverted independently.
    """
    design.require_feasible()
    variances = np.asarray(variances, dtype=float)
    return float(
        sum(
            _axis_weights(blk) @ variances[:, blk.ell]
            for blk in design.blocks
        )
    )


def covariance_matrix(rho, ell: int) -> np.ndarray:
    """``C_l[m, m'] = cov_rho(T_lm^dagger, T_lm')`` by direct operator algebra."""
    m = _matrix_of(rho)
    d = m.shape[0]
    ops = [polarization_operator(d, (ell, k)) for k in range(-ell, ell + 1)]
    exp = np.array([np.trace(m @ op) for op in ops])
    exp_dag = np.array([np.trace(m @ op.conj().T) for op in ops])
    second = np.array([[np.trace(m @ a.conj().T @ b) for b in ops] for a in ops])
    return second - np.outer(exp_dag, exp)


def covariance_form_error_squared(design: MeasurementDesign, rho, n: int) -> float:
    """``E_V^2 = (1/n) sum_l <<N_l|C_l[rho]>>``."""
    design.require_feasible()
    total = 0.0
    for ell in range(design.dim.d):
        nm = noise_matrix(design, ell).matrix
        total += np.vdot(nm, covariance_matrix(rho, ell)).real
    return total / n


def noise_weighted_norm_squared(design: MeasurementDesign, X) -> float:
    """``||X||_V^2 = sum_l <X_l|N_l|X_l>``."""
    coeffs = _coefficients_of(X)
    return float(
        sum(
            np.vdot(coeffs.blocks[ell], noise_matrix(design, ell).matrix @ coeffs.blocks[ell]).real
            for ell in range(design.dim.d)
        )
    )


def sigma_star(design: MeasurementDesign, n: int) -> tuple[ReconstructionEstimate, float]:
    """Trace-one Hermitian operator maximizing the shot-noise error, and that error.

    The maximizer is generally a non-physical "state" with negative
    eigenvalues, so its error is an upper bound that is rarely attained.
    """
    noise, chi = _noise_and_chi(design)
    d = design.dim.d
    blocks = [np.array([1 / math.sqrt(d)], dtype=complex)]
    for ell in range(1, d):
        blocks.append(0.5 * np.linalg.solve(noise[ell], chi.blocks[ell]))
    coeffs = PolarizationCoefficients(design.dim, tuple(blocks))
    matrix = reconstruct_from_coeffs(coeffs)
    est = ReconstructionEstimate(design.dim, (matrix + matrix.conj().T) / 2)
    value = exact_error_squared(design, coeffs, n, _cache=(noise, chi))
    return est, math.sqrt(max(value, 0.0))


def simulate_squared_errors(design: MeasurementDesign, rho, n: int, trials: int, seed) -> np.ndarray:
    """``||rho~ - rho||^2`` for ``trials`` independent simulated experiments.

    Vectorized over trials; axis ``v`` draws from child stream ``v`` of ``seed``.
    """
    design.require_feasible()
    axes = design.axis_set
    t = design.gamma.t
    probs = np.array([outcome_probabilities(rho, a) for a in axes])
    streams = _axis_streams(seed, len(axes))
    counts = np.stack([rng.multinomial(n, p, size=trials) for rng, p in zip(streams, probs)], axis=1)
    noise = counts / n @ t.T - probs @ t.T  # (trials, r, d)
    total = np.zeros(trials)
    for blk in design.blocks:
        delta = noise[:, :, blk.ell] @ blk.pinv().T
        total += np.sum(np.abs(delta) ** 2, axis=1)
    return total
