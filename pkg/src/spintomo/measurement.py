"""Measurement axes, per-degree measurement blocks and a priori error scales."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .angular import axis_wigner_D
from .polarization import (
    GammaTable,
    QuditDim,
    _as_dim,
    gamma_table,
    polarization_operator,
    rotation_operator,
)

__all__ = [
    "Axis",
    "AxisSet",
    "MeasurementBlock",
    "MeasurementDesign",
    "RANK_RTOL",
    "measurement_block",
    "full_measurement_matrix",
    "error_scales",
    "rotate_axes",
    "quantum_scale_of_angles",
    "InfeasibleDesignError",
]

TWO_PI = 2 * math.pi
RANK_RTOL = 1e-10


class InfeasibleDesignError(ValueError):
    """Raised when an operation needs every measurement block to have full column rank."""


@dataclass(frozen=True)
class Axis:
    """A direction on the unit sphere; alpha in [0, 2 pi), beta in [0, pi].

    Any real ``(alpha, beta)`` is accepted and mapped onto the canonical
    range through the unit vector it describes.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        alpha, beta = float(self.alpha), float(self.beta)
        if not (0.0 <= beta <= math.pi):
            beta = math.fmod(beta, TWO_PI)
            if beta < 0:
                beta += TWO_PI
            if beta > math.pi:
                beta = TWO_PI - beta
                alpha += math.pi
        alpha = math.fmod(alpha, TWO_PI)
        if alpha < 0:
            alpha += TWO_PI
        if alpha >= TWO_PI:
            alpha = 0.0
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_vector(cls, xyz) -> "Axis":
        x, y, z = np.asarray(xyz, dtype=float) / np.linalg.norm(xyz)
        return cls(math.atan2(y, x), math.acos(max(-1.0, min(1.0, z))))

    def vector(self) -> np.ndarray:
        sb = math.sin(self.beta)
        return np.array([sb * math.cos(self.alpha), sb * math.sin(self.alpha), math.cos(self.beta)])


@dataclass(frozen=True)
class AxisSet:
    """Ordered measurement axes for a qudit of dimension ``dim``."""

    dim: QuditDim
    axes: tuple[Axis, ...]

    def __init__(self, dim, axes: Sequence):
        axes = tuple(a if isinstance(a, Axis) else Axis(*a) for a in axes)
        if not axes:
            raise ValueError("an axis set needs at least one axis")
        object.__setattr__(self, "dim", _as_dim(dim))
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_angles(cls, dim, alpha, beta) -> "AxisSet":
        return cls(dim, list(zip(np.ravel(alpha), np.ravel(beta))))

    def __len__(self):
        return len(self.axes)

    def __iter__(self):
        return iter(self.axes)

    @property
    def alpha(self) -> np.ndarray:
        return np.array([a.alpha for a in self.axes])

    @property
    def beta(self) -> np.ndarray:
        return np.array([a.beta for a in self.axes])

    def angles(self) -> np.ndarray:
        """(r, 2) array of ``[alpha, beta]`` rows."""
        return np.column_stack([self.alpha, self.beta])

    def extended(self, more: Sequence) -> "AxisSet":
        return AxisSet(self.dim, self.axes + tuple(AxisSet(self.dim, more).axes))


def rotate_axes(axes: AxisSet, rotation: np.ndarray) -> AxisSet:
    """Apply a 3x3 rotation matrix to every axis."""
    rotation = np.asarray(rotation, dtype=float)
    return AxisSet(axes.dim, [Axis.from_vector(rotation @ a.vector()) for a in axes])


@dataclass(frozen=True)
class MeasurementBlock:
    """Degree-``ell`` block ``M[v, m + ell] = D^ell_{0m}(v)`` and its thin SVD.

    ``u`` holds left singular vectors as columns, ``vh`` the conjugated right
    singular vectors as rows; ``singular_values`` are descending.
    """

    ell: int
    matrix: np.ndarray
    u: np.ndarray
    singular_values: np.ndarray
    vh: np.ndarray
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == 2 * self.ell + 1

    @property
    def s_squared(self) -> float:
        """``S_{V l}^2 = sum_k sigma_k^-2``; infinite when rank deficient."""
        if not self.full_rank:
            return math.inf
        return float(np.sum(self.singular_values ** -2.0))

    def pinv(self) -> np.ndarray:
        """Left inverse ``W Sigma^-1 U^dagger`` over the nonzero singular values."""
        k = self.rank
        return (self.vh[:k].conj().T / self.singular_values[:k]) @ self.u[:, :k].conj().T


def _block_matrix(axes: AxisSet, ell: int) -> np.ndarray:
    alpha, beta = axes.alpha, axes.beta
    return np.column_stack(
        [axis_wigner_D(ell, 0, m, alpha, beta) for m in range(-ell, ell + 1)]
    )


def _numerical_rank(sv: np.ndarray, shape) -> int:
    if sv.size == 0 or sv[0] == 0:
        return 0
    cutoff = RANK_RTOL * sv[0] * max(shape)
    return int(np.count_nonzero(sv >= cutoff))


def measurement_block(axes: AxisSet, ell: int) -> MeasurementBlock:
    if not 0 <= ell < axes.dim.d:
        raise IndexError(f"degree {ell} out of range for d={axes.dim.d}")
    mat = _block_matrix(axes, ell)
    u, sv, vh = np.linalg.svd(mat, full_matrices=False)
    for a in (mat, u, sv, vh):
        a.setflags(write=False)
    return MeasurementBlock(ell, mat, u, sv, vh, _numerical_rank(sv, mat.shape))


def full_measurement_matrix(axes: AxisSet) -> np.ndarray:
    """Dense ``(r d) x d^2`` matrix with rows ``<<T_{v l 0}|``, row index ``v * d + l``.

    Built by direct conjugation with rotation matrices, independently of the
    Wigner-D route used for the blocks.
    """
    d = axes.dim.d
    t0 = [polarization_operator(d, (ell, 0)) for ell in range(d)]
    rows = []
    for a in axes:
        R = rotation_operator(d, a.alpha, a.beta)
        for ell in range(d):
            rows.append((R @ t0[ell] @ R.conj().T).conj().ravel())
    return np.array(rows)


@dataclass(frozen=True)
class MeasurementDesign:
    """All per-degree blocks of an axis set together with its error scales."""

    axis_set: AxisSet
    blocks: tuple[MeasurementBlock, ...]
    gamma: GammaTable

    @property
    def dim(self) -> QuditDim:
        return self.axis_set.dim

    @property
    def feasible(self) -> bool:
        return all(b.full_rank for b in self.blocks)

    @property
    def s_scales_squared(self) -> np.ndarray:
        return np.array([b.s_squared for b in self.blocks])

    @property
    def s_scales(self) -> np.ndarray:
        return np.sqrt(self.s_scales_squared)

    @property
    def classical_scale(self) -> float:
        """``S_V``, infinite for an infeasible design."""
        if not self.feasible:
            return math.inf
        return math.sqrt(float(np.sum(self.s_scales_squared)))

    @property
    def quantum_scale_squared(self) -> float:
        if not self.feasible:
            return math.inf
        return float(np.sum(self.gamma.gamma ** 2 * self.s_scales_squared))

    @property
    def quantum_scale(self) -> float:
        """``epsilon_V``, infinite for an infeasible design."""
        return math.sqrt(self.quantum_scale_squared)

    def require_feasible(self):
        if not self.feasible:
            bad = [b.ell for b in self.blocks if not b.full_rank]
            raise InfeasibleDesignError(f"measurement blocks for degrees {bad} are rank deficient")


def error_scales(axes: AxisSet) -> MeasurementDesign:
    """Build every block of ``axes`` and wrap them with the Gamma factors."""
    blocks = tuple(measurement_block(axes, ell) for ell in range(axes.dim.d))
    return MeasurementDesign(axes, blocks, gamma_table(axes.dim))


def quantum_scale_of_angles(dim, alpha, beta) -> float:
    """``epsilon_V`` straight from angle arrays; the hot path for optimizers."""
    dim = _as_dim(dim)
    gamma = gamma_table(dim).gamma
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    total = 0.0
    for ell in range(1, dim.d):
        mat = np.column_stack(
            [axis_wigner_D(ell, 0, m, alpha, beta) for m in range(-ell, ell + 1)]
        )
        sv = np.linalg.svd(mat, compute_uv=False)
        if _numerical_rank(sv, mat.shape) < 2 * ell + 1:
            return math.inf
        total += gamma[ell] ** 2 * float(np.sum(sv ** -2.0))
    return math.sqrt(total)
