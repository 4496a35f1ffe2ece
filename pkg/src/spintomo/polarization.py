"""Polarization operators of a spin-s qudit and the objects built from them.

Basis ordering: row/column ``i`` of every d x d matrix is the Sz eigenstate
with projection ``mu = s - i`` (row 0 is ``mu = s``).  Within a degree the
order index ``m`` is stored at position ``m + l`` (``m = -l .. l``).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .angular import HalfInt, clebsch_gordan, wigner_6j, wigner_D

__all__ = [
    "QuditDim",
    "PolarizationIndex",
    "PolarizationCoefficients",
    "ProductCoefficients",
    "GammaTable",
    "spin_operators",
    "rotation_operator",
    "polarization_operator",
    "rotate_polarization",
    "product_coefficient",
    "product_coefficients",
    "gamma_table",
    "phase_space_value",
    "phase_space_constant",
    "expand_in_basis",
    "reconstruct_from_coeffs",
    "basis_indices",
]


@dataclass(frozen=True)
class QuditDim:
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"qudit dimension must be an integer >= 2, got {self.d}")

    @property
    def s(self) -> HalfInt:
        return HalfInt(self.d - 1)

    @property
    def spin(self) -> float:
        return (self.d - 1) / 2

    @property
    def projections(self) -> np.ndarray:
        """Spin projections mu = s, s-1, ..., -s in basis order."""
        return self.spin - np.arange(self.d)


def _as_dim(dim) -> QuditDim:
    return dim if isinstance(dim, QuditDim) else QuditDim(int(dim))


@dataclass(frozen=True)
class PolarizationIndex:
    ell: int
    m: int

    def check(self, dim: QuditDim):
        if not (0 <= self.ell < dim.d and abs(self.m) <= self.ell):
            raise IndexError(f"invalid polarization index (l={self.ell}, m={self.m}) for d={dim.d}")


def basis_indices(dim) -> list[tuple[int, int]]:
    """All (l, m) pairs in storage order: l ascending, then m ascending."""
    d = _as_dim(dim).d
    return [(ell, m) for ell in range(d) for m in range(-ell, ell + 1)]


@dataclass(frozen=True)
class PolarizationCoefficients:
    """Expansion coefficients rho_lm = tr(T_lm^dagger X), stored per degree.

    ``blocks[l]`` is a complex vector of length 2l+1 indexed by ``m + l``.
    """

    dim: QuditDim
    blocks: tuple

    def __getitem__(self, idx) -> complex:
        ell, m = idx
        return complex(self.blocks[ell][m + ell])

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return {(ell, m): self[ell, m] for ell, m in basis_indices(self.dim)}

    def vector(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        for ell, block in enumerate(self.blocks):
            m = np.arange(-ell, ell + 1)
            if not np.allclose(np.conj(block), (-1.0) ** m * block[::-1], atol=atol, rtol=0):
                return False
        return True


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def spin_operators(dim) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Sz, S+, S-)`` as dense complex matrices."""
    dim = _as_dim(dim)
    s = dim.spin
    mu = dim.projections
    sz = np.diag(mu).astype(complex)
    # S+ |mu> = sqrt(s(s+1) - mu(mu+1)) |mu+1>, and |mu+1> sits one row above |mu>
    splus = np.diag(np.sqrt(s * (s + 1) - mu[1:] * (mu[1:] + 1)), 1).astype(complex)
    sminus = splus.conj().T.copy()
    return _readonly(sz), _readonly(splus), _readonly(sminus)


def rotation_operator(dim, alpha: float, beta: float, gamma: float = 0.0) -> np.ndarray:
    """``exp(-i alpha Sz) exp(-i beta Sy) exp(-i gamma Sz)`` in the spin-s representation."""
    dim = _as_dim(dim)
    sz, splus, sminus = spin_operators(dim)
    sy = (splus - sminus) / 2j
    mu = dim.projections
    return (
        np.exp(-1j * alpha * mu)[:, None]
        * expm(-1j * beta * sy)
        * np.exp(-1j * gamma * mu)[None, :]
    )


@lru_cache(maxsize=None)
def _polarization_operator(d: int, ell: int, m: int) -> np.ndarray:
    dim = QuditDim(d)
    ts = d - 1
    out = np.zeros((d, d), dtype=complex)
    norm = math.sqrt((2 * ell + 1) / d)
    for col in range(d):
        tmu = ts - 2 * col
        tnu = tmu + 2 * m
        if abs(tnu) > ts:
            continue
        row = (ts - tnu) // 2
        out[row, col] = norm * clebsch_gordan(
            dim.s, HalfInt(tmu), ell, m, dim.s, HalfInt(tnu)
        )
    return _readonly(out)


def polarization_operator(dim, idx) -> np.ndarray:
    """Polarization operator ``T_lm`` as a read-only d x d matrix.

    ``idx`` is a :class:`PolarizationIndex` or an ``(l, m)`` tuple.
    """
    dim = _as_dim(dim)
    if not isinstance(idx, PolarizationIndex):
        idx = PolarizationIndex(*idx)
    idx.check(dim)
    return _polarization_operator(dim.d, idx.ell, idx.m)


@lru_cache(maxsize=None)
def _basis_stack(d: int) -> np.ndarray:
    """All T_lm stacked as a (d^2, d, d) array in :func:`basis_indices` order."""
    return _readonly(
        np.array([_polarization_operator(d, ell, m) for ell, m in basis_indices(d)])
    )


def expand_in_basis(X: np.ndarray) -> PolarizationCoefficients:
    """Coefficients ``tr(T_lm^dagger X)`` of a square matrix."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("expected a square matrix")
    dim = QuditDim(X.shape[0])
    stack = _basis_stack(dim.d)
    flat = np.einsum("kij,ij->k", stack.conj(), X)
    return _split_blocks(dim, flat)


def _split_blocks(dim: QuditDim, flat) -> PolarizationCoefficients:
    blocks, start = [], 0
    for ell in range(dim.d):
        blocks.append(np.asarray(flat[start:start + 2 * ell + 1], dtype=complex))
        start += 2 * ell + 1
    return PolarizationCoefficients(dim, tuple(blocks))


def reconstruct_from_coeffs(c: PolarizationCoefficients) -> np.ndarray:
    """Inverse of :func:`expand_in_basis`: ``sum_lm c_lm T_lm``."""
    return np.einsum("k,kij->ij", c.vector(), _basis_stack(c.dim.d))


def rotate_polarization(dim, idx, omega) -> PolarizationCoefficients:
    """Expansion of ``R(omega) T_lm R(omega)^dagger`` in unrotated ``T_ln``.

    ``omega`` is an Euler triplet ``(alpha, beta, gamma)`` or an axis
    ``(alpha, beta)``.  The coefficient of ``T_ln`` is
    ``D^l_{nm}(omega) = conj(D^l_{mn}(omega^-1))`` with
    ``omega^-1 = (-gamma, -beta, -alpha)``; other degrees vanish.
    """
    dim = _as_dim(dim)
    if not isinstance(idx, PolarizationIndex):
        idx = PolarizationIndex(*idx)
    idx.check(dim)
    omega = tuple(omega) + (0.0,) * (3 - len(omega))
    ell, m = idx.ell, idx.m
    blocks = [np.zeros(2 * k + 1, dtype=complex) for k in range(dim.d)]
    blocks[ell] = np.array([wigner_D(ell, n, m, omega) for n in range(-ell, ell + 1)])
    return PolarizationCoefficients(dim, tuple(blocks))


def product_coefficient(dim, l1: int, m1: int, l2: int, m2: int, L: int, M: int) -> float:
    """Structure constant ``f = tr(T_LM^dagger T_{l1 m1} T_{l2 m2})``.

    Closed form ``(-1)^(2s+L) sqrt((2l1+1)(2l2+1)) <l1 m1; l2 m2|L M> {l1 l2 L; s s s}``.
    """
    dim = _as_dim(dim)
    for ell, m in ((l1, m1), (l2, m2), (L, M)):
        PolarizationIndex(ell, m).check(dim)
    if M != m1 + m2:
        return 0.0
    sign = -1.0 if (dim.d - 1 + L) % 2 else 1.0
    return (
        sign
        * math.sqrt((2 * l1 + 1) * (2 * l2 + 1))
        * clebsch_gordan(l1, m1, l2, m2, L, M)
        * wigner_6j(l1, l2, L, dim.s, dim.s, dim.s)
    )


@dataclass
class ProductCoefficients:
    """Lazily built table of product-expansion structure constants.

    Blocks are filled per ``(l1, l2)`` pair on first use.  :meth:`g` gives the
    equal-degree view ``g^L_{l m' m} = f^{L, m'+m}_{l m'; l m}`` used by the
    shot-noise error formula.
    """

    dim: QuditDim
    _pairs: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def pair(self, l1: int, l2: int) -> np.ndarray:
        """Array ``F[L, m1 + l1, m2 + l2]`` of ``f^{L, m1+m2}_{l1 m1; l2 m2}``."""
        key = (l1, l2)
        table = self._pairs.get(key)
        if table is not None:
            return table
        d = self.dim.d
        table = np.zeros((d, 2 * l1 + 1, 2 * l2 + 1))
        for L in range(abs(l1 - l2), min(l1 + l2, d - 1) + 1):
            for m1 in range(-l1, l1 + 1):
                for m2 in range(-l2, l2 + 1):
                    if abs(m1 + m2) <= L:
                        table[L, m1 + l1, m2 + l2] = product_coefficient(
                            self.dim, l1, m1, l2, m2, L, m1 + m2
                        )
        table = _readonly(table)
        with self._lock:
            return self._pairs.setdefault(key, table)

    def f(self, l1, m1, l2, m2, L, M) -> float:
        if M != m1 + m2:
            return 0.0
        return float(self.pair(l1, l2)[L, m1 + l1, m2 + l2])

    def g(self, L: int, ell: int) -> np.ndarray:
        """Matrix ``g_{L l}[m' + l, m + l] = f^{L, m'+m}_{l m'; l m}``."""
        return self.pair(ell, ell)[L]


@lru_cache(maxsize=None)
def product_coefficients(dim) -> ProductCoefficients:
    """Shared :class:`ProductCoefficients` instance for a dimension."""
    return ProductCoefficients(_as_dim(dim))


@dataclass(frozen=True)
class GammaTable:
    """Diagonal weights ``t[l, i] = <mu_i|T_l0|mu_i>`` and half spectral ranges ``gamma[l]``."""

    dim: QuditDim
    t: np.ndarray
    gamma: np.ndarray

    def simplification_holds(self, ell: int, atol: float = 1e-12) -> bool:
        """Whether ``Gamma_l == max_mu t_l mu`` (expected when d is even or l is odd)."""
        return abs(self.gamma[ell] - self.t[ell].max()) <= atol

    def mu_extremes(self, ell: int) -> tuple[int, int]:
        """Basis indices of the largest and smallest ``t_l mu``."""
        return int(np.argmax(self.t[ell])), int(np.argmin(self.t[ell]))


@lru_cache(maxsize=None)
def gamma_table(dim) -> GammaTable:
    dim = _as_dim(dim)
    t = np.array([np.diag(_polarization_operator(dim.d, ell, 0)).real for ell in range(dim.d)])
    gamma = (t.max(axis=1) - t.min(axis=1)) / 2
    return GammaTable(dim, _readonly(t), _readonly(gamma))


def phase_space_value(X: np.ndarray, v) -> complex:
    """Husimi-type value ``<s_v|X|s_v>`` with ``|s_v> = R(v)|s>``."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("expected a square matrix")
    alpha, beta = _axis_angles(v)
    state = rotation_operator(X.shape[0], alpha, beta)[:, 0]
    return complex(state.conj() @ X @ state)


def _axis_angles(v) -> tuple[float, float]:
    if hasattr(v, "alpha"):
        return float(v.alpha), float(v.beta)
    alpha, beta = v
    return float(alpha), float(beta)


def phase_space_constant(dim, ell: int) -> float:
    """``c_l`` in ``T_lm^PS(v) = c_l Y_lm(v)``."""
    dim = _as_dim(dim)
    ts = dim.d - 1
    ratio = math.factorial(ts) ** 2 / (math.factorial(ts + ell) * math.factorial(ts - ell))
    return math.sqrt(4 * math.pi / (ts + ell + 1) * ratio)
