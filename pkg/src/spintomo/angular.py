"""Angular-momentum coupling coefficients and Wigner rotation matrices.

Phase conventions are Condon-Shortley throughout.  Clebsch-Gordan, 3-j and
6-j values come from the Racah closed-form sums evaluated over exact
rationals and rounded to float only at the very end, so they stay accurate
well beyond the dimensions used for qudit tomography (d ~ 60).

Rotations are active, ``R(alpha, beta, gamma) = exp(-i alpha Sz) exp(-i beta Sy)
exp(-i gamma Sz)``, with matrix elements

    D^l_{mn}(alpha, beta, gamma) = <l m| R |l n> = exp(-i m alpha) d^l_{mn}(beta) exp(-i n gamma).

For a measurement axis ``v = (alpha, beta)`` the matrix ``D^l(v)`` is the one
of the inverse rotation ``R(alpha, beta, 0)^dagger``; with this choice
``D^l_{0m}(v) = sqrt(4 pi / (2l+1)) Y_lm(v)`` and ``D^l_{0m}(v)`` is exactly the
overlap of the rotated operator ``T_{v l 0}`` with ``T_{l m}``.

Quantum numbers may be given as ints, floats, :class:`fractions.Fraction`
or :class:`HalfInt`; internally everything is keyed on twice their value.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real

import numpy as np

__all__ = [
    "HalfInt",
    "CoefficientTable",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
    "wigner_d_small",
    "wigner_D",
    "axis_wigner_D",
]


@dataclass(frozen=True, order=True)
class HalfInt:
    """An integer or half-integer stored exactly as twice its value."""

    twice_value: int

    @classmethod
    def of(cls, x) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        return cls(_twice(x))

    @property
    def is_integer(self) -> bool:
        return self.twice_value % 2 == 0

    def __add__(self, other):
        return HalfInt(self.twice_value + HalfInt.of(other).twice_value)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt(self.twice_value - HalfInt.of(other).twice_value)

    def __rsub__(self, other):
        return HalfInt(HalfInt.of(other).twice_value - self.twice_value)

    def __neg__(self):
        return HalfInt(-self.twice_value)

    def __float__(self):
        return self.twice_value / 2

    def __repr__(self):
        if self.is_integer:
            return f"HalfInt({self.twice_value // 2})"
        return f"HalfInt({self.twice_value}/2)"


def _twice(x) -> int:
    if isinstance(x, HalfInt):
        return x.twice_value
    if isinstance(x, (int, np.integer)):
        return 2 * int(x)
    if isinstance(x, Fraction):
        t = 2 * x
    elif isinstance(x, Real):
        t = Fraction(2 * float(x)).limit_denominator(1)
        if abs(float(t) - 2 * float(x)) > 1e-9:
            raise ValueError(f"{x!r} is not a multiple of 1/2")
    else:
        raise TypeError(f"cannot interpret {x!r} as a quantum number")
    if t.denominator != 1:
        raise ValueError(f"{x!r} is not a multiple of 1/2")
    return int(t)


class CoefficientTable:
    """Memo table for one kind of coupling coefficient.

    Readers never lock; insertion is serialized.  Entries are never
    overwritten once stored, so concurrent readers always see a final value.
    """

    def __init__(self, kind: str):
        self.kind = kind
        self.entries: dict[tuple[int, ...], float] = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self.entries.get(key)

    def insert(self, key, value: float) -> float:
        with self._lock:
            return self.entries.setdefault(key, value)

    def __len__(self):
        return len(self.entries)


CG_TABLE = CoefficientTable("CG")
WIGNER_3J_TABLE = CoefficientTable("Wigner3j")
WIGNER_6J_TABLE = CoefficientTable("Wigner6j")


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _triangle(t1: int, t2: int, t3: int) -> bool:
    """Triangle rule on twice-valued angular momenta."""
    return (
        t3 >= abs(t1 - t2)
        and t3 <= t1 + t2
        and (t1 + t2 + t3) % 2 == 0
    )


def _signed_sqrt(sign_times: Fraction, radicand: Fraction) -> float:
    """Return ``sign_times * sqrt(radicand)`` with a single final rounding."""
    if sign_times == 0 or radicand == 0:
        return 0.0
    squared = sign_times * sign_times * radicand
    return math.copysign(math.sqrt(float(squared)), sign_times)


def _check_projection(tj: int, tm: int, name: str):
    if tj < 0:
        raise ValueError(f"{name}: negative angular momentum")
    if abs(tm) > tj:
        raise ValueError(f"{name}: |m| = {abs(tm) / 2} exceeds j = {tj / 2}")
    if (tj - tm) % 2:
        raise ValueError(f"{name}: j and m must both be integer or both half-integer")


def _cg_twice(tj1, tm1, tj2, tm2, tJ, tM) -> float:
    if tM != tm1 + tm2 or not _triangle(tj1, tj2, tJ):
        return 0.0
    key = (tj1, tm1, tj2, tm2, tJ, tM)
    hit = CG_TABLE.get(key)
    if hit is not None:
        return hit

    # all of these are integers because of the triangle/parity rules
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    e = (tJ - tj2 + tm1) // 2
    f = (tJ - tj1 - tm2) // 2
    radicand = Fraction(
        (tJ + 1)
        * _fact((tJ + tj1 - tj2) // 2)
        * _fact((tJ - tj1 + tj2) // 2)
        * _fact(a)
        * _fact((tJ + tM) // 2)
        * _fact((tJ - tM) // 2)
        * _fact(b)
        * _fact((tj1 + tm1) // 2)
        * _fact((tj2 - tm2) // 2)
        * _fact(c),
        _fact((tj1 + tj2 + tJ) // 2 + 1),
    )
    k_min = max(0, -e, -f)
    k_max = min(a, b, c)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            _fact(k)
            * _fact(a - k)
            * _fact(b - k)
            * _fact(c - k)
            * _fact(e + k)
            * _fact(f + k)
        )
        total += Fraction((-1) ** k, denom)
    return CG_TABLE.insert(key, _signed_sqrt(total, radicand))


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>``.

    Returns exactly 0.0 when ``M != m1 + m2`` or the triangle rule fails.
    Raises ``ValueError`` if any ``|m| > j``.
    """
    tj1, tm1, tj2, tm2, tJ, tM = map(_twice, (j1, m1, j2, m2, J, M))
    _check_projection(tj1, tm1, "clebsch_gordan")
    _check_projection(tj2, tm2, "clebsch_gordan")
    _check_projection(tJ, tM, "clebsch_gordan")
    return _cg_twice(tj1, tm1, tj2, tm2, tJ, tM)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3-j symbol, via its relation to the Clebsch-Gordan coefficient."""
    t = tuple(map(_twice, (j1, j2, j3, m1, m2, m3)))
    tj1, tj2, tj3, tm1, tm2, tm3 = t
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        _check_projection(tj, tm, "wigner_3j")
    if tm1 + tm2 + tm3 != 0 or not _triangle(tj1, tj2, tj3):
        return 0.0
    hit = WIGNER_3J_TABLE.get(t)
    if hit is not None:
        return hit
    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    value = phase * _cg_twice(tj1, tm1, tj2, tm2, tj3, -tm3) / math.sqrt(tj3 + 1)
    return WIGNER_3J_TABLE.insert(t, value)


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6-j symbol ``{j1 j2 j3; j4 j5 j6}`` from the Racah formula."""
    t = tuple(map(_twice, (j1, j2, j3, j4, j5, j6)))
    if any(x < 0 for x in t):
        raise ValueError("wigner_6j: arguments must be nonnegative")
    t1, t2, t3, t4, t5, t6 = t
    triads = ((t1, t2, t3), (t1, t5, t6), (t4, t2, t6), (t4, t5, t3))
    if not all(_triangle(*tr) for tr in triads):
        return 0.0
    hit = WIGNER_6J_TABLE.get(t)
    if hit is not None:
        return hit

    radicand = Fraction(1)
    for tr in triads:
        radicand *= _delta_sq(*tr)
    a = [sum(tr) // 2 for tr in triads]
    b = [(t1 + t2 + t4 + t5) // 2, (t2 + t3 + t5 + t6) // 2, (t3 + t1 + t6 + t4) // 2]
    total = Fraction(0)
    for k in range(max(a), min(b) + 1):
        denom = 1
        for ai in a:
            denom *= _fact(k - ai)
        for bi in b:
            denom *= _fact(bi - k)
        total += Fraction((-1) ** k * _fact(k + 1), denom)
    return WIGNER_6J_TABLE.insert(t, _signed_sqrt(total, radicand))


@lru_cache(maxsize=None)
def _small_d_terms(ell: int, m: int, n: int):
    """Coefficients and half-angle exponents of the Wigner sum for d^l_{mn}."""
    pref = _fact(ell + m) * _fact(ell - m) * _fact(ell + n) * _fact(ell - n)
    coeffs, cos_pow, sin_pow = [], [], []
    for k in range(max(0, n - m), min(ell + n, ell - m) + 1):
        denom = _fact(ell + n - k) * _fact(k) * _fact(ell - k - m) * _fact(k - n + m)
        sign = -1 if (k - n + m) % 2 else 1
        coeffs.append(sign * _signed_sqrt(Fraction(1), Fraction(pref, denom * denom)))
        cos_pow.append(2 * ell - 2 * k + n - m)
        sin_pow.append(2 * k - n + m)
    return (
        np.array(coeffs, dtype=float),
        np.array(cos_pow, dtype=int),
        np.array(sin_pow, dtype=int),
    )


def wigner_d_small(ell: int, m: int, n: int, beta):
    """Small Wigner matrix element ``d^l_{mn}(beta) = <l m| exp(-i beta Sy) |l n>``.

    ``beta`` may be a scalar or an array.  Integer degrees only.  The
    alternating sum loses roughly ``log10(binom(2l, l))`` digits near
    ``beta = pi/2``; for l <= 30 the absolute error stays below ~1e-9.
    """
    if abs(m) > ell or abs(n) > ell or ell < 0:
        raise IndexError(f"invalid indices (l={ell}, m={m}, n={n})")
    coeffs, cp, sp = _small_d_terms(int(ell), int(m), int(n))
    b = np.asarray(beta, dtype=float)
    c = np.cos(b / 2)[..., None]
    s = np.sin(b / 2)[..., None]
    out = np.sum(coeffs * c**cp * s**sp, axis=-1)
    return out if out.ndim else float(out)


def wigner_D(ell: int, m: int, n: int, omega) -> complex:
    """Wigner rotation matrix element ``D^l_{mn}(alpha, beta, gamma)``."""
    alpha, beta, gamma = omega
    return complex(np.exp(-1j * (m * alpha + n * gamma)) * wigner_d_small(ell, m, n, beta))


def axis_wigner_D(ell: int, m: int, n: int, alpha, beta):
    """``D^l_{mn}(v)`` for measurement axis ``v = (alpha, beta)``.

    This is the element of the inverse rotation, ``D^l_{mn}(0, -beta, -alpha)
    = d^l_{nm}(beta) exp(i n alpha)``, vectorized over ``alpha``/``beta``.
    """
    alpha = np.asarray(alpha, dtype=float)
    return np.exp(1j * n * alpha) * wigner_d_small(ell, n, m, beta)
