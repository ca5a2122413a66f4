"""Angular-momentum primitives: 3j symbols, rotation matrices, spherical harmonics.

Conventions (used by every other module):

* Euler angles are z-y-z, active.  ``rotation_matrix(g)`` returns
  ``Rz(alpha) @ Ry(beta) @ Rz(gamma)``.
* ``wigner_D(l, m, mp, g) = exp(-i m alpha) d^l_{m,mp}(beta) exp(-i mp gamma)``
  is the matrix of that rotation, so that
  ``Y_lm(R^-1 r) = sum_m' D^l_{m',m}(R) Y_lm'(r)``.
* Spherical unit vectors ``e_{+-1} = -+(e_x +- i e_y)/sqrt(2)``, ``e_0 = e_z``.
* Associated Legendre functions carry the Condon-Shortley phase and
  ``Y_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P^m_l(cos theta) exp(i m phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "AngularKey",
    "EulerAngles",
    "wigner3j",
    "w3j",
    "wigner_d",
    "wigner_D",
    "sph_harm",
    "sph_harm_xyz",
    "legendre_norm",
    "assoc_legendre",
    "d_product_linearization",
    "triple_D_integral",
    "rotation_matrix",
    "spherical_basis",
]


@dataclass(frozen=True)
class AngularKey:
    """Arguments of a 3j symbol, stored as doubled integers (2j, 2m)."""

    j1: int
    j2: int
    j3: int
    m1: int
    m2: int
    m3: int

    def __post_init__(self):
        for j, m in ((self.j1, self.m1), (self.j2, self.m2), (self.j3, self.m3)):
            if not all(isinstance(v, (int, np.integer)) for v in (j, m)):
                raise TypeError("AngularKey fields are doubled integers")
            if j < 0:
                raise ValueError(f"negative angular momentum 2j={j}")
            if abs(m) > j:
                raise ValueError(f"|2m|={abs(m)} exceeds 2j={j}")
            if (j - m) % 2:
                raise ValueError(f"2j={j} and 2m={m} differ in parity")

    @classmethod
    def from_values(cls, j1, j2, j3, m1, m2, m3) -> "AngularKey":
        """Build from (half-)integer values, e.g. ``from_values(0.5, 0.5, 1, 0.5, -0.5, 0)``."""
        doubled = []
        for v in (j1, j2, j3, m1, m2, m3):
            d = 2 * Fraction(v).limit_denominator(2)
            if d.denominator != 1 or abs(float(d) - 2 * float(v)) > 1e-12:
                raise ValueError(f"{v} is not a half-integer")
            doubled.append(int(d))
        return cls(*doubled)


@dataclass(frozen=True)
class EulerAngles:
    """z-y-z Euler angles in radians."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= math.pi:
            raise ValueError(f"beta={self.beta} outside [0, pi]")
        for name in ("alpha", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v < 2 * math.pi:
                raise ValueError(f"{name}={v} outside [0, 2pi)")


def _fact(n2: int) -> int:
    # factorial of n2/2 for an even doubled integer
    return math.factorial(n2 // 2)


@lru_cache(maxsize=None)
def _wigner3j_doubled(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if j3 < abs(j1 - j2) or j3 > j1 + j2 or (j1 + j2 + j3) % 2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    # all quantities below are doubled; sums of two are even
    pref2 = Fraction(
        _fact(j1 + j2 - j3) * _fact(j1 - j2 + j3) * _fact(-j1 + j2 + j3),
        _fact(j1 + j2 + j3 + 2),
    )
    pref2 *= (
        _fact(j1 + m1) * _fact(j1 - m1) * _fact(j2 + m2)
        * _fact(j2 - m2) * _fact(j3 + m3) * _fact(j3 - m3)
    )
    kmin = max(0, (j2 - j3 - m1) // 2, (j1 - j3 + m2) // 2)
    kmax = min((j1 + j2 - j3) // 2, (j1 - m1) // 2, (j2 + m2) // 2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        k2 = 2 * k
        den = (
            math.factorial(k)
            * _fact(j3 - j2 + k2 + m1)
            * _fact(j3 - j1 + k2 - m2)
            * _fact(j1 + j2 - j3 - k2)
            * _fact(j1 - k2 - m1)
            * _fact(j2 - k2 + m2)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0.0
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    sign = 1 if total > 0 else -1
    return phase * sign * math.sqrt(pref2 * total * total)


def wigner3j(k: AngularKey) -> float:
    """Wigner 3j symbol from Racah's single-sum formula in exact rational arithmetic.

    Returns exactly 0.0 when the triangle rule or ``m1+m2+m3 = 0`` fails.
    Values are memoized (the cache is safe for concurrent readers).
    """
    return _wigner3j_doubled(k.j1, k.j2, k.j3, k.m1, k.m2, k.m3)


def w3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Integer-argument 3j symbol; out-of-range projections give 0."""
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    return _wigner3j_doubled(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3)


def _check_lm(l: int, *ms: int) -> None:
    if l < 0:
        raise ValueError(f"l={l} must be non-negative")
    for m in ms:
        if abs(m) > l:
            raise ValueError(f"|m|={abs(m)} exceeds l={l}")


def wigner_d(l: int, m: int, mp: int, beta):
    """Reduced rotation matrix element d^l_{m,mp}(beta) (Wigner's explicit sum)."""
    _check_lm(l, m, mp)
    beta = np.asarray(beta, dtype=float)
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    norm = math.sqrt(
        math.factorial(l + m) * math.factorial(l - m)
        * math.factorial(l + mp) * math.factorial(l - mp)
    )
    out = np.zeros_like(beta)
    for k in range(max(0, mp - m), min(l + mp, l - m) + 1):
        den = (
            math.factorial(l + mp - k) * math.factorial(k)
            * math.factorial(m - mp + k) * math.factorial(l - m - k)
        )
        sign = -1.0 if (m - mp + k) % 2 else 1.0
        out = out + sign * norm / den * c ** (2 * l + mp - m - 2 * k) * s ** (m - mp + 2 * k)
    return out[()] if out.ndim == 0 else out


def wigner_D(l: int, m: int, mp: int, g) -> complex:
    """Rotation matrix element D^l_{m,mp}(alpha, beta, gamma).

    ``g`` is an :class:`EulerAngles` or an ``(alpha, beta, gamma)`` triple of
    scalars/arrays.
    """
    if isinstance(g, EulerAngles):
        a, b, c = g.alpha, g.beta, g.gamma
    else:
        a, b, c = g
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    return np.exp(-1j * m * a) * wigner_d(l, m, mp, b) * np.exp(-1j * mp * c)


def assoc_legendre(L: int, M: int, x):
    """Unnormalized associated Legendre function P^M_L(x) with Condon-Shortley phase.

    Only ``0 <= M <= L``; negative orders follow from
    ``P^{-M}_L = (-1)^M (L-M)!/(L+M)! P^M_L``.
    """
    if not 0 <= M <= L:
        raise ValueError(f"need 0 <= M <= L, got L={L}, M={M}")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise ValueError("assoc_legendre argument outside [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    somx2 = np.sqrt((1.0 - x) * (1.0 + x))
    pmm = np.ones_like(x)
    fact = 1.0
    for _ in range(M):
        pmm = -pmm * fact * somx2
        fact += 2.0
    if L == M:
        return pmm[()] if pmm.ndim == 0 else pmm
    pm1 = x * (2 * M + 1) * pmm
    if L == M + 1:
        return pm1[()] if pm1.ndim == 0 else pm1
    for ll in range(M + 2, L + 1):
        pll = (x * (2 * ll - 1) * pm1 - (ll + M - 1) * pmm) / (ll - M)
        pmm, pm1 = pm1, pll
    return pm1[()] if pm1.ndim == 0 else pm1


def legendre_norm(L: int, M: int) -> float:
    """sqrt((2L+1)/(4 pi) (L-M)!/(L+M)!), valid for negative M as well."""
    return math.sqrt((2 * L + 1) / (4 * math.pi) * math.exp(math.lgamma(L - M + 1) - math.lgamma(L + M + 1)))


def sph_harm(l: int, m: int, theta, phi):
    """Complex spherical harmonic Y^l_m(theta, phi); theta polar, phi azimuth."""
    _check_lm(l, m)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    y = legendre_norm(l, am) * assoc_legendre(l, am, np.cos(theta)) * np.exp(1j * am * phi)
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y


def sph_harm_xyz(l: int, m: int, xyz):
    """Y^l_m evaluated at unit vectors ``xyz`` (shape ``(..., 3)``).

    Uses ``P^m_l(z) e^{i m phi} = (-1)^m P_l^(m)(z) (x + i y)^m`` so no
    square root of ``1 - z^2`` appears; accurate down to the poles.
    """
    _check_lm(l, m)
    xyz = np.asarray(xyz, dtype=float)
    am = abs(m)
    dP = np.polynomial.legendre.Legendre.basis(l).deriv(am) if am else np.polynomial.legendre.Legendre.basis(l)
    y = legendre_norm(l, am) * (-1) ** am * dP(xyz[..., 2]) * (xyz[..., 0] + 1j * xyz[..., 1]) ** am
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y


def d_product_linearization(l1, m1, mp1, l2, m2, mp2) -> list[tuple[int, float]]:
    """Clebsch-Gordan series of a product of two rotation matrices.

    Returns ``[(l, w_l), ...]`` over ``|l1-l2| <= l <= l1+l2`` such that
    ``D^l1_{m1,mp1} D^l2_{m2,mp2} = sum_l w_l conj(D^l_{-(m1+m2), -(mp1+mp2)})``.
    """
    m12 = m1 + m2
    mp12 = mp1 + mp2
    out = []
    for l in range(abs(l1 - l2), l1 + l2 + 1):
        w = (2 * l + 1) * w3j(l1, l2, l, m1, m2, -m12) * w3j(l1, l2, l, mp1, mp2, -mp12)
        out.append((l, w))
    return out


def triple_D_integral(l1, m1, mp1, l2, m2, mp2, l3, m3, mp3) -> float:
    """Orientation average (1/8pi^2) of D^l1_{m1,mp1} D^l2_{m2,mp2} D^l3_{m3,mp3}."""
    return w3j(l1, l2, l3, m1, m2, m3) * w3j(l1, l2, l3, mp1, mp2, mp3)


def _rz(a):
    c, s = np.cos(a), np.sin(a)
    o, z = np.ones_like(c), np.zeros_like(c)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def _ry(b):
    c, s = np.cos(b), np.sin(b)
    o, z = np.ones_like(c), np.zeros_like(c)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


def rotation_matrix(g) -> np.ndarray:
    """Active z-y-z rotation ``Rz(alpha) Ry(beta) Rz(gamma)``; broadcasts over arrays."""
    if isinstance(g, EulerAngles):
        a, b, c = g.alpha, g.beta, g.gamma
    else:
        a, b, c = g
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    return _rz(a) @ _ry(b) @ _rz(c)


def spherical_basis() -> np.ndarray:
    """Rows are the cartesian components of e_{-1}, e_0, e_{+1}."""
    r2 = math.sqrt(2.0)
    return np.array(
        [
            [1 / r2, -1j / r2, 0.0],  # e_-1 = (e_x - i e_y)/sqrt2
            [0.0, 0.0, 1.0],
            [-1 / r2, -1j / r2, 0.0],  # e_+1 = -(e_x + i e_y)/sqrt2
        ],
        dtype=complex,
    )
