"""Closed-form orientation-averaged anisotropy parameters.

Both perturbative amplitudes are first written in the form

    a(k_mol; g) = sum c[lm, Q, kappa, kappa0] D^Q_{kappa,kappa0}(g) Y_lm(k_mol)

(Q = 1 for one photon; Q = 0, 1, 2 for two photons after coupling the two
D^1 factors).  The Euler average of ``a^A conj(a^B)`` then collapses onto 3j
symbols, giving

    beta^{AB}_{LM} = N_LM (-1)^M sum c^A conj(c^B) (-1)^(kappa'-kappa0')
                     C^L_{lm,l'm'} (Q Q' L; kappa, -kappa', m'-m)
                     (Q Q' L; kappa0, -kappa0', -M)

with ``C^L_{lm,l'm'} = (-1)^m' sqrt((2l+1)(2l'+1)(2L+1)/4pi)
(l l' L; 0 0 0)(l l' L; m, -m', m'-m)`` and ``N_LM`` the spherical-harmonic
normalization.  The distribution is ``sum beta_LM P^M_L(cos th) e^{iM phi}``
with Condon-Shortley ``P^M_L``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import units
from .angular import assoc_legendre, legendre_norm, w3j
from .errors import ConsistencyError
from .pulses import FieldIntegrator, FieldSpec
from .structure import DipoleSet, OrbitalSet, continuum_at, lm_pairs

__all__ = [
    "Part",
    "BetaTable",
    "L_CAP",
    "L_LIMIT",
    "make_integrator",
    "amplitude_coefficients",
    "beta_1ph",
    "beta_2ph",
    "beta_int",
    "beta_tables",
    "assemble",
    "assemble_cos",
    "write_beta_csv",
]

L_CAP = 4
MU = (-1, 0, 1)


class Part(str, enum.Enum):
    ONE_PH = "1ph"
    TWO_PH = "2ph"
    INT = "int"


L_LIMIT = {Part.ONE_PH: 2, Part.TWO_PH: 4, Part.INT: 3}


@dataclass(frozen=True, eq=False)
class BetaTable:
    """beta_{L,M} for 0 <= L <= L_CAP, stored as ``data[L, M + L_CAP]``."""

    part: Part
    e_k: float
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "part", Part(self.part))
        d = np.array(self.data, dtype=complex)
        if d.shape != (L_CAP + 1, 2 * L_CAP + 1):
            raise ValueError(f"beta table has shape {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    def __getitem__(self, LM: tuple[int, int]) -> complex:
        L, M = LM
        if not (0 <= L <= L_CAP and abs(M) <= L):
            raise KeyError(LM)
        return complex(self.data[L, M + L_CAP])

    @property
    def entries(self) -> dict:
        return {(L, M): self[L, M] for L in range(L_CAP + 1) for M in range(-L, L + 1)}

    def scale(self) -> float:
        return float(np.max(np.abs(self.data)))

    @classmethod
    def zeros(cls, part, e_k=0.0) -> "BetaTable":
        return cls(part, e_k, np.zeros((L_CAP + 1, 2 * L_CAP + 1), complex))


# ---------------------------------------------------------------------------
# angular tensors (cached per l_max)


@lru_cache(maxsize=None)
def _gaunt_like(l_max: int, L: int) -> np.ndarray:
    """C^L[lm, l'm'] as defined in the module docstring."""
    lm = lm_pairs(l_max)
    out = np.zeros((len(lm), len(lm)))
    for i, (l, m) in enumerate(lm):
        for j, (lp, mp) in enumerate(lm):
            a = w3j(l, lp, L, 0, 0, 0)
            if a == 0.0:
                continue
            b = w3j(l, lp, L, m, -mp, mp - m)
            if b == 0.0:
                continue
            out[i, j] = (-1) ** mp * math.sqrt((2 * l + 1) * (2 * lp + 1) * (2 * L + 1) / (4 * math.pi)) * a * b
    return out


@lru_cache(maxsize=None)
def _w_tensor(l_max: int, L: int) -> np.ndarray:
    """W[lm, Q, kappa, l'm', Q', kappa'] = (-1)^kappa' C^L (Q Q' L; kappa, -kappa', m'-m)."""
    lm = lm_pairs(l_max)
    C = _gaunt_like(l_max, L)
    n = len(lm)
    W = np.zeros((n, 3, 5, n, 3, 5))
    for i, j in zip(*np.nonzero(C)):
        q = lm[j][1] - lm[i][1]
        for Q in range(3):
            for Qp in range(3):
                for k in range(-Q, Q + 1):
                    kp = k + q
                    if abs(kp) > Qp:
                        continue
                    t = w3j(Q, Qp, L, k, -kp, q)
                    if t:
                        W[i, Q, k + 2, j, Qp, kp + 2] = (-1) ** kp * C[i, j] * t
    W.setflags(write=False)
    return W


@lru_cache(maxsize=None)
def _v_tensor(L: int, M: int) -> np.ndarray:
    """V[Q, kappa0, Q', kappa0'] = (-1)^kappa0' (Q Q' L; kappa0, -kappa0', -M)."""
    V = np.zeros((3, 5, 3, 5))
    for Q in range(3):
        for Qp in range(3):
            for k0 in range(-Q, Q + 1):
                k0p = k0 - M
                if abs(k0p) > Qp:
                    continue
                V[Q, k0 + 2, Qp, k0p + 2] = (-1) ** k0p * w3j(Q, Qp, L, k0, -k0p, -M)
    V.setflags(write=False)
    return V


@lru_cache(maxsize=None)
def _coupling_tensors():
    """Maps from (mu, mu0) and (mu, nu, mu0, nu0) field/dipole products onto
    the c[Q, kappa, kappa0] layout."""
    G1 = np.zeros((5, 5, 3, 3), dtype=complex)  # [kappa, kappa0, mu, mu0]
    for mu in MU:
        for mu0 in MU:
            G1[mu + 2, -mu0 + 2, mu + 1, mu0 + 1] = 1j * (-1) ** mu0
    G2 = np.zeros((3, 5, 5, 3, 3, 3, 3))  # [Q, kappa, kappa0, mu, nu, mu0, nu0]
    for Q in range(3):
        for mu in MU:
            for nu in MU:
                a = w3j(1, 1, Q, mu, nu, -mu - nu)
                if a == 0.0:
                    continue
                for mu0 in MU:
                    for nu0 in MU:
                        b = w3j(1, 1, Q, -mu0, -nu0, mu0 + nu0)
                        if b == 0.0:
                            continue
                        G2[Q, mu + nu + 2, -(mu0 + nu0) + 2, mu + 1, nu + 1, mu0 + 1, nu0 + 1] = (
                            -((-1) ** (mu + nu)) * (2 * Q + 1) * a * b)
    G1.setflags(write=False)
    G2.setflags(write=False)
    return G1, G2


# ---------------------------------------------------------------------------
# amplitudes


def make_integrator(orb: OrbitalSet, spec: FieldSpec, e_max: float, refine: int = 1) -> FieldIntegrator:
    """Integration grid fine enough for every energy up to ``e_max`` (a.u.)."""
    eps = orb.energies
    i0 = orb.i0_index
    f = max(abs(e_max - eps[p]) + abs(eps[p] - eps[i0]) for p in orb.intermediates)
    f = max(f, abs(e_max - eps[i0]))
    return FieldIntegrator(spec, f, refine=refine)


def amplitude_coefficients(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float,
                           integrator: FieldIntegrator | None = None):
    """Coefficients c1, c2 with shape (n_lm, 3, 5, 5) over (lm, Q, kappa, kappa0)."""
    if integrator is None:
        integrator = make_integrator(orb, spec, e_k)
    eps = orb.energies
    i0 = orb.i0_index
    ps = orb.intermediates
    bc = continuum_at(dip, e_k)  # (n_orb, n_lm, 3)
    G1, G2 = _coupling_tensors()

    I1 = integrator.one_photon(e_k - eps[i0])
    c1 = np.zeros((dip.n_lm, 3, 5, 5), dtype=complex)
    c1[:, 1] = np.einsum("kzab,la,b->lkz", G1, bc[i0], I1)

    # T[lm, mu, nu, mu0, nu0] = sum_p S^p[lm, mu, nu] F^p[mu0, nu0]
    perm = np.zeros(3, dtype=complex)
    for i in orb.occupied_indices:
        perm = perm + dip.bb[i, i]
    T = np.zeros((dip.n_lm, 3, 3, 3, 3), dtype=complex)
    for p in ps:
        bound = perm if p == i0 else dip.bb[p, i0]
        if not np.any(bound) or not np.any(bc[p]):
            continue
        F = integrator.two_photon(e_k, eps[p], eps[i0])
        T += np.einsum("la,b,cd->labcd", bc[p], bound, F)
    c2 = np.einsum("qkzabcd,labcd->lqkz", G2, T)
    return c1, c2


def _contract(cA: np.ndarray, cB: np.ndarray, l_max: int, L: int, Ms) -> dict:
    W = _w_tensor(l_max, L)
    H = np.einsum("lqkz,lqkmrs,mrsy->qzry", cA, W, np.conj(cB), optimize=True)
    out = {}
    for M in Ms:
        V = _v_tensor(L, M)
        out[M] = legendre_norm(L, M) * (-1) ** M * np.sum(H * V)
    return out


def _table(part: Part, e_k: float, cA, cB, l_max: int, hermitian: bool) -> BetaTable:
    data = np.zeros((L_CAP + 1, 2 * L_CAP + 1), dtype=complex)
    for L in range(L_CAP + 1):
        if L > L_LIMIT[part]:
            continue  # exact zero: (Q Q' L) triangle rule with Q + Q' < L
        Ms = range(0, L + 1) if hermitian else range(-L, L + 1)
        vals = _contract(cA, cB, l_max, L, Ms)
        for M, v in vals.items():
            data[L, M + L_CAP] = v
        if hermitian:
            data[L, L_CAP] = data[L, L_CAP].real
            for M in range(1, L + 1):
                f = math.exp(math.lgamma(L + M + 1) - math.lgamma(L - M + 1))
                data[L, -M + L_CAP] = (-1) ** M * f * np.conj(data[L, M + L_CAP])
    return BetaTable(part, e_k, data)


def beta_tables(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float,
                integrator: FieldIntegrator | None = None) -> tuple[BetaTable, BetaTable, BetaTable]:
    """(beta^1ph, beta^2ph, beta^int) at photoelectron energy ``e_k`` (a.u.)."""
    c1, c2 = amplitude_coefficients(orb, dip, spec, e_k, integrator)
    b1 = _table(Part.ONE_PH, e_k, c1, c1, dip.l_max, True)
    b2 = _table(Part.TWO_PH, e_k, c2, c2, dip.l_max, True)
    bi = _table(Part.INT, e_k, c1, c2, dip.l_max, False)
    return b1, b2, bi


def beta_1ph(orb, dip, spec, e_k, integrator=None) -> BetaTable:
    c1, _ = amplitude_coefficients(orb, dip, spec, e_k, integrator)
    return _table(Part.ONE_PH, e_k, c1, c1, dip.l_max, True)


def beta_2ph(orb, dip, spec, e_k, integrator=None) -> BetaTable:
    _, c2 = amplitude_coefficients(orb, dip, spec, e_k, integrator)
    return _table(Part.TWO_PH, e_k, c2, c2, dip.l_max, True)


def beta_int(orb, dip, spec, e_k, integrator=None) -> BetaTable:
    c1, c2 = amplitude_coefficients(orb, dip, spec, e_k, integrator)
    return _table(Part.INT, e_k, c1, c2, dip.l_max, False)


# ---------------------------------------------------------------------------
# assembly


def _basis(x, phi):
    """P^M_L(x) e^{i M phi} stacked as [L, M + L_CAP, ...]."""
    x, ph = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(phi, dtype=float))
    out = np.zeros((L_CAP + 1, 2 * L_CAP + 1) + x.shape, dtype=complex)
    for L in range(L_CAP + 1):
        for M in range(0, L + 1):
            P = assoc_legendre(L, M, x)
            out[L, M + L_CAP] = P * np.exp(1j * M * ph)
            if M:
                f = math.exp(math.lgamma(L - M + 1) - math.lgamma(L + M + 1))
                out[L, -M + L_CAP] = (-1) ** M * f * P * np.exp(-1j * M * ph)
    return out


def assemble(b1: BetaTable, b2: BetaTable, bint: BetaTable, theta, phi, rtol: float = 1e-8,
             return_parts: bool = False):
    """Differential probability at (theta, phi) from the three tables."""
    return assemble_cos(b1, b2, bint, np.cos(np.asarray(theta, dtype=float)), phi, rtol, return_parts)


def assemble_cos(b1: BetaTable, b2: BetaTable, bint: BetaTable, x, phi, rtol: float = 1e-8,
                 return_parts: bool = False):
    """As :func:`assemble` with ``x = cos(theta)`` given directly."""
    B = _basis(x, phi)
    s1 = np.tensordot(b1.data, B, axes=([0, 1], [0, 1]))
    s2 = np.tensordot(b2.data, B, axes=([0, 1], [0, 1]))
    si = 2.0 * np.tensordot(bint.data, B, axes=([0, 1], [0, 1])).real
    scale = max(b1.scale() + b2.scale() + bint.scale(), 1e-300)
    for name, s in (("1ph", s1), ("2ph", s2)):
        bad = np.max(np.abs(np.imag(s)), initial=0.0)
        if bad > rtol * max(scale, np.max(np.abs(s), initial=0.0)):
            raise ConsistencyError(f"{name} distribution has imaginary residue {bad:.3e}")
    total = s1.real + s2.real + si
    if return_parts:
        return total, {"1ph": s1.real, "2ph": s2.real, "int": si}
    return total


def write_beta_csv(path, tables) -> None:
    """Rows (part, e_k_eV, L, M, re, im) for every table in ``tables``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["part", "e_k_eV", "L", "M", "re", "im"])
        for t in tables:
            e = units.au_to_ev(t.e_k)
            for L in range(L_CAP + 1):
                for M in range(-L, L + 1):
                    v = t[L, M]
                    w.writerow([t.part.value, repr(e), L, M, repr(v.real), repr(v.imag)])
