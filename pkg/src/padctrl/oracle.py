"""Brute-force orientation averaging.

Amplitudes are built in the molecular frame for each orientation on an Euler
grid and their products are averaged numerically.  Nothing here uses the
D-product linearization or the triple-D integral: the only shared pieces with
:mod:`padctrl.betas` are the dipole tables and the time integrals.

Orientation convention: a vector with lab coordinates ``v'`` has molecular
coordinates ``G v'`` with ``G = rotation_matrix(g)``.  The lab-frame emission
direction ``k'`` thus appears as ``k_mol = G k'`` in the molecular-frame
partial-wave sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import EulerAngles, rotation_matrix, sph_harm, sph_harm_xyz, wigner_D, legendre_norm
from .pulses import FieldIntegrator, FieldSpec
from .structure import DipoleSet, OrbitalSet, continuum_at, lm_pairs

__all__ = [
    "EulerQuadrature",
    "TimeIntegrals",
    "time_integrals",
    "amp1_molframe",
    "amp2_molframe",
    "amp_labframe",
    "partial_wave_coefficients",
    "brute_force_pad",
    "brute_force_betas",
    "AngularQuadrature",
]

EIGHT_PI2 = 8.0 * math.pi**2
MU = (-1, 0, 1)


@dataclass(frozen=True)
class EulerQuadrature:
    """Product rule: trapezoid in alpha and gamma, Gauss-Legendre in cos(beta)."""

    n_alpha: int
    n_beta: int
    n_gamma: int

    def __post_init__(self):
        if min(self.n_alpha, self.n_beta, self.n_gamma) < 2:
            raise ValueError("every Euler node count must be >= 2")

    @classmethod
    def for_lmax(cls, l_max: int, extra: int = 0) -> "EulerQuadrature":
        """Smallest grid at which averages up to second order are exact."""
        n = 4 * l_max + 5 + extra
        return cls(n, 2 * l_max + 3 + extra, n)

    def nodes(self):
        a = 2.0 * np.pi * np.arange(self.n_alpha) / self.n_alpha
        c = 2.0 * np.pi * np.arange(self.n_gamma) / self.n_gamma
        x, wb = np.polynomial.legendre.leggauss(self.n_beta)
        b = np.arccos(x)
        A, B, C = np.meshgrid(a, b, c, indexing="ij")
        W = (2.0 * np.pi / self.n_alpha) * (2.0 * np.pi / self.n_gamma) * wb[None, :, None]
        W = np.broadcast_to(W, A.shape)
        return A.ravel(), B.ravel(), C.ravel(), W.ravel().copy()


@dataclass(frozen=True)
class AngularQuadrature:
    """Gauss-Legendre in cos(theta) times trapezoid in phi on the unit sphere."""

    n_theta: int
    n_phi: int

    @classmethod
    def for_lmax(cls, l_max: int) -> "AngularQuadrature":
        return cls(2 * l_max + 2, 4 * l_max + 2)

    def nodes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        ph = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        T, P = np.meshgrid(np.arccos(x), ph, indexing="ij")
        W = np.broadcast_to(w[:, None] * (2.0 * np.pi / self.n_phi), T.shape)
        return T.ravel(), P.ravel(), W.ravel().copy()


@dataclass(frozen=True)
class TimeIntegrals:
    """Orientation-independent inputs at one photoelectron energy."""

    I1: np.ndarray          # (3,) over mu0
    F: np.ndarray           # (n_p, 3, 3) over (p, mu0, nu0)
    r_i0: np.ndarray        # (n_lm, 3) bound-continuum from i0
    S: np.ndarray           # (n_lm, 3, 3, n_p) two-photon dipole products S^p[lm, mu, nu]


def time_integrals(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float,
                   integrator: FieldIntegrator | None = None) -> TimeIntegrals:
    eps = orb.energies
    i0 = orb.i0_index
    ps = orb.intermediates
    if integrator is None:
        f = max(abs(e_k - eps[p]) + abs(eps[p] - eps[i0]) for p in ps)
        integrator = FieldIntegrator(spec, max(f, e_k - eps[i0]))
    I1 = integrator.one_photon(e_k - eps[i0])
    F = np.stack([integrator.two_photon(e_k, eps[p], eps[i0]) for p in ps])
    bc = continuum_at(dip, e_k)
    perm = sum(dip.bb[i, i] for i in orb.occupied_indices)
    S = np.empty((dip.n_lm, 3, 3, len(ps)), dtype=complex)
    for j, p in enumerate(ps):
        nu_part = perm if p == i0 else dip.bb[p, i0]
        S[..., j] = bc[p][:, :, None] * nu_part[None, None, :]
    return TimeIntegrals(I1=I1, F=F, r_i0=bc[i0], S=S)


def _d1(g) -> np.ndarray:
    """D^1_{mu, kappa}(g) stacked as [..., mu+1, kappa+1]."""
    rows = [np.stack(np.broadcast_arrays(*[wigner_D(1, m, k, g) for k in MU]), axis=-1) for m in MU]
    return np.stack(rows, axis=-2)


def _projector(g) -> np.ndarray:
    """P[mu, mu0] = (-1)^mu0 D^1_{mu,-mu0}(g)."""
    D = _d1(g)
    sign = np.array([-1.0, 1.0, -1.0])
    return D[..., ::-1] * sign


def partial_wave_coefficients(ti: TimeIntegrals, g):
    """Molecular-frame partial-wave coefficients c1[lm], c2[lm] at orientation(s) g."""
    P = _projector(g)
    eps1 = P @ ti.I1
    c1 = 1j * np.einsum("...u,lu->...l", eps1, ti.r_i0)
    T = np.einsum("lunp,pab->lunab", ti.S, ti.F)
    c2 = -np.einsum("...ua,...nb,lunab->...l", P, P, T)
    return c1, c2


def _eval_pw(c: np.ndarray, l_max: int, theta, phi) -> np.ndarray:
    Y = np.stack([sph_harm(l, m, theta, phi) for (l, m) in lm_pairs(l_max)], axis=-1)
    return np.sum(c * Y, axis=-1)


def amp1_molframe(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float, g,
                  theta_k, phi_k, ti: TimeIntegrals | None = None) -> complex:
    """First-order amplitude with emission direction given in the molecular frame."""
    ti = ti or time_integrals(orb, dip, spec, e_k)
    c1, _ = partial_wave_coefficients(ti, _as_tuple(g))
    return _eval_pw(c1, dip.l_max, theta_k, phi_k)


def amp2_molframe(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float, g,
                  theta_k, phi_k, ti: TimeIntegrals | None = None) -> complex:
    """Second-order amplitude (permanent-dipole and sequential terms)."""
    ti = ti or time_integrals(orb, dip, spec, e_k)
    _, c2 = partial_wave_coefficients(ti, _as_tuple(g))
    return _eval_pw(c2, dip.l_max, theta_k, phi_k)


def _as_tuple(g):
    if isinstance(g, EulerAngles):
        return (g.alpha, g.beta, g.gamma)
    return tuple(g)


def amp_labframe(coeffs: dict, g, theta_kp, phi_kp) -> complex:
    """Evaluate ``sum c_lm Y_lm(k_mol)`` at the lab direction ``k'`` by rotating
    each partial wave with conj(D^l_{m,m'}(g))."""
    gt = _as_tuple(g)
    out = 0j
    for (l, m), c in coeffs.items():
        for mp in range(-l, l + 1):
            out = out + c * np.conj(wigner_D(l, m, mp, gt)) * sph_harm(l, mp, theta_kp, phi_kp)
    return out


def _lab_dirs(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta) + 0 * phi], axis=-1)


def _averaged_products(orb, dip, spec, e_k, theta, phi, quad, ti):
    """Euler averages of |a1|^2, |a2|^2 and a1 conj(a2) at lab directions (theta, phi)."""
    ti = ti or time_integrals(orb, dip, spec, e_k)
    quad = quad or EulerQuadrature.for_lmax(dip.l_max)
    A, B, C, W = quad.nodes()
    c1, c2 = partial_wave_coefficients(ti, (A, B, C))  # (n_nodes, n_lm)
    kp = _lab_dirs(np.asarray(theta, float), np.asarray(phi, float))  # (n_dir, 3)
    G = rotation_matrix((A, B, C))  # (n_nodes, 3, 3)
    kmol = np.einsum("gij,dj->gdi", G, kp)
    Y = np.stack([sph_harm_xyz(l, m, kmol) for (l, m) in lm_pairs(dip.l_max)], axis=-1)
    a1 = np.einsum("gl,gdl->gd", c1, Y)
    a2 = np.einsum("gl,gdl->gd", c2, Y)
    w = W / EIGHT_PI2
    return (w @ np.abs(a1) ** 2, w @ np.abs(a2) ** 2, w @ (a1 * np.conj(a2)))


def brute_force_pad(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float, theta_grid,
                    phi: float = math.pi / 2, quad: EulerQuadrature | None = None,
                    ti: TimeIntegrals | None = None) -> dict:
    """Orientation-averaged PAD at (theta, phi), split into 1ph / 2ph / int parts."""
    th = np.asarray(theta_grid, dtype=float)
    p1, p2, x = _averaged_products(orb, dip, spec, e_k, th, np.full_like(th, phi), quad, ti)
    return {"1ph": p1, "2ph": p2, "int": 2.0 * x.real}


def brute_force_betas(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_k: float,
                      quad: EulerQuadrature | None = None, ang: AngularQuadrature | None = None,
                      L_max: int | None = None, ti: TimeIntegrals | None = None) -> dict:
    """Project the averaged products onto P^M_L(cos theta) exp(i M phi).

    Returns ``{"1ph": B1, "2ph": B2, "int": Bi}`` with complex arrays indexed
    ``[L, M + L_max]``; the int part is the coefficient of ``<a1 conj(a2)>``.
    """
    L_max = 2 * dip.l_max if L_max is None else L_max
    ang = ang or AngularQuadrature.for_lmax(dip.l_max)
    T, P, W = ang.nodes()
    p1, p2, x = _averaged_products(orb, dip, spec, e_k, T, P, quad, ti)
    out = {}
    for key, f in (("1ph", p1 + 0j), ("2ph", p2 + 0j), ("int", x)):
        tab = np.zeros((L_max + 1, 2 * L_max + 1), dtype=complex)
        for L in range(L_max + 1):
            for M in range(-L, L + 1):
                yc = np.conj(sph_harm(L, M, T, P))
                tab[L, M + L_max] = legendre_norm(L, M) * np.sum(W * f * yc)
        out[key] = tab
    return out
