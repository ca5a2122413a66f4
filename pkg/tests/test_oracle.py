from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import resonant_spec
from padctrl import units
from padctrl.angular import rotation_matrix, sph_harm, sph_harm_xyz, spherical_basis
from padctrl.betas import beta_tables
from padctrl.oracle import (AngularQuadrature, EulerQuadrature, _projector, amp1_molframe, amp2_molframe,
                            amp_labframe, brute_force_betas, brute_force_pad, partial_wave_coefficients,
                            time_integrals)
from padctrl.structure import lm_pairs, synth_hydrogenic

euler = st.tuples(st.floats(0, 2 * math.pi, exclude_max=True), st.floats(0, math.pi),
                  st.floats(0, 2 * math.pi, exclude_max=True))
E_K = units.ev_to_au(9.0)


@pytest.fixture(scope="module")
def setup(small):
    orb, dip = small
    spec = resonant_spec(orb, E_K, channels=("CRP", "LIN_Z", "CLP"))
    return orb, dip, spec, time_integrals(orb, dip, spec, E_K)


def test_quadrature_weights():
    for q in (EulerQuadrature(3, 2, 5), EulerQuadrature.for_lmax(2)):
        assert q.nodes()[3].sum() == pytest.approx(8 * math.pi**2, rel=1e-12)
    with pytest.raises(ValueError):
        EulerQuadrature(1, 4, 4)
    assert EulerQuadrature.for_lmax(2) == EulerQuadrature(13, 7, 13)


@settings(max_examples=25, deadline=None)
@given(euler)
def test_projector_matches_cartesian_rotation(g):
    """eps_mu = conj(e_mu) . (G field_cart) with field_cart = sum_mu0 I_mu0 conj(e_mu0)."""
    e = spherical_basis()
    G = rotation_matrix(g)
    ref = np.conj(e) @ G @ np.conj(e).T
    assert np.allclose(_projector(g), ref, atol=1e-14)


@settings(max_examples=10, deadline=None)
@given(euler)
def test_first_order_cartesian_path(setup, g):
    orb, dip, spec, ti = setup
    c1, _ = partial_wave_coefficients(ti, g)
    e = spherical_basis()
    field = rotation_matrix(g) @ (ti.I1 @ np.conj(e))   # molecular-frame field integral
    d_cart = ti.r_i0 @ np.conj(e)                                    # r_mu = e_mu . d
    assert np.allclose(c1, 1j * d_cart @ field, rtol=1e-13, atol=1e-18)


def test_zero_field(setup):
    orb, dip, spec, _ = setup
    z = spec.scaled(0.0)
    assert amp1_molframe(orb, dip, z, E_K, (0.3, 0.4, 0.5), 0.7, 0.2) == 0
    assert amp2_molframe(orb, dip, z, E_K, (0.3, 0.4, 0.5), 0.7, 0.2) == 0


def test_lin_z_identity_only_mu_zero(small):
    orb, dip = small
    spec = resonant_spec(orb, E_K)
    ti = time_integrals(orb, dip, spec, E_K)
    c1, _ = partial_wave_coefficients(ti, (0.0, 0.0, 0.0))
    assert np.allclose(c1, 1j * ti.I1[1] * ti.r_i0[:, 1], rtol=1e-14)


def test_amplitude_scaling(setup):
    orb, dip, spec, _ = setup
    g, th, ph = (0.3, 1.1, 2.0), 0.8, 0.4
    a1 = amp1_molframe(orb, dip, spec, E_K, g, th, ph)
    a2 = amp2_molframe(orb, dip, spec, E_K, g, th, ph)
    s = spec.scaled(2.0)
    assert amp1_molframe(orb, dip, s, E_K, g, th, ph) == pytest.approx(2 * a1, rel=1e-12)
    assert amp2_molframe(orb, dip, s, E_K, g, th, ph) == pytest.approx(4 * a2, rel=1e-12)


def test_labframe_identity_and_l0():
    rng = np.random.default_rng(0)
    coeffs = {(l, m): complex(*rng.normal(size=2)) for l, m in lm_pairs(3)}
    th, ph = 0.9, 2.2
    direct = sum(c * sph_harm(l, m, th, ph) for (l, m), c in coeffs.items())
    assert amp_labframe(coeffs, (0.0, 0.0, 0.0), th, ph) == pytest.approx(direct, abs=1e-13)
    assert amp_labframe({(0, 0): 2.0}, (1.0, 2.0, 0.5), th, ph) == pytest.approx(2 / math.sqrt(4 * math.pi))


@settings(max_examples=20, deadline=None)
@given(euler, st.floats(0.05, 3.1), st.floats(0, 6.28))
def test_labframe_two_paths(g, th, ph):
    """Rotating the expansion equals evaluating the unrotated one at k_mol = G k'."""
    rng = np.random.default_rng(1)
    coeffs = {(l, m): complex(*rng.normal(size=2)) for l, m in lm_pairs(3)}
    kp = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    km = rotation_matrix(g) @ kp
    ref = sum(c * sph_harm_xyz(l, m, km) for (l, m), c in coeffs.items())
    assert amp_labframe(coeffs, g, th, ph) == pytest.approx(ref, abs=1e-12)


def test_parseval(setup):
    orb, dip, spec, ti = setup
    b1, b2, bi = beta_tables(orb, dip, spec, E_K)
    T, P, W = AngularQuadrature.for_lmax(dip.l_max).nodes()
    tot = 0.0
    for ph in np.unique(P):
        sel = P == ph
        r = brute_force_pad(orb, dip, spec, E_K, T[sel], ph, ti=ti)
        tot += np.sum(W[sel] * (r["1ph"] + r["2ph"] + r["int"]))
    ref = 4 * math.pi * (b1[0, 0] + b2[0, 0] + 2 * bi[0, 0].real).real
    assert tot == pytest.approx(ref, rel=1e-8)


def test_convergence_beyond_threshold(setup):
    orb, dip, spec, ti = setup
    th = np.linspace(0.1, 3.0, 7)
    a = brute_force_pad(orb, dip, spec, E_K, th, 0.3, quad=EulerQuadrature.for_lmax(dip.l_max), ti=ti)
    b = brute_force_pad(orb, dip, spec, E_K, th, 0.3, quad=EulerQuadrature.for_lmax(dip.l_max, extra=5), ti=ti)
    for k in a:
        assert np.max(np.abs(a[k] - b[k])) < 1e-10 * np.max(np.abs(b[k]))
    # too few beta nodes is visibly wrong
    c = brute_force_pad(orb, dip, spec, E_K, th, 0.3, quad=EulerQuadrature(13, 2, 13), ti=ti)
    assert np.max(np.abs(c["2ph"] - b["2ph"])) > 1e-6 * np.max(np.abs(b["2ph"]))


def test_pad_parts_are_real_and_positive(setup):
    orb, dip, spec, ti = setup
    r = brute_force_pad(orb, dip, spec, E_K, np.linspace(0, math.pi, 9), 1.0, ti=ti)
    assert np.all(r["1ph"] >= 0) and np.all(r["2ph"] >= 0)
    assert np.all(np.abs(r["int"]) <= 2 * np.sqrt(r["1ph"] * r["2ph"]) * (1 + 1e-9))


def test_achiral_surrogate_has_no_odd_one_photon_terms():
    orb, dip = synth_hydrogenic(l_max=2, k_grid=np.linspace(2, 20, 19), n_virtual=2, seed=3, m_symmetric=True)
    spec = resonant_spec(orb, E_K, channels=("CRP", "CRP", "CRP"))
    ref = brute_force_betas(orb, dip, spec, E_K)["1ph"]
    Lm = ref.shape[0] - 1
    assert abs(ref[1, Lm]) < 1e-10 * np.max(np.abs(ref))
    # generic dipoles do show the circular-dichroism-like term
    orb, dip = synth_hydrogenic(l_max=2, k_grid=np.linspace(2, 20, 19), n_virtual=2, seed=3)
    ref = brute_force_betas(orb, dip, spec, E_K)["1ph"]
    assert abs(ref[1, Lm]) > 1e-3 * np.max(np.abs(ref))
