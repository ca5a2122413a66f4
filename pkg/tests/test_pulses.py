from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padctrl import units
from padctrl.errors import ConfigError
from padctrl.pulses import (Channel, FieldIntegrator, FieldSpec, SubPulse, cartesian_field, eval_field, helicity,
                            one_photon_integral, power_spectrum, spherical_components, time_frequency_map,
                            two_photon_integral)

W = units.ev_to_au(10.0)


def pulse(**kw):
    base = dict(E0=0.01, omega=W, phi=0.0, tau=0.0, sigma=100.0, channel="LIN_Z")
    base.update(kw)
    return SubPulse(**base)


def test_subpulse_validation():
    with pytest.raises(ConfigError):
        pulse(sigma=0.0)
    with pytest.raises(ConfigError):
        pulse(E0=-1.0)
    with pytest.raises(ConfigError):
        pulse(channel="ELLIPTIC")
    assert pulse().channel is Channel.LIN_Z
    assert pulse().fwhm == pytest.approx(100.0 * 2 * math.sqrt(2 * math.log(2)))


def test_lin_z_peak():
    s = eval_field(FieldSpec((pulse(tau=30.0),)), 30.0)
    assert s.e_zero == pytest.approx(0.01)
    assert s.e_plus == 0 and s.e_minus == 0


def test_circular_peaks():
    crp = cartesian_field(FieldSpec((pulse(channel="CRP"),)), 0.0)
    clp = cartesian_field(FieldSpec((pulse(channel="CLP"),)), 0.0)
    assert np.allclose(crp, [-0.01, 0.0, 0.0], atol=1e-16)
    assert np.allclose(clp, [0.01, 0.0, 0.0], atol=1e-16)
    # quarter period later both have rotated towards -y
    t = math.pi / (2 * W)
    assert cartesian_field(FieldSpec((pulse(channel="CRP"),)), t)[1] < 0
    assert cartesian_field(FieldSpec((pulse(channel="CLP"),)), t)[1] < 0


@settings(max_examples=20, deadline=None)
@given(st.floats(-300, 300), st.sampled_from(["LIN_Z", "CRP", "CLP"]))
def test_cartesian_matches_basis_expansion(t, ch):
    from padctrl.angular import spherical_basis
    spec = FieldSpec((pulse(channel=ch, phi=1.1), pulse(channel="CLP", omega=1.3 * W, tau=-20.0)))
    comps = spherical_components(spec, t)
    ref = sum(comps[k] * np.conj(spherical_basis()[k]) for k in range(3))
    assert np.allclose(cartesian_field(spec, t), ref.real, atol=1e-16)
    assert np.allclose(ref.imag, 0.0, atol=1e-16)


def test_crp_clp_pair_is_linear():
    spec = FieldSpec((pulse(channel="CRP", phi=0.4), pulse(channel="CLP", phi=0.4)))
    t = np.linspace(-300, 300, 100)
    e = cartesian_field(spec, t)
    # direct cartesian sum of the two rotating vectors
    h = 0.01 * np.exp(-t**2 / (2 * 100.0**2))
    om = W * t + 0.4
    ref = np.stack([-h * np.cos(om) + h * np.cos(om), -2 * h * np.sin(om), 0 * t], axis=-1)
    assert np.allclose(e, ref, atol=1e-12)
    assert np.allclose(e[:, [0, 2]], 0.0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-200, 200), st.floats(0, 2 * math.pi), st.sampled_from(["LIN_Z", "CRP", "CLP"]))
def test_field_is_real(t, phi, ch):
    spec = FieldSpec((pulse(channel=ch, phi=phi), pulse(channel="CRP", omega=2 * W, tau=40.0)))
    comps = spherical_components(spec, t)
    # E_{-1} = -conj(E_{+1}) and E_0 real for a real vector field
    assert comps[0] == pytest.approx(-np.conj(comps[2]), abs=1e-15)
    assert abs(comps[1].imag) < 1e-15


def test_json_round_trip(tmp_path):
    spec = FieldSpec((pulse(channel="CRP", phi=0.3, tau=12.0), pulse(E0=0.002, omega=2 * W)))
    path = tmp_path / "f.json"
    spec.dump_json(path)
    back = FieldSpec.load_json(path)
    for a, b in zip(spec.pulses, back.pulses):
        assert a.channel == b.channel
        for k in ("E0", "omega", "phi", "tau", "sigma"):
            assert getattr(b, k) == pytest.approx(getattr(a, k), rel=1e-14)
    recs = json.loads(path.read_text())
    assert FieldSpec.from_records({"pulses": recs["pulses"] if isinstance(recs, dict) else recs})


def test_json_bad_record(tmp_path):
    p = tmp_path / "f.json"
    p.write_text('[{"omega_eV": 10}]')
    with pytest.raises(ConfigError):
        FieldSpec.load_json(p)


def test_helicity_contract():
    t = np.linspace(-250, 250, 51)
    assert np.all(helicity(FieldSpec((pulse(channel="CRP"),)), W, t) == 1.0)
    assert np.all(helicity(FieldSpec((pulse(channel="CLP"),)), W, t) == -1.0)
    bal = FieldSpec((pulse(channel="CRP"), pulse(channel="CLP", phi=2.0)))
    assert np.allclose(helicity(bal, W, t), 0.0, atol=1e-15)


def test_helicity_errors_and_gaps():
    spec = FieldSpec((pulse(channel="CRP"),))
    with pytest.raises(LookupError):
        helicity(spec, 2 * W, 0.0)
    with pytest.raises(LookupError):
        helicity(FieldSpec((pulse(),)), W, 0.0)
    assert helicity(spec, W, 1e5) is None
    z = helicity(spec, W, np.array([0.0, 1e5]))
    assert z[0] == 1.0 and np.isnan(z[1])


def test_one_photon_closed_form():
    sig, E0, phi = 120.0, 0.01, 0.7
    spec = FieldSpec((pulse(sigma=sig, E0=E0, phi=phi, tau=25.0),))
    for d in (W, W + 0.003, -W):
        got = one_photon_integral(spec, 0, d)
        ref = 0.0
        for s in (1, -1):
            ref += 0.5 * E0 * sig * math.sqrt(2 * math.pi) * np.exp(1j * s * phi) * \
                np.exp(1j * d * 25.0) * np.exp(-0.5 * sig**2 * (d + s * W) ** 2)
        assert got == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_one_photon_examples():
    spec = FieldSpec((pulse(sigma=100.0),))
    assert one_photon_integral(spec, 1, W) == 0
    peak = abs(one_photon_integral(spec, 0, W))
    far = abs(one_photon_integral(spec, 0, W + 5.0 / 100.0))
    assert far < math.exp(-12.5) * peak * 1.01


def test_two_photon_zero_channel():
    spec = FieldSpec((pulse(),))
    assert two_photon_integral(spec, 1, 0, 0.5, 0.1, -0.4) == 0


def test_two_photon_factorizes():
    e_i0, e_p, e_k = -0.44, -0.18, 0.37
    inner = SubPulse(0.01, e_p - e_i0, 0.2, -600.0, 60.0, "CRP")
    outer = SubPulse(0.01, e_k - e_p, 0.9, 600.0, 60.0, "LIN_Z")
    spec = FieldSpec((inner, outer))
    F = two_photon_integral(spec, 0, -1, e_k, e_p, e_i0)
    Io = one_photon_integral(FieldSpec((outer,)), 0, e_k - e_p)
    Ii = one_photon_integral(FieldSpec((inner,)), -1, e_p - e_i0)
    assert F == pytest.approx(Io * Ii, rel=1e-8)
    assert abs(F) == pytest.approx(abs(Io) * abs(Ii), rel=1e-8)
    # wrong time order: the LIN_Z photon cannot come first
    assert abs(two_photon_integral(spec, -1, 0, e_k, e_p, e_i0)) < 1e-12 * abs(F)


def test_integrator_refinement_agrees():
    spec = FieldSpec((pulse(channel="CRP", sigma=80.0), pulse(omega=1.7 * W, tau=50.0, sigma=140.0)))
    e_i0 = -0.5
    e_p = e_i0 + W
    e_k = e_p + 1.7 * W
    a = FieldIntegrator(spec, 1.0).two_photon(e_k, e_p, e_i0)
    b = FieldIntegrator(spec, 1.0, refine=3).two_photon(e_k, e_p, e_i0)
    assert np.max(np.abs(b)) > 1.0
    assert np.allclose(a, b, rtol=0, atol=1e-11 * np.max(np.abs(b)))


def test_spectrum_peak_and_width():
    sig = 150.0
    spec = FieldSpec((pulse(sigma=sig),))
    om = np.linspace(W - 8 / sig, W + 8 / sig, 801)
    sp = power_spectrum(spec, om)
    d = om[1] - om[0]
    assert abs(om[np.argmax(sp.intensity)] - W) <= 2 * d
    amp = np.sqrt(sp.intensity / sp.intensity.max())
    above = om[amp >= 0.5]
    assert abs((above[-1] - above[0]) - 2 * math.sqrt(2 * math.log(2)) / sig) <= 2 * d


def test_spectrum_two_peaks_and_nyquist():
    spec = FieldSpec((pulse(), pulse(omega=1.5 * W)))
    om = np.linspace(0.5 * W, 2 * W, 600)
    I = power_spectrum(spec, om).intensity
    peaks = [i for i in range(1, om.size - 1) if I[i] > I[i - 1] and I[i] > I[i + 1] and I[i] > 0.1 * I.max()]
    assert len(peaks) == 2
    assert om[peaks[0]] == pytest.approx(W, abs=0.01) and om[peaks[1]] == pytest.approx(1.5 * W, abs=0.01)
    with pytest.raises(ConfigError):
        power_spectrum(spec, om, samples_per_period=1)


def test_spectrogram_blob_positions():
    spec = FieldSpec((pulse(tau=-300.0, sigma=80.0), pulse(tau=300.0, sigma=80.0)))
    t = np.linspace(-700, 700, 141)
    om = np.linspace(0.7 * W, 1.3 * W, 41)
    S = time_frequency_map(spec, t, om)
    prof = S.sum(axis=1)
    left = t[np.argmax(np.where(t < 0, prof, 0))]
    right = t[np.argmax(np.where(t > 0, prof, 0))]
    assert right - left == pytest.approx(600.0, abs=2 * (t[1] - t[0]))
    assert om[np.argmax(S.sum(axis=0))] == pytest.approx(W, abs=om[1] - om[0])


def test_window_and_scaling():
    spec = FieldSpec((pulse(tau=-50.0, sigma=10.0), pulse(tau=80.0, sigma=20.0)))
    lo, hi = spec.window()
    for p in spec.pulses:
        assert lo <= p.tau - 8 * p.sigma and hi >= p.tau + 8 * p.sigma
    assert spec.scaled(3.0).pulses[1].E0 == pytest.approx(0.03)
