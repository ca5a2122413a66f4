from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy.physics.wigner import wigner_3j as sympy_3j

from padctrl.angular import (AngularKey, EulerAngles, assoc_legendre, d_product_linearization, rotation_matrix,
                             sph_harm, sph_harm_xyz, spherical_basis, triple_D_integral, w3j, wigner3j, wigner_d,
                             wigner_D)
from padctrl.oracle import EulerQuadrature


@st.composite
def keys(draw, jmax=6):
    j1 = draw(st.integers(0, jmax))
    j2 = draw(st.integers(0, jmax))
    j3 = draw(st.integers(abs(j1 - j2), j1 + j2))
    m1 = draw(st.integers(-j1, j1))
    m2 = draw(st.integers(-j2, j2))
    m3 = -m1 - m2
    if abs(m3) > j3:
        m3 = draw(st.integers(-j3, j3))
    return j1, j2, j3, m1, m2, m3


euler = st.tuples(st.floats(0, 2 * math.pi, exclude_max=True), st.floats(0, math.pi),
                  st.floats(0, 2 * math.pi, exclude_max=True))


def test_spec_values():
    assert w3j(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2 / 15), abs=1e-10)
    assert w3j(1, 1, 2, 0, 0, 0) == pytest.approx(0.3651483717, abs=1e-10)
    assert w3j(1, 1, 1, 0, 0, 0) == 0.0
    assert w3j(1, 2, 4, 0, 0, 0) == 0.0


def test_half_integer_key():
    k = AngularKey.from_values(0.5, 0.5, 1, 0.5, -0.5, 0)
    assert wigner3j(k) == pytest.approx(float(sympy_3j(sympy_half(), sympy_half(), 1, sympy_half(), -sympy_half(), 0)))


def sympy_half():
    from sympy import Rational
    return Rational(1, 2)


def test_key_validation():
    with pytest.raises(ValueError):
        AngularKey(2, 2, 2, 4, 0, 0)
    with pytest.raises(ValueError):
        AngularKey(2, 2, 2, 1, 0, 0)
    with pytest.raises(ValueError):
        EulerAngles(0.0, 4.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(keys())
def test_matches_sympy(k):
    assert w3j(*k) == pytest.approx(float(sympy_3j(*k)), abs=1e-13)


@settings(max_examples=1000, deadline=None)
@given(keys())
def test_symmetries(k):
    j1, j2, j3, m1, m2, m3 = k
    v = w3j(*k)
    s = (-1) ** (j1 + j2 + j3)
    assert w3j(j2, j3, j1, m2, m3, m1) == pytest.approx(v, abs=1e-14)
    assert w3j(j3, j1, j2, m3, m1, m2) == pytest.approx(v, abs=1e-14)
    assert w3j(j2, j1, j3, m2, m1, m3) == pytest.approx(s * v, abs=1e-14)
    assert w3j(j1, j3, j2, m1, m3, m2) == pytest.approx(s * v, abs=1e-14)
    assert w3j(j1, j2, j3, -m1, -m2, -m3) == pytest.approx(s * v, abs=1e-14)


@pytest.mark.parametrize("j1,j2", [(1, 1), (2, 1), (2, 3), (3, 3)])
def test_orthogonality(j1, j2):
    for j3 in range(abs(j1 - j2), j1 + j2 + 1):
        for j3p in range(abs(j1 - j2), j1 + j2 + 1):
            for m3 in range(-j3, j3 + 1):
                for m3p in range(-j3p, j3p + 1):
                    tot = sum((2 * j3 + 1) * w3j(j1, j2, j3, m1, m2, m3) * w3j(j1, j2, j3p, m1, m2, m3p)
                              for m1 in range(-j1, j1 + 1) for m2 in range(-j2, j2 + 1))
                    assert tot == pytest.approx(float(j3 == j3p and m3 == m3p), abs=1e-12)


def test_small_d_examples():
    assert wigner_d(1, 0, 0, 0.0) == pytest.approx(1.0)
    assert wigner_d(1, 1, 1, math.pi) == pytest.approx(0.0, abs=1e-15)
    assert wigner_d(2, 0, 0, math.pi / 3) == pytest.approx(-0.125, abs=1e-14)
    with pytest.raises(ValueError):
        wigner_d(1, 2, 0, 0.1)


def test_big_D_examples():
    assert wigner_D(1, 0, 0, (1.3, 0.0, 2.1)) == pytest.approx(1.0)
    assert wigner_D(1, 1, 1, (math.pi / 2, 0.0, 0.0)) == pytest.approx(-1j)


@settings(max_examples=40, deadline=None)
@given(euler, st.integers(0, 4))
def test_D_unitary(g, l):
    D = np.array([[wigner_D(l, m, mp, g) for mp in range(-l, l + 1)] for m in range(-l, l + 1)])
    assert np.allclose(D @ D.conj().T, np.eye(2 * l + 1), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(euler, st.integers(0, 3), st.floats(0.1, 3.0), st.floats(0.0, 6.0))
def test_D_rotates_harmonics(g, l, th, ph):
    """Y_lm(R^-1 r) = sum_m' D^l_{m',m}(R) Y_lm'(r)."""
    R = rotation_matrix(g)
    r = np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
    for m in range(-l, l + 1):
        lhs = sph_harm_xyz(l, m, R.T @ r)
        rhs = sum(wigner_D(l, mp, m, g) * sph_harm_xyz(l, mp, r) for mp in range(-l, l + 1))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_harmonics_examples():
    assert sph_harm(0, 0, 0.3, 1.2) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert sph_harm(0, 0, 0.3, 1.2) == pytest.approx(0.2820947918, abs=1e-10)
    assert sph_harm(1, 0, math.pi / 2, 0.7) == pytest.approx(0.0, abs=1e-16)
    x, w = np.polynomial.legendre.leggauss(12)
    ph = 2 * math.pi * np.arange(16) / 16
    T, P = np.meshgrid(np.arccos(x), ph, indexing="ij")
    W = w[:, None] * (2 * math.pi / 16)
    assert np.sum(W * np.abs(sph_harm(2, 1, T, P)) ** 2) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_harmonic_conjugation(l, th, ph):
    for m in range(-l, l + 1):
        assert sph_harm(l, m, th, ph) == pytest.approx((-1) ** m * np.conj(sph_harm(l, -m, th, ph)), abs=1e-13)


def test_legendre_examples():
    assert assoc_legendre(1, 0, 0.3) == pytest.approx(0.3)
    assert assoc_legendre(1, 1, 0.0) == pytest.approx(-1.0)
    # three-term recurrence in L for M = 2
    x, M = 0.5, 2
    P = {2: 3 * (1 - x * x)}
    P[3] = x * (2 * 2 + 1) * P[2]
    P[4] = ((2 * 3 + 1) * x * P[3] - (3 + M) * P[2]) / (4 - M)
    assert assoc_legendre(4, 2, x) == pytest.approx(P[4], rel=1e-13)
    with pytest.raises(ValueError):
        assoc_legendre(2, 1, 1.5)


def test_linearization_examples():
    terms = dict(d_product_linearization(1, 0, 0, 1, 0, 0))
    assert sorted(terms) == [0, 1, 2]
    assert terms[1] == 0.0
    assert sorted(dict(d_product_linearization(2, 1, 0, 3, -1, 2))) == [1, 2, 3, 4, 5]


def test_linearization_identity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = (rng.uniform(0, 2 * math.pi), rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
        l1, l2 = 2, 1
        m1, mp1, m2, mp2 = 1, -2, 0, 1
        direct = wigner_D(l1, m1, mp1, g) * wigner_D(l2, m2, mp2, g)
        expanded = sum(w * wigner_D(l, m1 + m2, mp1 + mp2, g) for l, w in d_product_linearization(l1, m1, mp1, l2, m2, mp2))
        assert expanded == pytest.approx(direct, abs=1e-12)


def test_triple_examples():
    assert triple_D_integral(0, 0, 0, 0, 0, 0, 0, 0, 0) == 1.0
    assert triple_D_integral(1, 1, 0, 1, 0, 0, 1, 0, 0) == 0.0


def test_triple_vs_quadrature():
    rng = np.random.default_rng(5)
    A, B, C, W = EulerQuadrature(14, 8, 14).nodes()
    for _ in range(25):
        ls = rng.integers(0, 4, size=2)
        l3 = int(rng.integers(abs(ls[0] - ls[1]), ls[0] + ls[1] + 1))
        l1, l2 = int(ls[0]), int(ls[1])
        m1, m2 = int(rng.integers(-l1, l1 + 1)), int(rng.integers(-l2, l2 + 1))
        n1, n2 = int(rng.integers(-l1, l1 + 1)), int(rng.integers(-l2, l2 + 1))
        m3, n3 = -m1 - m2, -n1 - n2
        if abs(m3) > l3 or abs(n3) > l3:
            continue
        f = wigner_D(l1, m1, n1, (A, B, C)) * wigner_D(l2, m2, n2, (A, B, C)) * wigner_D(l3, m3, n3, (A, B, C))
        num = np.sum(W * f) / (8 * math.pi ** 2)
        assert num == pytest.approx(triple_D_integral(l1, m1, n1, l2, m2, n2, l3, m3, n3), abs=1e-8)


def test_spherical_basis():
    e = spherical_basis()
    assert np.allclose(e[2], -np.array([1, 1j, 0]) / math.sqrt(2))
    assert np.allclose(e[0], np.array([1, -1j, 0]) / math.sqrt(2))
    assert np.allclose(e @ e.conj().T, np.eye(3))


@settings(max_examples=30, deadline=None)
@given(euler)
def test_rotation_matrix_orthogonal(g):
    R = rotation_matrix(g)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-14)
    assert np.linalg.det(R) == pytest.approx(1.0)
