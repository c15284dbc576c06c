import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ALL_PROFILES, CLOSED_FAMILIES, SQRT3, bump_pair, grid
from smatrix_lab import (INF, EvenBox, Model, OddBox, PairFn, PolyExp, Zero, boundary_mean,
                         c_coeff, eigenfunction_u, free_resolvent, krein_resolvent,
                         weyl_titchmarsh, weyl_titchmarsh_deriv)
from smatrix_lab.errors import AtPole, NotLowerHalfPlane, UnsupportedFamily, ZeroSpectralParameter
from smatrix_lab.quad import complex_derivative
from smatrix_lab.spectral import eigenfunction_pair, weyl_titchmarsh_dz

import oracles

lower = st.tuples(st.floats(-3, 3), st.floats(-3, -0.1)).map(lambda t: complex(*t))
GRID25 = grid((-2.5, 2.5), (-2.5, -0.3), 5, 5)

# W(z^2) from the defining inner products, Green-kernel oracle (tests/oracles.py)
W_ORACLE = [
    (EvenBox(1 + 1j, 1.0), 0.7 - 0.9j, -3.643831051592092 - 0.9393012564986853j),
    (OddBox(2j, 1.0), 0.7 - 0.9j, -0.5431815427299471 - 1.9961374742475217j),
    (PolyExp((8j,)), -0.5 - 1.2j, 8.938538912540844 + 6.434593814289726j),
    (PolyExp((0.5 - 0.3j, 1.0, 0.2j)), 0.7 - 0.9j, -2.505385277543849 - 1.357111608742903j),
]

# c(mu, q_j) = -2 Im(mu) (u_mu, psi_j(B) exp(-i mu x)), same oracle, mu = 0.7 - 0.9i
C_ORACLE = [
    (OddBox(2j, 1.0), 1, 0.07647968672354104 - 0.6079346104943221j),
    (OddBox(2j, 1.0), 2, 0.5454435689554892 + 0.08409587869610623j),
    (EvenBox(1 + 1j, 1.0), 1, 0.020713034983920953 - 0.317686017638728j),
    (PolyExp((0.5 - 0.3j, 1.0, 0.2j)), 1, -0.04474124937417987 - 0.01867733239077559j),
    (PolyExp((0.5 - 0.3j, 1.0, 0.2j)), 2, 0.038242310564920716 - 0.02301788555633113j),
]


def exp_pair():
    return PairFn(lambda x: np.stack([np.exp(-x)] * 2), decay=1.0)


def test_free_resolvent_exponential():
    z = 0.6 - 1.3j
    x = np.linspace(0, 6, 13)
    got = free_resolvent(exp_pair(), z, x)
    want = (np.exp(-1j * z * x) - np.exp(-x)) / (1 + z * z)
    assert np.allclose(got, [want, want], atol=1e-12)


def test_free_resolvent_box():
    M, rho, mu = 1.5 - 0.5j, 1.2, -0.8 - 0.6j
    p = EvenBox(M, rho)
    x = np.array([0.0, 0.4, 1.19, 1.2, 1.7, 3.0])
    m = np.minimum(x, rho)
    want = -(M / (2 * mu * mu)) * (
        (np.exp(-1j * mu * rho) + np.exp(1j * mu * m) - 2) * np.exp(-1j * mu * x)
        + (np.exp(-1j * mu * m) - np.exp(-1j * mu * rho)) * np.exp(1j * mu * x))
    got = free_resolvent(p.pair(), mu, x)
    assert np.allclose(got, [want, want], atol=1e-12)


def test_free_resolvent_against_green_kernel():
    f1 = lambda x: x * np.exp(-2 * x) + 0j  # noqa: E731
    f2 = lambda x: np.cos(3 * x) * np.exp(-x) * 1j  # noqa: E731
    pair = PairFn(lambda x: np.stack([f1(x), f2(x)]), decay=1.0)
    z = -1.1 - 0.4j
    x = np.array([0.3, 1.0, 2.5])
    got = free_resolvent(pair, z, x)
    for k, xx in enumerate(x):
        assert abs(got[0, k] - oracles.resolvent(f1, z, xx, 40.0)) < 1e-10
        assert abs(got[1, k] - oracles.resolvent(f2, z, xx, 40.0)) < 1e-10


@given(lower, st.integers(0, 3))
def test_free_resolvent_vanishes_at_zero(z, which):
    f = [exp_pair(), EvenBox(1 + 1j, 0.8).pair(), PolyExp((1, 2j)).pair(),
         OddBox(-1j, 1.5).pair()][which]
    assert np.all(np.abs(free_resolvent(f, z, np.array([0.0]))) < 1e-12)


def test_eigenfunction_zero_profile():
    mu = 0.3 - 0.7j
    x = np.linspace(0, 4, 9)
    e = np.exp(-1j * mu * x)
    assert np.allclose(eigenfunction_u(Model(1.0, Zero()), mu, x), [e, e])


@pytest.mark.parametrize("name", sorted(ALL_PROFILES) + ["numeric"])
@pytest.mark.parametrize("seed", range(20))
def test_eigenfunction_boundary_mean(name, seed):
    p = bump_pair() if name == "numeric" else ALL_PROFILES[name]
    rng = np.random.default_rng(seed)
    mu = complex(rng.uniform(-3, 3), rng.uniform(-3, -0.1))
    assert abs(boundary_mean(eigenfunction_pair(p, mu)) - 1) < 1e-8


def test_silent_eigenfunction_shape():
    M, rho = 2 + 1j, math.pi
    z0 = min(oracles.silent_roots(M, rho), key=lambda r: r.imag)
    x = np.linspace(0, rho, 11)
    q = EvenBox(M, rho).q(x)
    want = (1 - np.cos(z0 * (rho - x))) / z0 ** 2 * q
    assert np.allclose(eigenfunction_u(EvenBox(M, rho), z0, x), want, atol=1e-10)


def test_w_examples():
    assert abs(weyl_titchmarsh(Zero(), -1j) + 2) < 1e-15
    assert abs(weyl_titchmarsh(PolyExp((8j,)), -1j) - 14) < 1e-13
    assert abs(weyl_titchmarsh(PolyExp((8j,)), -1j, method="quad") - 14) < 1e-9


@pytest.mark.parametrize("profile,z,want", W_ORACLE, ids=lambda v: getattr(v, "kind", ""))
def test_w_against_oracle(profile, z, want):
    assert abs(weyl_titchmarsh(profile, z) - want) < 1e-9 * abs(want)
    assert abs(weyl_titchmarsh(profile, z, method="quad") - want) < 1e-9 * abs(want)


def test_w_closed_formulas():
    z = 0.7 - 0.9j
    M, rho = 1 + 1j, 1.0
    e = cmath.exp(-1j * z * rho)
    tail = abs(M) ** 2 / (1j * z ** 3) * ((e - 2) ** 2 - 2j * z * rho - 1)
    even = -2j * z - 4 * M.real / (1j * z) * (1 - e) + tail
    assert abs(weyl_titchmarsh(EvenBox(M, rho), z) - even) < 1e-14
    assert abs(weyl_titchmarsh(OddBox(M, rho), z) - (-2j * z + tail)) < 1e-14


def test_w_vectorised():
    z = np.array(GRID25)
    w = weyl_titchmarsh(EvenBox(1 + 1j, 1.0), z)
    assert w.shape == z.shape
    assert np.allclose(w, [weyl_titchmarsh(EvenBox(1 + 1j, 1.0), t) for t in z], rtol=1e-14)


@pytest.mark.parametrize("name", sorted(CLOSED_FAMILIES))
def test_w_closed_vs_quadrature(name):
    p = CLOSED_FAMILIES[name]
    for z in GRID25:
        a = weyl_titchmarsh(p, z, method="closed")
        b = weyl_titchmarsh(p, z, method="quad")
        assert abs(a - b) <= 1e-8 * abs(a)


@pytest.mark.parametrize("name", sorted(CLOSED_FAMILIES))
def test_c_closed_vs_quadrature(name):
    p = CLOSED_FAMILIES[name]
    for z in GRID25:
        for j in (1, 2):
            a = c_coeff(p, z, j, method="closed")
            b = c_coeff(p, z, j, method="quad")
            assert abs(a - b) <= 1e-8 * max(abs(a), 1e-3)


@pytest.mark.parametrize("profile,j,want", C_ORACLE, ids=lambda v: getattr(v, "kind", ""))
def test_c_against_oracle(profile, j, want):
    assert abs(c_coeff(profile, 0.7 - 0.9j, j) - want) < 1e-10


def test_c_examples():
    assert c_coeff(Zero(), 0.4 - 2j, 1) == 1
    v = c_coeff(EvenBox(1, 1.0), -1j, 1)
    assert abs(v - math.exp(-1) * (2 - math.cosh(1))) < 1e-14
    assert abs(v - 0.1680912) < 1e-7
    M = 0.3 + 2.5j
    assert abs(c_coeff(PolyExp((M,)), -2j, 2) - (3 + M) / 9) < 1e-14
    mu, rho, M = 0.4 - 0.8j, 1.3, 1 - 2j
    kap = 1 - cmath.cos(mu * rho)
    base = cmath.exp(-1j * mu * rho)
    assert abs(c_coeff(OddBox(M, rho), mu, 1) - base * (1 - kap * M / mu ** 2)) < 1e-14
    assert abs(c_coeff(OddBox(M, rho), mu, 2) - base * (1 + kap * M / mu ** 2)) < 1e-14


def test_closed_method_requires_family():
    with pytest.raises(UnsupportedFamily):
        weyl_titchmarsh(PolyExp((1, 1)), -1j, method="closed")


@pytest.mark.parametrize("fn", [weyl_titchmarsh, weyl_titchmarsh_deriv])
def test_domain_errors(fn):
    with pytest.raises(ZeroSpectralParameter):
        fn(Zero(), 0)
    with pytest.raises(NotLowerHalfPlane):
        fn(Zero(), 1 + 1j)
    with pytest.raises(NotLowerHalfPlane):
        fn(Zero(), 2.0)


@pytest.mark.parametrize("name", sorted(ALL_PROFILES) + ["numeric"])
def test_herglotz(name):
    p = bump_pair() if name == "numeric" else ALL_PROFILES[name]
    rng = np.random.default_rng(7)
    n = 30 if name == "numeric" else 100
    z = rng.uniform(-3, 3, n) + 1j * rng.uniform(-3, -0.05, n)
    z = z[np.abs(z.real) > 1e-3]
    w = np.asarray(weyl_titchmarsh(p, z))
    lam = z * z
    assert np.all(w.imag / lam.imag > 0)


@pytest.mark.parametrize("name", sorted(ALL_PROFILES))
@given(z=lower)
def test_w_conjugation_symmetry(name, z):
    p = ALL_PROFILES[name]
    a = np.conj(weyl_titchmarsh(p, z))
    b = weyl_titchmarsh(p, -z.conjugate())
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_wprime_examples():
    assert abs(weyl_titchmarsh_deriv(Zero(), -1j) - 1) < 1e-15
    z = 0.3 - 1.7j
    assert abs(weyl_titchmarsh_deriv(Zero(), z) - (-1j / z)) < 1e-15
    p = PolyExp((8j,))
    for z in (-2 * SQRT3 - 1j, 2 * SQRT3 - 1j):
        assert abs(weyl_titchmarsh_deriv(p, z)) < 1e-13


def test_wprime_third_root_via_continuation():
    # the third critical point 5i is outside the lower half-plane;
    # check the factor 1 + |M|^2/(1+iz)^3 vanishes there
    assert abs(1 + 64 / (1 + 1j * 5j) ** 3) < 1e-15


def test_wprime_polyexp_formula():
    z = 0.4 - 0.8j
    p = PolyExp((3j,))
    want = -1j / z * (1 + 9 / (1 + 1j * z) ** 3)
    assert abs(weyl_titchmarsh_deriv(p, z) - want) < 1e-14


@pytest.mark.parametrize("name", sorted(CLOSED_FAMILIES))
def test_wprime_closed_vs_finite_difference(name):
    p = CLOSED_FAMILIES[name]
    for z in GRID25:
        a = weyl_titchmarsh_dz(p, z, method="closed")
        b, _ = complex_derivative(lambda t: weyl_titchmarsh(p, t), z, h=0.1)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(a))
        c = weyl_titchmarsh_dz(p, z, method="quad")
        assert abs(a - c) <= 1e-7 * max(1.0, abs(a))
        assert abs(weyl_titchmarsh_deriv(p, z) - a / (2 * z)) < 1e-15 * max(1, abs(a))


def test_krein_infinite_is_free():
    f = exp_pair()
    z, x = 0.5 - 0.8j, np.linspace(0, 3, 7)
    m = Model(INF, EvenBox(1 + 1j, 1.0))
    assert np.allclose(krein_resolvent(m, f, z, x), free_resolvent(f, z, x))


def test_krein_zero_profile_correction():
    a, z = 1.5 - 0.5j, 0.5 - 0.8j
    x = np.linspace(0, 3, 7)
    corr = krein_resolvent(Model(a, Zero()), exp_pair(), z, x) - free_resolvent(exp_pair(), z, x)
    want = 2 / ((1 + 1j * z) * (a + 2j * z)) * np.exp(-1j * z * x)
    assert np.allclose(corr, [want, want], atol=1e-12)


def test_krein_at_pole():
    z = -1j
    with pytest.raises(AtPole):
        krein_resolvent(Model(-2.0, Zero()), exp_pair(), z, np.array([1.0]))
