import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from loggas.equilibrium import (
    cauchy_transform,
    confining_equilibrium,
    nonconfining_equilibrium,
)
from loggas.functionals import hilbert_density
from loggas.potentials import evaluate

CONFINING_SWEEP = [-1.9, -1.0, 0.0, 1.0, 5.0]
NONCONFINING_SWEEP = [-0.08, -0.05, -0.01, 0.0]


def semicircle_cdf(x):
    # closed form, independent of the package quadrature
    return 0.5 + (x * np.sqrt(4 - x * x) + 4 * np.arcsin(x / 2)) / (4 * np.pi)


def test_confining_c0_parameters():
    eq = confining_equilibrium(0.0)
    assert eq.a**2 == pytest.approx(4 * math.sqrt(3) / 3, rel=1e-14)
    assert eq.b == pytest.approx(math.sqrt(3) / 3, rel=1e-14)


def test_confining_c1_parameters():
    eq = confining_equilibrium(1.0)
    assert eq.a**2 == pytest.approx((math.sqrt(52) - 2) / 3, rel=1e-14)
    assert eq.b == pytest.approx((1 + math.sqrt(0.25 + 3)) / 3, rel=1e-14)


@pytest.mark.parametrize("c", CONFINING_SWEEP)
def test_confining_normalization_and_positivity(c):
    eq = confining_equilibrium(c)
    # independent quadrature oracle
    mass, err = quad(eq.density, -eq.support_radius, eq.support_radius, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)
    xs = np.linspace(-eq.support_radius, eq.support_radius, 201)
    assert np.all(eq.density(xs) >= 0.0)


@pytest.mark.parametrize("g", NONCONFINING_SWEEP)
def test_nonconfining_normalization_and_positivity(g):
    eq = nonconfining_equilibrium(g)
    mass, err = quad(eq.density, -eq.support_radius, eq.support_radius, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)
    xs = np.linspace(-eq.support_radius, eq.support_radius, 201)
    assert np.all(eq.density(xs) >= 0.0)
    # parameter equation residual
    a2 = eq.a**2
    assert 3 * g * a2 * a2 + a2 == pytest.approx(1.0, abs=1e-12)


def test_nonconfining_g0_is_semicircle():
    sc = nonconfining_equilibrium(0.0)
    assert sc.a == 1.0
    xs = np.linspace(-2, 2, 101)
    np.testing.assert_allclose(
        sc.density(xs), np.sqrt(np.clip(4 - xs * xs, 0, None)) / (2 * np.pi), atol=1e-14
    )


def test_nonconfining_near_critical():
    eq = nonconfining_equilibrium(-1.0 / 12.0 + 1e-9)
    assert eq.a**2 == pytest.approx(2.0, abs=1e-3)
    edge = eq.support_radius * (1 - 1e-12)
    assert eq.density(edge) < 1e-3  # density vanishes at the edge


def test_nonconfining_g005_parameter():
    eq = nonconfining_equilibrium(-0.05)
    assert eq.a**2 == pytest.approx((-1 + math.sqrt(1 - 0.6)) / (6 * -0.05), rel=1e-12)
    assert eq.a**2 == pytest.approx(1.225148, abs=1e-6)


def test_rejection_out_of_range():
    with pytest.raises(ValueError):
        confining_equilibrium(-2.0)
    with pytest.raises(ValueError):
        confining_equilibrium(-2.5)
    with pytest.raises(ValueError):
        nonconfining_equilibrium(-1.0 / 12.0)
    with pytest.raises(ValueError):
        nonconfining_equilibrium(-0.1)


def test_quantile_center_and_oddness():
    for eq in (confining_equilibrium(-0.5), nonconfining_equilibrium(-0.05)):
        assert abs(eq.quantile(0.5)) < 1e-12
        for u in (0.1, 0.23, 0.4):
            assert eq.quantile(u) == pytest.approx(-eq.quantile(1 - u), abs=1e-9)


def test_quantile_semicircle_quartile():
    sc = nonconfining_equilibrium(0.0)
    # oracle: bisection on the closed-form semicircle CDF
    expected = brentq(lambda x: semicircle_cdf(x) - 0.25, -2, 2, xtol=1e-13)
    assert sc.quantile(0.25) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(u=st.floats(0.001, 0.999))
def test_quantile_cdf_residual(u):
    eq = confining_equilibrium(1.0)
    x = eq.quantile(u)
    assert abs(eq.cdf(x) - u) <= 1e-10


def test_quantile_rejects_bad_u():
    eq = confining_equilibrium(0.0)
    for u in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            eq.quantile(u)


def test_sample_antisymmetric():
    eq = confining_equilibrium(-1.0)
    s = eq.sample(10)
    np.testing.assert_array_equal(s, -s[::-1])
    s = eq.sample(11)
    assert s[5] == 0.0
    np.testing.assert_array_equal(s, -s[::-1])


def test_cauchy_normalization_at_infinity():
    sc = nonconfining_equilibrium(0.0)
    y = 1000.0
    val = cauchy_transform(sc, 1j * y) * 1j * y
    # G ~ 1/z + m2/z^3: relative deviation ~ m2/y^2
    assert abs(val - 1.0) <= 3.0 / y**2


def test_cauchy_imaginary_part_recovers_density():
    sc = nonconfining_equilibrium(0.0)
    x = 0.5
    approx = -cauchy_transform(sc, x + 1e-8j).imag / np.pi
    assert approx == pytest.approx(sc.density(x), abs=1e-4)
    eq = nonconfining_equilibrium(-0.05)
    for x in (-1.3, 0.2, 0.9):
        approx = -cauchy_transform(eq, x + 1e-8j).imag / np.pi
        assert approx == pytest.approx(eq.density(x), abs=1e-4)


def test_cauchy_matches_quadrature():
    eq = nonconfining_equilibrium(-0.05)
    z = 2j
    re, _ = quad(lambda y: eq.density(y) * np.real(1 / (z - y)),
                 -eq.support_radius, eq.support_radius, limit=200)
    im, _ = quad(lambda y: eq.density(y) * np.imag(1 / (z - y)),
                 -eq.support_radius, eq.support_radius, limit=200)
    val = cauchy_transform(eq, z)
    assert val.real == pytest.approx(re, abs=1e-6)
    assert val.imag == pytest.approx(im, abs=1e-6)


def test_cauchy_rejects_real_z():
    sc = nonconfining_equilibrium(0.0)
    with pytest.raises(ValueError):
        cauchy_transform(sc, 0.5)
    with pytest.raises(ValueError):
        cauchy_transform(confining_equilibrium(0.0), 1j)


@pytest.mark.parametrize("c", [-1.9, -1.0, 0.0, 1.0, 5.0])
def test_stationarity_confining(c):
    # H mu = V'/2 on the interior of the support
    eq = confining_equilibrium(c)
    V = eq.potential()
    xs = np.linspace(-0.9, 0.9, 7) * eq.support_radius
    for x in xs:
        assert hilbert_density(eq, float(x)) == pytest.approx(
            0.5 * evaluate(V, float(x), 1), abs=1e-6
        )


@pytest.mark.parametrize("g", [-0.08, -0.05, -0.01, 0.0])
def test_stationarity_nonconfining(g):
    eq = nonconfining_equilibrium(g)
    V = eq.potential()
    xs = np.linspace(-0.85, 0.85, 7) * eq.support_radius
    for x in xs:
        assert hilbert_density(eq, float(x)) == pytest.approx(
            0.5 * evaluate(V, float(x), 1), abs=1e-6
        )
