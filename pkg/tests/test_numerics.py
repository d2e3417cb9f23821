import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polardeco.numerics import (
    QuadratureSpec,
    UnconvergedWarning,
    composite_gauss_legendre,
    dawson_D,
    gauss_legendre,
    quadrature_1d,
    radial_fourier3,
    sphere_average,
    wynn_epsilon,
)
from polardeco.units import HBAR


def dawson_D_mp(x):
    if x == 0:
        return 1.0
    with mpmath.workdps(40):
        x = mpmath.mpf(x)
        F = mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(-x * x) * mpmath.erfi(x)
        return float(F / x)


@given(st.floats(min_value=-60, max_value=60, allow_nan=False))
@settings(max_examples=200)
def test_dawson_against_mpmath(x):
    assert dawson_D(x) == pytest.approx(dawson_D_mp(x), rel=1e-13, abs=1e-300)


def test_dawson_small_and_large():
    assert dawson_D(0.0) == 1.0
    xs = np.array([1e-8, 1e-4, 1e-3, 0.01])
    np.testing.assert_allclose(dawson_D(xs), [dawson_D_mp(x) for x in xs], rtol=1e-14)
    big = 1e4
    assert dawson_D(big) == pytest.approx(1 / (2 * big * big), rel=1e-7)
    xs = np.linspace(0, 20, 2001)
    assert np.all(np.diff(dawson_D(xs)) < 0)
    np.testing.assert_array_equal(dawson_D(xs), dawson_D(-xs))
    with pytest.raises(ValueError):
        dawson_D(np.nan)


@pytest.mark.parametrize("n", [1, 4, 12])
def test_gauss_legendre_exact_for_polynomials(n):
    x, w = gauss_legendre(-0.5, 2.0, n)
    for deg in range(2 * n):
        exact = (2.0 ** (deg + 1) - (-0.5) ** (deg + 1)) / (deg + 1)
        assert np.sum(w * x**deg) == pytest.approx(exact, rel=1e-12)
    x, w = composite_gauss_legendre([0, 1, 3], n)
    assert np.sum(w) == pytest.approx(3.0)


def test_quadrature_1d_and_flagging():
    r = quadrature_1d(lambda x: math.exp(-x * x), 0.0, np.inf, QuadratureSpec(rel_tol=1e-12))
    assert r.converged and r.value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)
    with pytest.warns(UnconvergedWarning):
        r = quadrature_1d(lambda x: math.sin(1e4 * x) / (x + 1e-9), 0.0, 1.0,
                          QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=5))
    assert not r.converged


def test_sphere_average():
    assert sphere_average(lambda b, a: np.cos(b) ** 2 + 0 * a).value == pytest.approx(1 / 3, rel=1e-12)
    f = lambda b, a: (np.sin(b) * np.cos(a)) ** 4
    assert sphere_average(f).value == pytest.approx(1 / 5, rel=1e-12)


def test_wynn_epsilon_accelerates_log2():
    sums = np.cumsum([(-1) ** k / (k + 1) for k in range(12)])
    est, err = wynn_epsilon(sums)
    assert abs(est - math.log(2)) < 1e-8
    assert abs(sums[-1] - math.log(2)) > 1e-2


@pytest.mark.parametrize("Pa", [0.3, 1.0, 4.0, 9.0])
def test_radial_fourier_gaussian(Pa):
    a = 1e-9
    P = Pa * HBAR / a
    exact = (2 * math.pi * HBAR) ** -3 * math.pi**1.5 * a**3 * math.exp(-((P * a / (2 * HBAR)) ** 2))
    got = radial_fourier3(lambda R: np.exp(-((R / a) ** 2)), P, QuadratureSpec(rel_tol=1e-10), scale=a)
    assert got.value == pytest.approx(exact, rel=1e-7, abs=1e-12 * abs(exact) + 1e-300)


def test_radial_fourier_yukawa_slow_tail():
    # exp(-R/a)/R transforms to 4 pi a^2 / (1 + (P a/hbar)^2) / (2 pi hbar)^3
    a = 1e-9
    P = 2 * HBAR / a
    exact = 4 * math.pi * a * a / (1 + 4) / (2 * math.pi * HBAR) ** 3
    got = radial_fourier3(lambda R: np.exp(-R / a) / R, P, QuadratureSpec(rel_tol=1e-9), scale=a)
    assert got.value == pytest.approx(exact, rel=1e-6)


def test_radial_fourier_rejects_zero():
    with pytest.raises(ValueError):
        radial_fourier3(lambda R: R, 0.0)
