import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.errors import DomainError, XiNearRayError
from wallcross.numerics import (QuadratureConfig, angular_distance, bessel_k, gauss_kronrod,
                                ray_kernel_integral)

# mpmath.besselk at 30 digits, frozen; points straddle the regime switches at 2 and 25
BESSEL_TABLE = [
    (1e-3, 7.02368880056238132, 999.996238156085553),
    (0.5, 0.924419071227665862, 1.65644112000330089),
    (1.0, 0.421024438240708333, 0.601907230197234575),
    (1.999, 0.114033830589232909, 0.140049842077109663),
    (2.0, 0.113893872749533436, 0.139865881816522427),
    (5.0, 0.00369109833404259427, 0.00404461344545216421),
    (12.0, 2.2008253973114914e-6, 2.29075746476718782e-6),
    (24.999, 3.46769614363659298e-12, 3.536385387837414e-12),
    (25.0, 3.46416156221311436e-12, 3.53277807319993377e-12),
    (40.0, 8.39286110009956703e-19, 8.49713195486103865e-19),
    (100.0, 4.65662822917590202e-45, 4.67985373563690929e-45),
]


@pytest.mark.parametrize("x,k0,k1", BESSEL_TABLE)
def test_bessel_against_frozen_mpmath(x, k0, k1):
    assert bessel_k(0, x) == pytest.approx(k0, rel=1e-13)
    assert bessel_k(1, x) == pytest.approx(k1, rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 80.0))
def test_bessel_matches_scipy(x):
    from scipy.special import k0e, k1e
    assert bessel_k(0, x) == pytest.approx(k0e(x) * math.exp(-x), rel=2e-13)
    assert bessel_k(1, x) == pytest.approx(k1e(x) * math.exp(-x), rel=2e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 40.0))
def test_k0_derivative_is_minus_k1(x):
    h = 1e-5 * x
    fd = (bessel_k(0, x + h) - bessel_k(0, x - h)) / (2 * h)
    assert fd == pytest.approx(-bessel_k(1, x), rel=1e-7)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(2, 1.0)
    assert bessel_k(0, 800.0) == 0.0


def test_gauss_kronrod_polynomial_and_gaussian():
    val, _ = gauss_kronrod(lambda x: x ** 5 - 3 * x, 0.0, 2.0)
    assert val == pytest.approx(64 / 6 - 6, rel=1e-14)
    val, _ = gauss_kronrod(lambda x: np.exp(-x * x), -8.0, 8.0)
    assert val == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(abs_tol=0.0)


def _f(phi):
    return lambda w: np.exp(-(w * np.exp(-1j * phi) + np.exp(1j * phi) / w))


def test_ray_kernel_frozen_oracle():
    # mpmath.quad at 50 digits of int dt/t (e t + xi)/(e t - xi) exp(-(t + 1/t))
    xi = -2 * cmath.exp(0.7j)
    v = ray_kernel_integral(_f(0.7), 0.7, xi)
    assert v.real == pytest.approx(-0.06985986551403357, abs=1e-11)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 5.9))
def test_ray_kernel_against_mpmath(r, offset):
    import mpmath as mp
    phi = 0.7
    xi = r * cmath.exp(1j * (phi + offset))
    v = ray_kernel_integral(_f(phi), phi, xi)
    e = mp.exp(1j * phi)
    ref = mp.quad(lambda t: (e * t + xi) / (e * t - xi) * mp.exp(-(t + 1 / t)) / t, [0, 1, mp.inf])
    assert abs(v - complex(ref)) < 1e-9


def test_ray_kernel_xi_on_ray():
    with pytest.raises(XiNearRayError):
        ray_kernel_integral(_f(0.7), 0.7, 1.5 * cmath.exp(0.7j))


def test_kernel_jump_across_ray():
    # crossing the ray at xi = e^{i phi} s picks up 4 pi i f(xi) from the pole
    phi = 0.7
    xr = 1.3 * cmath.exp(1j * phi)
    lo = ray_kernel_integral(_f(phi), phi - 0.1, xr)
    hi = ray_kernel_integral(_f(phi), phi + 0.1, xr)
    assert abs((lo - hi) - 4j * math.pi * _f(phi)(np.array([xr]))[0]) < 1e-9


@settings(deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10))
def test_angular_distance_range(a, b):
    d = angular_distance(a, b)
    assert 0 <= d <= math.pi + 1e-12
