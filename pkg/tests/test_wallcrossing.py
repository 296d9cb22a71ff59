import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.charges import TruncatedSeries, charge, standard_cone
from wallcross.errors import ConfigError, DegenerateChargeError, NoSolutionError, RayOnBoundaryError
from wallcross.wallcrossing import (BPSData, CentralCharge, action_on_basis, chamber_from_json,
                                    factorize_spectrum, k_factor_apply, ordered_product, ray_of,
                                    verify_wcf)

G1, G2 = charge(1, 0), charge(0, 1)
SECTOR = (-math.pi / 2, math.pi / 2)
ZA = CentralCharge((-cmath.exp(0.5j), -cmath.exp(-0.5j)))
ZB = CentralCharge((-cmath.exp(-0.5j), -cmath.exp(0.5j)))


def test_pentagon_identity():
    ok, rep = verify_wcf(ZA, BPSData({G1: 1, G2: 1}), ZB, BPSData({G1: 1, G2: 1, G1 + G2: 1}),
                         SECTOR, 8, standard_cone())
    assert ok and rep["equal"]


def test_pentagon_missing_state_reports_first_discrepancy():
    ok, rep = verify_wcf(ZA, BPSData({G1: 1, G2: 1}), ZB, BPSData({G1: 1, G2: 1}),
                         SECTOR, 6, standard_cone())
    assert not ok
    # the missing factor has charge g1 + g2, so the first gap is at order 2
    assert rep["degree"] == 2


def test_factorize_recovers_bound_state():
    cone = standard_cone()
    target = action_on_basis(SECTOR, ZA, BPSData({G1: 1, G2: 1}), 7, cone)
    data = factorize_spectrum(target, ZB, 7, cone, SECTOR)
    assert data.omega == {G1: 1, G2: 1, G1 + G2: 1}


def test_factorize_rejects_non_product():
    cone = standard_cone()
    bogus = {G1: TruncatedSeries({G1: 1, G1 + G2: Fraction(1, 2)}, cone, 4),
             G2: TruncatedSeries.variable(G2, cone, 4)}
    with pytest.raises(NoSolutionError):
        factorize_spectrum(bogus, ZB, 4, cone, SECTOR)


def test_k_factor_on_magnetic_variable():
    # X_m -> (1 - sigma X_e)^(-<e,m>) X_m, sigma(e, m) = -1
    cone = standard_cone()
    s = TruncatedSeries.variable(G2, cone, 4)
    out = k_factor_apply(G1, BPSData({G1: 1}), s)
    assert out.terms == {G2: 1, G1 + G2: -1, 2 * G1 + G2: 1, 3 * G1 + G2: -1}


def test_ray_of_is_phase_of_minus_z():
    Z = CentralCharge((1j, 1.0))
    assert ray_of(G1, Z) == pytest.approx(-math.pi / 2)
    with pytest.raises(DegenerateChargeError):
        ray_of(G1, CentralCharge((0j, 1.0)))


def test_ray_on_sector_boundary():
    Z = CentralCharge((-cmath.exp(1j * math.pi / 2), 1.0))
    s = TruncatedSeries.variable(G2, standard_cone(), 3)
    with pytest.raises(RayOnBoundaryError):
        ordered_product(SECTOR, Z, BPSData({G1: 1}), s)


def test_bad_sector():
    s = TruncatedSeries.variable(G2, standard_cone(), 3)
    with pytest.raises(ConfigError):
        ordered_product((1.0, 0.5), ZA, BPSData({G1: 1}), s)


@settings(max_examples=12, deadline=None)
@given(st.floats(-3.0, 3.0))
def test_ov_spectrum_product_is_monodromy(arg):
    # mutually local spectrum: the full-circle product only depends on Delta
    if min(abs(abs(arg) - math.pi), abs(arg)) < 1e-3:
        arg += 0.01
    cone = standard_cone(mode="norm")
    data = BPSData({charge(2, 0): 1, charge(-2, 0): 1})
    Z = CentralCharge((0.4 * cmath.exp(1j * arg), 0.3j))
    out = ordered_product((-math.pi, math.pi), Z, data, TruncatedSeries.variable(G2, cone, 8))
    assert out.terms == {charge(-4, 1): 1}


def test_chamber_json():
    doc = {"Z": {"re": [1.0, 0.0], "im": [0.0, 1.0]}, "omega": {"1,0": 1, "0,1": 2}}
    Z, data = chamber_from_json(doc)
    assert Z(G1 + G2) == 1 + 1j
    assert data.omega == {G1: 1, G2: 2}
