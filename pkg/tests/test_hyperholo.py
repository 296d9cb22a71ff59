import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.errors import ConfigError, SingularPointError
from wallcross.hyperholo import (ConnectionParams, curvature_type_check, eta_alpha_split,
                                 gmn_connection_solve, hat_t_connection_shift,
                                 lagrangian_section_check, semiflat_connection, semiflat_curvature,
                                 xw_eval, xw_hat_t, xw_jump, xw_split)
from wallcross.ooguri_vafa import FiberPoint, OVParams
from wallcross.twistor import ray_phase

HOST = OVParams(1.0, 1.0, {2: 1, -2: 1, 1: 1, -1: 1})
CONN = ConnectionParams(Fraction(3), {1: 1, 2: 1}, 0.7 + 0.2j, (0.3, 0.1j), HOST)
PT = FiberPoint(cmath.log(0.3) + (0.4 - 2 * math.pi) * 1j, 0.7, 1.1)
XI = 0.8 * cmath.exp(1.9j)


def test_exponents_are_odd_in_q():
    assert CONN.exponent(2) == 1 and CONN.exponent(-2) == -1
    assert CONN.exponent(3) == 0


def test_delta_must_match_omega():
    with pytest.raises(ConfigError):
        ConnectionParams(Fraction(2), {1: 1}, 1.0, (), HOST)
    with pytest.raises(ConfigError):
        ConnectionParams(Fraction(1, 3), {1: Fraction(1, 3)}, 1.0, (), HOST)


def test_half_integer_delta_is_twisted():
    c = ConnectionParams(Fraction(1, 2), {1: Fraction(1, 2)}, 1.0, (), HOST)
    assert c.twisted and not CONN.twisted


def test_split_reconstructs_t():
    s = eta_alpha_split(PT, CONN)
    assert abs(s.reconstruct() - s.t) < 1e-13 * max(1, abs(s.t))


def test_xw_split_product():
    a, b = xw_split(PT, XI, CONN)
    assert abs(a * b / xw_eval(PT, XI, CONN) - 1) < 1e-12


def test_xw_monodromy_equivariance():
    assert abs(xw_hat_t(PT, XI, CONN) / xw_eval(PT, XI, CONN) - 1) < 1e-12


def test_semiflat_connection_flat_without_tail():
    c = ConnectionParams(Fraction(3), {1: 1, 2: 1}, 1.0, (), HOST)
    s = eta_alpha_split(PT, c)
    assert abs(s.eta) < 1e-13 and abs(s.alpha - 3 / 5) < 1e-13
    assert np.abs(semiflat_curvature(PT, c)).max() < 1e-8
    # a phase of Lambda_1 only shifts eta by a constant
    c2 = ConnectionParams(Fraction(3), {1: 1, 2: 1}, cmath.exp(0.9j), (), HOST)
    assert np.abs(semiflat_curvature(PT, c2)).max() < 1e-8


def test_semiflat_curvature_only_sees_the_tail():
    # same host, |Lambda_1| = |Lambda|: the delta tau / Delta part is flat for any delta
    base = ConnectionParams(Fraction(3), {1: 1, 2: 1}, cmath.exp(0.2j), (0.3, 0.1j), HOST)
    other = ConnectionParams(Fraction(5), {1: 1, 2: 2}, cmath.exp(1.5j), (0.3, 0.1j), HOST)
    F1 = semiflat_curvature(PT, base)
    F2 = semiflat_curvature(PT, other)
    assert np.abs(F1).max() > 1e-3
    assert np.abs(F1 - F2).max() < 1e-9 * np.abs(F1).max() + 1e-9


def test_hat_t_shift():
    shift = hat_t_connection_shift(PT, CONN)
    want = np.array([0, 0, 1j * float(CONN.delta) * 2 * math.pi * HOST.R, 0])
    assert np.abs(shift - want).max() < 1e-8


def test_gmn_semiflat_truncation_recovers_semiflat_connection():
    sf = gmn_connection_solve(PT, CONN, semiflat=True)
    assert np.abs(sf.components - semiflat_connection(PT, CONN).components).max() < 1e-8


@settings(max_examples=8, deadline=None)
@given(st.floats(0.15, 0.8), st.floats(0.1, 6.1), st.floats(0.2, 6.0))
def test_gmn_residual_small_off_singularities(r, ph, te):
    pt = FiberPoint(complex(math.log(r), ph - 2 * math.pi), te, 0.4)
    assert gmn_connection_solve(pt, CONN).residual < 1e-6


def test_gmn_refuses_points_near_singularities():
    with pytest.raises(SingularPointError):
        gmn_connection_solve(FiberPoint(complex(math.log(0.01), -1.0), 0.0), CONN)


def test_curvature_is_type_one_one():
    res = curvature_type_check(PT, CONN)
    assert max(res.values()) < 1e-5


def test_lagrangian_section_detects_perturbation():
    pts = [0.3 + 0.1j, -0.2 + 0.4j, 0.5 - 0.2j]
    assert lagrangian_section_check(CONN, pts) < 1e-7
    bad = ConnectionParams(Fraction(3), {1: 1, 2: 1}, 0.7 + 0.2j, (0.3, 0.1j), HOST, nonholomorphic=0.01)
    assert lagrangian_section_check(bad, pts) > 1e-4


def test_xw_jump_on_ray():
    xr = 0.7 * cmath.exp(1j * ray_phase(2 * PT.a))
    meas, exp = xw_jump(2, PT, xr, CONN)
    assert abs(meas / exp - 1) < 1e-9


def test_suppression_of_instanton_part():
    diffs = []
    for R in (4.0, 6.0, 8.0):
        host = OVParams(1.0, R, {1: 1, -1: 1})
        c = ConnectionParams(Fraction(1), {1: 1}, 1.0, (0.2,), host)
        pt = FiberPoint(complex(math.log(0.5), 0.3 - 2 * math.pi), 0.4, 0.2)
        diffs.append(np.abs(gmn_connection_solve(pt, c).components
                            - semiflat_connection(pt, c).components).max())
    assert diffs[0] > diffs[1] > diffs[2]
