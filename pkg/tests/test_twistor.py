import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.charges import Charge, RelativeCharge, charge, zero_charge
from wallcross.errors import NoConvergenceError, WallError
from wallcross.ooguri_vafa import FiberPoint, OVParams, holomorphic_form
from wallcross.twistor import (TWISTOR_FORM_NORMALIZATION, SectionProblem, TBAProblem,
                               compose_full_circle, fq_eval, fq_log_gradient,
                               fq_side_limit_richardson, ov_problem, ray_phase, rh_sectors,
                               sections_solve, sheet_index, tba_solve, twistor_two_form,
                               xm_eval, xsf_eval, _shift)
from wallcross.wallcrossing import CentralCharge

P = OVParams(1.0, 1.0, {2: 1, -2: 1, 1: 1, -1: 1})
PT = FiberPoint(cmath.log(0.3) + (0.4 - 2 * math.pi) * 1j, 0.7, 1.1)
XI = 0.8 * cmath.exp(1.9j)


def test_semiflat_coordinates_multiply():
    x1 = xsf_eval((1, 0), PT, XI, P)
    x2 = xsf_eval((0, 1), PT, XI, P)
    assert xsf_eval((1, 1), PT, XI, P) == pytest.approx(x1 * x2, rel=1e-13)


def test_fundamental_domain_sheet():
    assert sheet_index(PT, P) == 0
    assert sheet_index(PT.hat_t(P.delta), P) == 1


@pytest.mark.parametrize("q", [2, -2, 1])
def test_jump_across_ray_is_k_factor(q):
    xr = 0.6 * cmath.exp(1j * ray_phase(q * PT.a))
    ccw = fq_side_limit_richardson(q, PT, xr, P, "ccw")
    cw = fq_side_limit_richardson(q, PT, xr, P, "cw")
    xe = xsf_eval((1, 0), PT, xr, P)
    assert abs(ccw / cw - 1 / (1 - xe ** q)) < 1e-8


@pytest.mark.parametrize("q", [1, 2, -1])
def test_quasi_periodicity(q):
    up = FiberPoint(PT.z + 2j * math.pi, PT.theta_e, PT.theta_m)
    ratio = fq_eval(q, up, XI, P) / fq_eval(q, PT, XI, P)
    assert abs(ratio * (1 - xsf_eval((1, 0), PT, XI, P) ** q) - 1) < 1e-12


def test_xm_invariant_under_monodromy():
    r = xm_eval(PT.hat_t(P.delta), XI, P) / xm_eval(PT, XI, P)
    assert abs(r - 1) < 1e-12


def test_fq_suppressed_at_large_radius():
    p = OVParams(1.0, 10 / 0.3, {1: 1, -1: 1})
    assert abs(fq_eval(1, PT, XI, p) - 1) < 1e-20


def test_log_gradient_matches_finite_differences():
    q = -2
    g = fq_log_gradient(q, PT, XI, P)
    h = 2e-5
    for k in range(3):
        d = np.zeros(4)
        d[k] = h * (2 * math.pi * P.R if k == 2 else 1)
        fd = cmath.log(fq_eval(q, _shift(PT, d), XI, P) / fq_eval(q, _shift(PT, -d), XI, P)) / (2 * h)
        assert abs(fd - g[k]) < 1e-7 * max(1, abs(g).max())


def test_twistor_two_form_matches_holomorphic_form():
    W = twistor_two_form(PT, P, XI)
    H = holomorphic_form(PT, P, XI)
    assert np.abs(W - TWISTOR_FORM_NORMALIZATION * H).max() < 1e-9 * np.abs(H).max()


def test_tba_reproduces_ov_closed_form():
    sol = tba_solve(ov_problem(PT, P))
    assert sol.iterations <= 15
    assert abs(sol.evaluate(Charge((0, 1)), XI) / xm_eval(PT, XI, P) - 1) < 1e-8


G1, G2 = charge(1, 0), charge(0, 1)
ZP = CentralCharge((-cmath.exp(0.5j), -cmath.exp(-0.5j)))


@settings(max_examples=4, deadline=None)
@given(st.sampled_from([0.3, 0.6, 1.0]), st.floats(0.0, 6.0))
def test_pentagon_tba_jumps(R, theta):
    sol = tba_solve(TBAProblem({G1: 1, G2: 1}, ZP, (theta, 0.9), R))
    for g in (G1, G2):
        xr = 0.7 * cmath.exp(1j * sol.rays[g][0])
        for tgt in (G1, G2):
            assert abs(sol.jump(tgt, xr) / sol.expected_jump(tgt, xr) - 1) < 1e-8


def test_tba_tiny_radius_fails():
    Z = CentralCharge((cmath.exp(0.3j), cmath.exp(1.6j)))
    with pytest.raises(NoConvergenceError):
        tba_solve(TBAProblem({G1: 1, G2: 1}, Z, (0.2, 0.5), 0.01))


def test_nonlocal_coincident_rays():
    Z = CentralCharge((1.0 + 0j, 2.0 + 0j))
    with pytest.raises(WallError):
        tba_solve(TBAProblem({G1: 1, G2: 1}, Z, (0.0, 0.0), 1.0))
    with pytest.raises(WallError):
        rh_sectors(Z, {G1: 1, G2: 1})


def test_rh_full_circle_matches_monodromy():
    # Omega_{+-2} = 1: transporting X_m around the circle gives X_m X_e^{-4}
    Z = CentralCharge((0.4 * cmath.exp(0.3j), 0.2j))
    rh = rh_sectors(Z, {charge(2, 0): 1, charge(-2, 0): 1})
    assert len(rh.sectors) == 2
    out = compose_full_circle(rh, G2, lambda k: abs(k[0]) + abs(k[1]), 12)
    assert out == {(-4, 1): 1}


def test_section_jump_is_s_factor():
    Z = CentralCharge((1.0 + 0j, 1j), {1: 0.4 + 0.1j, 2: -0.3 + 0.2j})
    r = RelativeCharge(1, 2, zero_charge())
    sol = sections_solve(SectionProblem((1, 2), Z, 1.0, {}, {r: 1}))
    xr = 0.8 * cmath.exp(1j * sol.rays[r][0])
    m = sol.jump(r, 2, xr)
    e = sol.expected_jump(r, 2, xr)
    assert np.abs(m - e).max() < 1e-8 * np.abs(e).max()
    assert np.abs(sol.jump(r, 1, xr)).max() < 1e-10
