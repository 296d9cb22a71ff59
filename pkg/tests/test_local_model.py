import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.errors import DomainError, SingularPointError
from wallcross.local_model import (EllipticSurface, LOCAL_SPECTRUM, fit_lambda, instanton_sample,
                                   instanton_form_sum, local_compare, omega_inst_eval,
                                   q_action_verify, semiflat_twistor_form, singular_fibers,
                                   sylvester_resultant, t_action, w_resultant)
from wallcross.ooguri_vafa import FiberPoint, OVParams, central_charges, holomorphic_form

# sympy.resultant of P_w and dP_w/du in u, frozen (low to high in w)
RESULTANT_A_M1_B_0 = [0, 0, 1, 0, -2, 0, 1]
RESULTANT_A_M1_B_THIRD = [Fraction(1, 36), Fraction(-1, 6), Fraction(1, 4), Fraction(1, 6),
                          Fraction(-1, 2), 0, Fraction(1, 4)]
# mpmath.polyroots of w^3 - w + 1/3 at 25 digits
ROOTS_B_THIRD = [-1.137158042603257612837668, 0.3949308436346984575671173,
                 0.7422271989685591552705506]


def test_resultant_matches_frozen_sympy():
    s = EllipticSurface(Fraction(-1), Fraction(0))
    assert w_resultant(s) == RESULTANT_A_M1_B_0
    s = EllipticSurface(Fraction(-1), Fraction(1, 3))
    assert w_resultant(s) == RESULTANT_A_M1_B_THIRD


def test_resultant_matches_live_sympy_for_complex_coefficients():
    import sympy as sp
    a, b = 0.3 + 0.2j, -0.5 + 0.1j
    u, w = sp.symbols("u w")
    A, B = sp.nsimplify(a), sp.nsimplify(b)
    f = u ** 3 + A * u + B
    P = sp.expand(-(2 * u + w) * f + sp.diff(f, u) ** 2 / 4)
    ref = sp.Poly(sp.resultant(P, sp.diff(P, u), u), w).all_coeffs()[::-1]
    got = w_resultant(EllipticSurface(a, b))
    for x, y in zip(got, ref):
        assert abs(complex(x) - complex(y)) < 1e-12


def test_singular_fibers_a_minus_one():
    fs = singular_fibers(EllipticSurface(Fraction(-1), Fraction(0)))
    assert np.allclose(fs.e, [-1, 0, 1], atol=1e-14)
    assert np.allclose(fs.w0, [0.5, 0, -0.5], atol=1e-14)
    assert sum(fs.multiplicities) == len(fs.resultant) - 1 == 6


def test_singular_fibers_rational_oracle():
    fs = singular_fibers(EllipticSurface(Fraction(-1), Fraction(1, 3)))
    assert np.allclose(fs.e, ROOTS_B_THIRD, rtol=1e-14)


def test_sigma0_scales_w0():
    fs = singular_fibers(EllipticSurface(Fraction(-1), Fraction(0), 2j))
    assert np.allclose(fs.w0, [-0.5 * w * (2j) ** 2 for w in fs.e])


def test_non_squarefree_rejected():
    with pytest.raises(DomainError):
        EllipticSurface(Fraction(-3), Fraction(2))   # (x - 1)^2 (x + 2)
    with pytest.raises(DomainError):
        EllipticSurface(1.0, 1.0, 0.0)


coeff = st.floats(-2, 2).filter(lambda x: abs(x) > 1e-3)


@settings(max_examples=20, deadline=None)
@given(coeff, coeff, coeff, coeff)
def test_generic_surfaces_have_three_distinct_fibers(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    if abs(4 * a ** 3 + 27 * b ** 2) < 1e-2:
        return
    e = singular_fibers(EllipticSurface(a, b)).e
    gaps = [abs(e[i] - e[j]) for i in range(3) for j in range(i)]
    assert min(gaps) > 1e-6


@settings(max_examples=20, deadline=None)
@given(coeff, coeff, st.floats(0.3, 2.0), st.floats(0, 6.2))
def test_weighted_homogeneity(a, b, lam_abs, lam_arg):
    if abs(4 * a ** 3 + 27 * b ** 2) < 1e-2:
        return
    lam = lam_abs * cmath.exp(1j * lam_arg)
    e1 = singular_fibers(EllipticSurface(complex(a), complex(b))).e
    e2 = singular_fibers(EllipticSurface(lam ** 4 * a, lam ** 6 * b)).e
    scaled = [lam ** 2 * x for x in e1]
    for x in e2:
        assert min(abs(x - y) for y in scaled) <= 1e-10 * max(1, abs(x))


def test_sylvester_known_case():
    # Res(x^2 - 1, x - 2) = 3
    assert sylvester_resultant([Fraction(-1), 0, 1], [Fraction(-2), 1]) == 3


def test_q_action_identities():
    rep = q_action_verify(EllipticSurface(Fraction(-1), Fraction(1, 3)), samples=30, seed=3)
    assert rep["ok"]
    assert rep["double_points_fixed"] < 1e-40
    assert max(rep["residuals"].values()) < 1e-20


def test_t_action_pole_and_fixed_w():
    e = [-1.0, 0.0, 1.0]
    with pytest.raises(ZeroDivisionError):
        t_action(1, e, (1.0, e[0], 0.3))
    assert t_action(2, e, (1.0, 0.5, 0.3))[2] == 0.3


PT = FiberPoint(cmath.log(0.25) + 0.7j - 2j * math.pi, 0.9, 0.4)
XI = 0.7 * cmath.exp(0.4j)


def test_instanton_form_antisymmetric_and_zero_when_absent():
    s = instanton_sample(2, PT, XI, 1.3)
    assert s.antisymmetry_defect() < 1e-15 * np.abs(s.form).max()
    assert not omega_inst_eval(2, PT, XI, 1.3, omega_count=0).any()


def test_instanton_truncation_stable():
    a = omega_inst_eval(2, PT, XI, 2.0, n_max=20)
    b = omega_inst_eval(2, PT, XI, 2.0, n_max=40)
    assert np.abs(a - b).max() < 1e-12


def test_instanton_envelope_slope():
    pt = FiberPoint(cmath.log(0.5) + 0.7j - 2j * math.pi, 0.9, 0.4)
    Rs = [2.0, 4.0, 8.0]
    mags = [np.abs(instanton_form_sum(pt, XI, R, [(2, 1), (-2, 1)])).max() / R for R in Rs]
    slope = np.polyfit(Rs, np.log(mags), 1)[0]
    assert slope == pytest.approx(-2 * math.pi * 2 * 0.5, rel=0.05)


def test_semiflat_twistor_form_normalization():
    p = OVParams(1.0, 1.3, LOCAL_SPECTRUM)
    W = semiflat_twistor_form(PT, p, XI)
    assert np.abs(W + 0.5 * holomorphic_form(PT, p, XI, "sf")).max() < 1e-13


def test_fit_lambda_recovers_lambda():
    p = OVParams(0.8 * cmath.exp(0.3j), 1.0, LOCAL_SPECTRUM)
    lam = fit_lambda(PT.a, central_charges(PT, p)[2], 4)
    assert abs(lam - p.Lambda) < 1e-13


def _grid(n, seed=1):
    rng = random.Random(seed)
    return [FiberPoint(complex(math.log(rng.uniform(0.15, 0.6)), rng.uniform(-2 * math.pi, 0)),
                       rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(n)]


XIS = [0.7 * cmath.exp(0.4j), 1.3 * cmath.exp(2.1j), 0.4 * cmath.exp(-1.2j)]


def test_local_compare_equality_and_ablation():
    rep = local_compare(_grid(12), XIS, [4.0])
    assert rep["max_discrepancy"] < 1e-8
    assert abs(rep["kappa"] + 4) < 1e-8
    bad = local_compare(_grid(12), XIS, [4.0], include_minus=False)
    assert bad["max_discrepancy"] > 1e-4


def test_minus_gamma_contribution_is_comparable():
    both = instanton_form_sum(PT, XI, 4.0, [(2, 1), (-2, 1)])
    one = omega_inst_eval(2, PT, XI, 4.0)
    ratio = np.linalg.norm(both) / np.linalg.norm(one)
    assert abs(ratio - 1) > 0.2


def test_local_compare_discrepancy_not_growing_with_r():
    per = local_compare(_grid(10), XIS, [2.0, 4.0, 8.0])["per_R"]
    floor = 1e-14
    assert per[4.0] <= max(per[2.0], floor) and per[8.0] <= max(per[4.0], floor)


def test_mirror_preset_and_singular_grid():
    rep = local_compare(_grid(2), XIS[:1], [4.0])
    assert rep["mirror_preset"] == {"delta": 2, "singular_set": [0.0]}
    with pytest.raises(SingularPointError):
        local_compare([FiberPoint(complex(-40.0, -1.0), 0.0)], XIS[:1], [4.0])
