from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallcross.charges import (Charge, Cone, PairingContext, RelativeCharge, TorsorPoint,
                               TruncatedSeries, charge, compose, is_defined, monodromy_apply,
                               pair, sigma, standard_cone, zero_charge)
from wallcross.errors import CompositionError, ConeError, ConfigError, ContextError

ints = st.integers(-6, 6)
charges = st.builds(charge, ints, ints)


@given(charges, charges)
def test_pairing_antisymmetric(a, b):
    assert pair(a, b) == -pair(b, a)
    assert pair(a, a) == 0


@given(charges, charges, charges)
def test_pairing_bilinear(a, b, c):
    assert pair(a + b, c) == pair(a, c) + pair(b, c)


@given(charges, charges, charges)
def test_sigma_cocycle_on_lattice(a, b, c):
    assert sigma(a, b) * sigma(a + b, c) == sigma(b, c) * sigma(a, b + c)


def test_electric_magnetic_pairing():
    assert pair(charge(1, 0), charge(0, 1)) == 1
    assert sigma(charge(1, 0), charge(0, 1)) == -1
    assert sigma(charge(2, 0), charge(0, 1)) == 1


def test_torsor_compositions():
    g = charge(1, 2)
    t = TorsorPoint(3, charge(0, 1))
    assert compose(g, t) == TorsorPoint(3, charge(1, 3))
    r = RelativeCharge(1, 3)
    assert compose(r, t) == TorsorPoint(1, charge(0, 1))
    r2 = RelativeCharge(3, 2)
    assert compose(r, r2) == RelativeCharge(1, 2)
    assert not is_defined(t, t)
    assert not is_defined(RelativeCharge(1, 2), RelativeCharge(2, 1))
    with pytest.raises(CompositionError):
        compose(RelativeCharge(1, 2), TorsorPoint(1))


def test_relative_charge_needs_distinct_vacua():
    with pytest.raises(CompositionError):
        RelativeCharge(2, 2)


def test_context_mismatch():
    other = PairingContext("other", ((0, 2), (-2, 0)))
    with pytest.raises(ContextError):
        Charge((1, 0)) + Charge((0, 1), other)


def test_pairing_matrix_must_be_antisymmetric():
    with pytest.raises(ConfigError):
        PairingContext("bad", ((0, 1), (1, 0)))


@given(st.integers(-4, 4), charges, st.integers(1, 5))
def test_monodromy_group_law(k, g, delta):
    assert monodromy_apply(-k, monodromy_apply(k, g, delta), delta) == g
    assert pair(monodromy_apply(k, g, delta), charge(1, 0)) == pair(g, charge(1, 0))


def _series(draw_terms, cone, deg):
    return TruncatedSeries({charge(q, p): c for (q, p), c in draw_terms}, cone, deg)


terms = st.lists(st.tuples(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                           st.integers(-3, 3)), max_size=5)


@settings(max_examples=40)
@given(terms, terms, terms)
def test_series_product_associative(t1, t2, t3):
    cone = standard_cone()
    a, b, c = (_series(t, cone, 5) for t in (t1, t2, t3))
    assert (a * b) * c == a * (b * c)


@settings(max_examples=40)
@given(terms)
def test_series_json_round_trip(t):
    s = _series(t, standard_cone(), 6)
    assert TruncatedSeries.from_json(s.to_json()) == s


def test_truncation_drops_high_degree():
    s = TruncatedSeries({charge(3, 3): 1, charge(1, 0): Fraction(1, 2)}, standard_cone(), 4)
    assert s.terms == {charge(1, 0): Fraction(1, 2)}


def test_cone_degree_and_membership():
    cone = Cone((charge(1, 0), charge(1, 1)))
    assert cone.degree(charge(2, 1)) == 2
    assert cone.contains(charge(1, 1))
    assert not cone.contains(charge(0, 1))
    norm = standard_cone(mode="norm")
    assert norm.degree(charge(-2, 1)) == 3
    with pytest.raises(ConfigError):
        Cone((charge(1, 0), charge(2, 0)))


def test_zero_charge():
    assert zero_charge().is_zero()


def test_cone_error_type():
    from wallcross.charges import check_in_cone
    with pytest.raises(ConeError):
        check_in_cone(charge(-1, 0), standard_cone())
