from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from asepdual.scalar import ExactField, LaurentPoly, NumericField, q_factorial, q_number

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
polys = st.dictionaries(st.integers(-6, 6), coeffs, max_size=4).map(LaurentPoly)


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@given(polys, polys)
def test_divexact_inverts_multiplication(a, b):
    if b.is_zero():
        return
    assert (a * b).divexact(b) == a


def test_divexact_rejects_remainder():
    one_plus_u = LaurentPoly({0: 1, 1: 1})
    with pytest.raises(ArithmeticError):
        LaurentPoly({0: 1}).divexact(one_plus_u)


@given(polys, st.floats(0.5, 2.0))
def test_evaluate_is_a_homomorphism(a, u):
    b = LaurentPoly({1: 2, -1: Fraction(1, 3)})
    assert (a * b).evaluate(u) == pytest.approx(a.evaluate(u) * b.evaluate(u), rel=1e-12, abs=1e-12)


@given(polys)
def test_pairs_roundtrip(a):
    assert LaurentPoly.from_pairs(a.to_pairs()) == a


def test_canonical_form_drops_zeros():
    p = LaurentPoly({2: 1, 3: 0}) + LaurentPoly({2: -1})
    assert p.is_zero() and p == LaurentPoly()


def test_exact_q_number_matches_numeric():
    F = ExactField(3)
    for n in range(0, 6):
        val = F.evaluate(q_number(n, F), 1.7)
        assert val == pytest.approx(q_number(n, NumericField(1.7)), rel=1e-13, abs=1e-15)
    # [3]_q = q^2 + 1 + q^-2 literally
    assert q_number(3, F) == F.q_pow(2) + F.one + F.q_pow(-2)


def test_q_factorial_values():
    F = ExactField(2)
    assert q_factorial(0, F) == F.one
    assert q_factorial(3, F) == q_number(2, F) * q_number(3, F)
    assert q_factorial(3, NumericField(1.0 + 1e-9)) == pytest.approx(6.0, rel=1e-6)
    with pytest.raises(ValueError):
        q_factorial(-1, F)


def test_q_pow_needs_representable_exponent():
    F = ExactField(4)
    assert F.q_pow(Fraction(1, 8)) == LaurentPoly.monomial(1)
    with pytest.raises(ValueError):
        F.q_pow(Fraction(1, 3))
    G = ExactField(4, refine=2)
    assert G.q_pow(Fraction(1, 16)) == LaurentPoly.monomial(1)


def test_power_of_monomial_with_rational_root():
    F = ExactField(2)
    x = F.q_pow(1) * 4
    y = F.power(x, Fraction(1, 2))
    assert y * y == x


def test_inverted_field_swaps_q():
    F = ExactField(3)
    G = F.inverted()
    assert G.q_pow(1) == F.q_pow(-1)
    assert G.inverted() == F


def test_numeric_field_power_of_zero_raises():
    F = NumericField(1.5)
    with pytest.raises(ZeroDivisionError):
        F.power(0.0, -1)
