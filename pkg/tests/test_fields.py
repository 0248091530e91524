import random

import pytest
from hypothesis import given, strategies as st

from vflsim.errors import DivisionByZero
from vflsim.fields import FIELD_PRIME, FieldElement

elements = st.integers(min_value=0, max_value=FIELD_PRIME - 1)


def test_additive_identity():
    x = FieldElement(123456789)
    assert x + FieldElement(0) == x


def test_inverse_law():
    x = FieldElement(987654321)
    assert x * x.inverse() == FieldElement(1)


def test_wraparound_matches_bigint_oracle():
    # big-integer reduction against the published BN254 scalar prime
    assert FieldElement(FIELD_PRIME - 1) + FieldElement(1) == FieldElement(0)
    a, b = 2**300 + 17, 3**200 + 5
    assert (FieldElement(a) * FieldElement(b)).value == (a * b) % FIELD_PRIME


def test_inverse_of_zero_raises():
    with pytest.raises(DivisionByZero):
        FieldElement(0).inverse()
    with pytest.raises(DivisionByZero):
        FieldElement(1) / 0


def test_canonical_form():
    assert FieldElement(-1).value == FIELD_PRIME - 1
    assert FieldElement(FIELD_PRIME).value == 0


def test_field_axioms_bulk():
    # associativity/commutativity/distributivity over 10^4 random samples
    rng = random.Random(1)
    for _ in range(10_000):
        a, b, c = (rng.randrange(FIELD_PRIME) for _ in range(3))
        fa, fb, fc = FieldElement(a), FieldElement(b), FieldElement(c)
        assert (fa + fb) + fc == fa + (fb + fc)
        assert fa * fb == fb * fa
        assert fa * (fb + fc) == fa * fb + fa * fc


@given(elements, elements)
def test_sub_is_add_neg(a, b):
    assert FieldElement(a) - FieldElement(b) == FieldElement(a) + (-FieldElement(b))


@given(elements)
def test_nonzero_inverse_roundtrip(a):
    if a != 0:
        x = FieldElement(a)
        assert (x * x.inverse()).value == 1


def test_pow_and_div():
    x = FieldElement(7)
    assert x ** 3 == x * x * x
    assert (x / x).value == 1
