import cmath
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from semiforms.exactnum import ConductorMismatch, CycNum, cyclotomic_polynomial, sqrt3

CONDUCTORS = (1, 2, 3, 4, 5, 6, 8, 12)


def z(m, k=1):
    return CycNum.root_of_unity(m, k)


@st.composite
def elements(draw, m=None):
    m = m or draw(st.sampled_from(CONDUCTORS))
    nums = draw(st.lists(st.integers(-20, 20), min_size=1, max_size=m))
    den = draw(st.integers(1, 7))
    coeffs = [Fraction(a, den) for a in nums]
    return CycNum.from_coeffs(m, coeffs)


@given(st.sampled_from(CONDUCTORS).flatmap(lambda m: st.tuples(elements(m), elements(m), elements(m))))
def test_field_axioms(abc):
    a, b, c = abc
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == CycNum.zero(a.m)


@settings(max_examples=60)
@given(elements())
def test_inverse_and_embedding(a):
    emb = a.complex_embed()
    if a.is_zero():
        with pytest.raises(ZeroDivisionError):
            a.inverse()
        return
    assert a * a.inverse() == CycNum.one(a.m)
    # float oracle for the embedding of products and conjugates
    assert abs((a * a).complex_embed() - emb * emb) < 1e-6 * (1 + abs(emb) ** 2)
    assert abs(a.conjugate().complex_embed() - emb.conjugate()) < 1e-9 * (1 + abs(emb))


@given(elements())
def test_json_roundtrip(a):
    assert CycNum.from_json(a.m, a.to_json()) == a


def test_small_identities():
    assert z(4) * z(4) == CycNum.from_rational(4, -1)
    s = z(12) + z(12, 11)
    assert s * s == CycNum.from_rational(12, 3)
    for k in range(12):
        assert z(12, k).inverse() == z(12, (12 - k) % 12)
    assert z(4).conjugate() == -z(4)
    assert CycNum.from_rational(5, Fraction(3, 2)).conjugate() == CycNum.from_rational(5, Fraction(3, 2))
    assert (z(12) + z(12, 5)).conjugate() == z(12, 11) + z(12, 7)
    assert sqrt3() * sqrt3() == CycNum.from_rational(12, 3)


def test_embeddings():
    assert abs(z(4).complex_embed() - 1j) < 1e-12
    assert abs(z(3).complex_embed() - complex(-0.5, 0.8660254)) < 1e-6
    assert abs((z(12) + z(12, 11)).complex_embed() - 1.7320508) < 1e-6


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(1) == (-1, 1)
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(12) == (1, 0, -1, 0, 1)
    # float oracle: primitive roots are zeros
    for m in (5, 8, 9, 12):
        phi = cyclotomic_polynomial(m)
        w = cmath.exp(2j * cmath.pi / m)
        assert abs(sum(c * w**i for i, c in enumerate(phi))) < 1e-9


def test_root_exponents():
    assert z(12, 5).root_of_unity_exponent() == 5
    assert (-z(3)).root_of_unity_exponent() is not None
    assert CycNum.from_rational(12, 2).root_of_unity_exponent() is None


def test_errors():
    with pytest.raises(ConductorMismatch):
        z(4) + z(3)
    with pytest.raises(ZeroDivisionError):
        CycNum.one(6) / CycNum.zero(6)
