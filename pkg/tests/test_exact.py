import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockgate.exact import Surd, split_square


def test_split_square():
    assert split_square(0) == (0, 1)
    assert split_square(1) == (1, 1)
    assert split_square(12) == (2, 3)
    assert split_square(72) == (6, 2)
    assert split_square(49) == (7, 1)
    for k in range(1, 2000):
        s, r = split_square(k)
        assert s * s * r == k
        assert all(r % (p * p) for p in range(2, math.isqrt(r) + 1))


def test_sqrt_canonical_forms():
    assert Surd.sqrt(8) == 2 * Surd.sqrt(2)
    assert Surd.sqrt(Fraction(1, 2)) == Surd.sqrt(2) / 2
    assert Surd.sqrt(4) == Surd(2)
    assert Surd.sqrt(2) * Surd.sqrt(2) == Surd(2)
    assert Surd.sqrt(6) == Surd.sqrt(2) * Surd.sqrt(3)
    assert (Surd.sqrt(2) + Surd.sqrt(3)).radicands() == {2, 3}
    with pytest.raises(ValueError):
        Surd.sqrt(-1)


def test_imaginary_unit():
    i = Surd.imag_unit()
    assert i * i == Surd(-1)
    assert i.conjugate() == -i
    assert (i * Surd.sqrt(3)).abs2() == Surd(3)
    assert not (i * Surd.sqrt(3)).is_rational()
    with pytest.raises(TypeError):
        float(i)


def test_rational_queries_and_hash():
    x = Surd(Fraction(-3, 2))
    assert x.is_rational() and x.to_fraction() == Fraction(-3, 2)
    assert x == Fraction(-3, 2)
    assert hash(x) == hash(Fraction(-3, 2))
    assert len({Surd(1), Surd(1), Surd.sqrt(1)}) == 1
    with pytest.raises(ValueError):
        Surd.sqrt(2).to_fraction()
    with pytest.raises(TypeError):
        Surd(0.5)
    assert Surd(0).is_zero() and not Surd(0)
    with pytest.raises(ZeroDivisionError):
        Surd(1) / 0


small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def surds(draw):
    out = Surd(0)
    for _ in range(draw(st.integers(0, 3))):
        coef = Surd(draw(small_rationals)) + Surd.imag_unit() * draw(small_rationals)
        out = out + coef * Surd.sqrt(draw(st.integers(0, 30)))
    return out


@settings(max_examples=100, deadline=None)
@given(surds(), surds(), surds())
def test_ring_axioms_against_complex(a, b, c):
    # the float image is a ring homomorphism
    for exact, approx in [
        (a + b, complex(a) + complex(b)),
        (a * b, complex(a) * complex(b)),
        (a - b, complex(a) - complex(b)),
        (a.conjugate(), complex(a).conjugate()),
    ]:
        assert cmath.isclose(complex(exact), approx, rel_tol=1e-12, abs_tol=1e-9)
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a - a == Surd(0)
    assert float(a.abs2()) == pytest.approx(abs(complex(a)) ** 2, abs=1e-9)
