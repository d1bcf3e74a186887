"""Exact arithmetic over Gaussian rationals extended by square roots.

A :class:`Surd` is a finite sum ``sum_r (a_r + i b_r) * sqrt(r)`` with rational
``a_r, b_r`` and distinct squarefree radicands ``r``.  Square roots of distinct
squarefree integers are linearly independent over the rationals, so the
reduced dictionary form is canonical and equality is structural.

This covers every amplitude of the form ``p/q * sqrt(r/s)`` (times a power of
``i``) together with the ``sqrt(k)`` factors produced by ladder operators.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

_ZERO = Fraction(0)


@lru_cache(maxsize=4096)
def split_square(k: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``k == s*s*r`` and ``r`` squarefree."""
    if k < 0:
        raise ValueError("split_square needs a non-negative integer")
    if k == 0:
        return 0, 1
    root = math.isqrt(k)
    if root * root == k:
        return root, 1
    s, r, p = 1, k, 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return s, r


class Surd:
    __slots__ = ("_terms",)

    def __init__(self, value=0):
        if isinstance(value, Surd):
            self._terms = dict(value._terms)
            return
        if isinstance(value, complex):
            raise TypeError("Surd cannot be built from a float complex")
        if isinstance(value, float):
            raise TypeError("Surd cannot be built from a float; use Fraction")
        q = Fraction(value)
        self._terms = {1: (q, _ZERO)} if q else {}

    @classmethod
    def _from_terms(cls, terms):
        out = cls.__new__(cls)
        out._terms = {r: c for r, c in terms.items() if c[0] or c[1]}
        return out

    @classmethod
    def sqrt(cls, value) -> Surd:
        """Exact square root of a non-negative rational."""
        q = Fraction(value)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls(0)
        # sqrt(p/d) = sqrt(p*d)/d
        s, r = split_square(q.numerator * q.denominator)
        return cls._from_terms({r: (Fraction(s, q.denominator), _ZERO)})

    @classmethod
    def imag_unit(cls) -> Surd:
        return cls._from_terms({1: (_ZERO, Fraction(1))})

    @staticmethod
    def _coerce(other):
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Rational)):
            return Surd(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for r, (a, b) in other._terms.items():
            a0, b0 = terms.get(r, (_ZERO, _ZERO))
            terms[r] = (a0 + a, b0 + b)
        return Surd._from_terms(terms)

    __radd__ = __add__

    def __neg__(self):
        return Surd._from_terms({r: (-a, -b) for r, (a, b) in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms: dict[int, tuple[Fraction, Fraction]] = {}
        for r1, (a1, b1) in self._terms.items():
            for r2, (a2, b2) in other._terms.items():
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                re = (a1 * a2 - b1 * b2) * g
                im = (a1 * b2 + b1 * a2) * g
                a0, b0 = terms.get(r, (_ZERO, _ZERO))
                terms[r] = (a0 + re, b0 + im)
        return Surd._from_terms(terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Surd):
            if not other.is_rational():
                return NotImplemented
            other = other.to_fraction()
        if not isinstance(other, (int, Rational)):
            return NotImplemented
        q = Fraction(other)
        if q == 0:
            raise ZeroDivisionError("Surd division by zero")
        return Surd._from_terms({r: (a / q, b / q) for r, (a, b) in self._terms.items()})

    def conjugate(self) -> Surd:
        return Surd._from_terms({r: (a, -b) for r, (a, b) in self._terms.items()})

    def abs2(self) -> Surd:
        return self * self.conjugate()

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        """True when the value is a real rational number."""
        if not self._terms:
            return True
        if set(self._terms) != {1}:
            return False
        return self._terms[1][1] == 0

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not a real rational")
        return self._terms.get(1, (_ZERO, _ZERO))[0]

    def radicands(self):
        return frozenset(self._terms)

    def __complex__(self):
        re = im = 0.0
        for r, (a, b) in self._terms.items():
            root = math.sqrt(r)
            re += float(a) * root
            im += float(b) * root
        return complex(re, im)

    def __float__(self):
        z = complex(self)
        if any(b for _, b in self._terms.values()):
            raise TypeError("Surd has an imaginary part")
        return z.real

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        # rationals compare equal to Fractions, so they must hash alike
        if self.is_rational():
            return hash(self.to_fraction())
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "Surd(0)"
        parts = []
        for r in sorted(self._terms):
            a, b = self._terms[r]
            coef = f"{a}" if not b else f"({a}{'+' if b >= 0 else '-'}{abs(b)}i)"
            parts.append(coef if r == 1 else f"{coef}*sqrt({r})")
        return "Surd(" + " + ".join(parts) + ")"
