"""Scalar fields for the operator algebra.

Two interchangeable fields are provided:

``NumericField``
    plain floats, used for propagators and large lattices.
``ExactField``
    Laurent polynomials with rational coefficients in a formal unit
    ``u = q**(1/den)`` with ``den = 2*L*refine``.  With the default
    ``refine=1`` the unit is ``w = q**(1/(2L))`` and every power of ``q``
    appearing in the generators, the quantum-algebra representation, the
    gauge transformations and the shock measures becomes an integer power
    of ``w``.  ``refine=2`` additionally admits square roots of odd powers
    of ``w`` (needed e.g. for ``alpha**((L+1-2k)/2)`` with ``alpha = w**3``
    on even lattices).

All builders in the package take a field and never inspect the
representation of the scalars themselves.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

__all__ = [
    "LaurentPoly",
    "NumericField",
    "ExactField",
    "Field",
    "Scalar",
    "q_number",
    "q_factorial",
    "as_fraction",
]


def as_fraction(r) -> Fraction:
    """Convert ints, Fractions and ``"a/b"`` strings to :class:`Fraction`."""
    if isinstance(r, Fraction):
        return r
    if isinstance(r, (int, Rational)):
        return Fraction(r)
    if isinstance(r, str):
        return Fraction(r.strip())
    if isinstance(r, float):
        f = Fraction(r).limit_denominator(10**6)
        if float(f) != r:
            raise ValueError(f"cannot interpret {r!r} as an exact rational")
        return f
    raise TypeError(f"cannot interpret {r!r} as a rational number")


class LaurentPoly:
    """Finite sum ``sum_m c_m u**m`` with rational ``c_m`` and integer ``m``.

    Instances are immutable and kept in canonical form (no zero
    coefficients).  Ring operations are exact; division is only defined by
    monomials (``/``) or, with a divisibility check, by arbitrary
    polynomials (:meth:`divexact`).
    """

    __slots__ = ("_t", "_hash")

    def __init__(self, terms=None):
        t = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for m, c in items:
                c = c if isinstance(c, Fraction) else Fraction(c)
                if c:
                    m = int(m)
                    c = t.get(m, 0) + c
                    if c:
                        t[m] = c
                    else:
                        t.pop(m, None)
        self._t = t
        self._hash = None

    @classmethod
    def _raw(cls, t: dict) -> "LaurentPoly":
        obj = cls.__new__(cls)
        obj._t = t
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "LaurentPoly":
        c = Fraction(coeff)
        return cls._raw({int(exponent): c} if c else {})

    @classmethod
    def const(cls, c) -> "LaurentPoly":
        return cls.monomial(0, c)

    # -- structure -----------------------------------------------------
    def terms(self) -> list[tuple[int, Fraction]]:
        """Sorted ``(exponent, coefficient)`` pairs."""
        return sorted(self._t.items())

    def is_zero(self) -> bool:
        return not self._t

    def is_monomial(self) -> bool:
        return len(self._t) == 1

    def as_monomial(self) -> tuple[int, Fraction]:
        if len(self._t) != 1:
            raise ValueError(f"{self!r} is not a monomial")
        ((m, c),) = self._t.items()
        return m, c

    def exponents(self) -> tuple[int, int]:
        if not self._t:
            raise ValueError("zero polynomial has no exponents")
        return min(self._t), max(self._t)

    # -- arithmetic ----------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self._t) < len(other._t):
            a, b = other._t, self._t
        else:
            a, b = self._t, other._t
        t = dict(a)
        for m, c in b.items():
            s = t.get(m)
            if s is None:
                t[m] = c
            else:
                s = s + c
                if s:
                    t[m] = s
                else:
                    del t[m]
        return LaurentPoly._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({m: -c for m, c in self._t.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._t, other._t
        if len(a) == 1 and len(b) == 1:
            ((m1, c1),) = a.items()
            ((m2, c2),) = b.items()
            return LaurentPoly._raw({m1 + m2: c1 * c2})
        t: dict[int, Fraction] = {}
        for m1, c1 in a.items():
            for m2, c2 in b.items():
                m = m1 + m2
                s = t.get(m, 0) + c1 * c2
                if s:
                    t[m] = s
                else:
                    t.pop(m, None)
        return LaurentPoly._raw(t)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentPoly":
        m, c = self.as_monomial()
        return LaurentPoly._raw({-m: 1 / c})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of LaurentPoly by zero")
            return LaurentPoly._raw({m: c / other for m, c in self._t.items()})
        if isinstance(other, LaurentPoly):
            if other.is_monomial():
                return self * other.inverse()
            return self.divexact(other)
        return NotImplemented

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("LaurentPoly powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        if self.is_monomial():
            m, c = self.as_monomial()
            return LaurentPoly._raw({m * n: c**n})
        result = LaurentPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divexact(self, divisor: "LaurentPoly") -> "LaurentPoly":
        """Exact quotient ``self / divisor``; raises if there is a remainder."""
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return self
        if divisor.is_monomial():
            return self * divisor.inverse()
        dlo, dhi = divisor.exponents()
        dlead = divisor._t[dhi]
        rem = dict(self._t)
        quot: dict[int, Fraction] = {}
        while rem:
            top = max(rem)
            if top - dhi < min(rem) - dlo:
                break
            shift = top - dhi
            c = rem[top] / dlead
            quot[shift] = c
            for m, dc in divisor._t.items():
                k = m + shift
                s = rem.get(k, 0) - c * dc
                if s:
                    rem[k] = s
                else:
                    rem.pop(k, None)
        if rem:
            raise ArithmeticError(f"{self!r} is not divisible by {divisor!r}")
        return LaurentPoly._raw(quot)

    # -- comparison ----------------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._t == other._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def __bool__(self):
        return bool(self._t)

    # -- evaluation / io -----------------------------------------------
    def evaluate(self, unit: float) -> float:
        """Numeric value with the formal unit set to ``unit``."""
        return math.fsum(float(c) * unit**m for m, c in self._t.items())

    def to_pairs(self) -> list[list]:
        return [[m, f"{c.numerator}/{c.denominator}"] for m, c in self.terms()]

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "LaurentPoly":
        return cls((int(m), Fraction(c)) for m, c in pairs)

    def __repr__(self):
        return f"LaurentPoly({[(m, str(c)) for m, c in self.terms()]})"


Scalar = Union[float, LaurentPoly]


class NumericField:
    """Floating point field with a numeric asymmetry ``q``."""

    exact = False

    def __init__(self, q: float):
        q = float(q)
        if not q > 0 or not math.isfinite(q):
            raise ValueError(f"q must be positive and finite, got {q}")
        self.q = q
        self.one = 1.0
        self.zero = 0.0

    def __repr__(self):
        return f"NumericField(q={self.q!r})"

    def __eq__(self, other):
        return isinstance(other, NumericField) and other.q == self.q

    def __hash__(self):
        return hash(("numeric", self.q))

    def inverted(self) -> "NumericField":
        """The same field with ``q`` replaced by ``1/q``."""
        return NumericField(1.0 / self.q)

    def q_pow(self, r) -> float:
        return self.q ** float(r)

    def const(self, c) -> float:
        return float(c)

    def power(self, x, r) -> float:
        if x == 0:
            raise ZeroDivisionError("zero parameter raised to a power")
        return float(x) ** float(r)

    def inv(self, x) -> float:
        if x == 0:
            raise ZeroDivisionError("zero parameter has no inverse")
        return 1.0 / x

    def is_zero(self, x) -> bool:
        return x == 0

    def to_float(self, x) -> float:
        return float(x)

    def check_positive(self, x, name: str) -> None:
        if not x > 0:
            raise ValueError(f"{name} must be positive in numeric mode, got {x}")


class ExactField:
    """Laurent polynomials in ``u = q**(1/(2*L*refine))``.

    ``q_sign=-1`` describes the field with ``q`` replaced by ``1/q`` while
    keeping the same formal unit, so that parameters built by
    :meth:`w_pow` keep their meaning.
    """

    exact = True

    def __init__(self, L: int, refine: int = 1, q_sign: int = 1, q_value: float | None = None):
        if L < 1:
            raise ValueError("L must be positive")
        if refine < 1:
            raise ValueError("refine must be a positive integer")
        if q_sign not in (1, -1):
            raise ValueError("q_sign must be +1 or -1")
        self.L = int(L)
        self.refine = int(refine)
        self.den = 2 * self.L * self.refine
        self.q_sign = q_sign
        self.q_value = q_value
        self.one = LaurentPoly.const(1)
        self.zero = LaurentPoly()

    def __repr__(self):
        return f"ExactField(L={self.L}, refine={self.refine}, q_sign={self.q_sign})"

    def __eq__(self, other):
        return (
            isinstance(other, ExactField)
            and (other.L, other.refine, other.q_sign) == (self.L, self.refine, self.q_sign)
        )

    def __hash__(self):
        return hash(("exact", self.L, self.refine, self.q_sign))

    def inverted(self) -> "ExactField":
        return ExactField(self.L, self.refine, -self.q_sign, self.q_value)

    def q_pow(self, r) -> LaurentPoly:
        r = as_fraction(r)
        e = r * self.den
        if e.denominator != 1:
            raise ValueError(
                f"q**({r}) is not an integer power of the unit q**(1/{self.den})"
            )
        return LaurentPoly.monomial(self.q_sign * int(e))

    def w_pow(self, m) -> LaurentPoly:
        """``w**m`` with ``w = q**(1/(2L))`` of the original (uninverted) ``q``."""
        m = as_fraction(m) * self.refine
        if m.denominator != 1:
            raise ValueError(f"w**{m / self.refine} is not representable with refine={self.refine}")
        return LaurentPoly.monomial(int(m))

    def const(self, c) -> LaurentPoly:
        return LaurentPoly.const(as_fraction(c))

    def coerce(self, x) -> LaurentPoly:
        if isinstance(x, LaurentPoly):
            return x
        return self.const(x)

    def power(self, x, r) -> LaurentPoly:
        x = self.coerce(x)
        r = as_fraction(r)
        if r.denominator == 1:
            return x ** int(r)
        m, c = x.as_monomial()
        e = m * r
        if e.denominator != 1:
            raise ValueError(f"({x!r})**({r}) needs a finer unit (increase refine)")
        if c != 1:
            root = _rational_root(c, r)
            if root is None:
                raise ValueError(f"coefficient {c} has no rational power {r}")
            return LaurentPoly.monomial(int(e), root)
        return LaurentPoly.monomial(int(e))

    def inv(self, x) -> LaurentPoly:
        return self.coerce(x).inverse()

    def is_zero(self, x) -> bool:
        return self.coerce(x).is_zero()

    def unit_value(self, q: float) -> float:
        return float(q) ** (1.0 / self.den)

    def evaluate(self, x, q: float) -> float:
        """Numeric value of ``x`` at the (original) asymmetry ``q``."""
        return self.coerce(x).evaluate(self.unit_value(q))

    def to_float(self, x) -> float:
        if self.q_value is None:
            raise ValueError("ExactField has no sample q_value for numeric evaluation")
        return self.evaluate(x, self.q_value)

    def check_positive(self, x, name: str) -> None:
        x = self.coerce(x)
        if x.is_zero() or any(c <= 0 for _, c in x.terms()):
            raise ValueError(f"{name} must have positive coefficients, got {x!r}")


def _rational_root(c: Fraction, r: Fraction) -> Fraction | None:
    num = _int_root(abs(c.numerator), r.denominator)
    den = _int_root(c.denominator, r.denominator)
    if num is None or den is None or c < 0:
        return None
    return Fraction(num, den) ** r.numerator


def _int_root(n: int, k: int) -> int | None:
    x = round(n ** (1.0 / k))
    for cand in (x - 1, x, x + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


Field = Union[NumericField, ExactField]


def q_number(x, field: Field):
    """Symmetric q-number ``(q**x - q**-x) / (q - 1/q)``.

    In exact mode ``x`` must be an integer and the result is the finite sum
    ``q**(x-1) + q**(x-3) + ... + q**(1-x)``.
    """
    if field.exact:
        if int(x) != x:
            raise ValueError("exact q-numbers need an integer argument")
        n = int(x)
        sign = 1
        if n < 0:
            n, sign = -n, -1
        acc = field.zero
        for j in range(n):
            acc = acc + field.q_pow(n - 1 - 2 * j)
        return acc if sign > 0 else -acc
    q = field.q
    if q == 1.0:
        raise ZeroDivisionError("q-number undefined at q = 1")
    return (q**x - q ** (-x)) / (q - 1.0 / q)


def q_factorial(n: int, field: Field):
    """``[n]_q! = [1]_q [2]_q ... [n]_q`` with ``[0]_q! = 1``."""
    if n < 0:
        raise ValueError("q-factorial of a negative integer")
    acc = field.one
    for k in range(1, n + 1):
        acc = acc * q_number(k, field)
    return acc
