"""Exact arithmetic in Q and real quadratic fields Q(sqrt(d)).

Rationals are :class:`fractions.Fraction`.  A :class:`Quad` is ``a + b*sqrt(d)``
with rational ``a, b``.  Elements with ``b == 0`` are stored with ``d = 1`` so
that a rational is the same object whatever field it was computed in; mixing
two genuinely different fields raises :class:`MismatchedField`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

__all__ = [
    "Quad", "MismatchedField", "squarefree", "qadd", "qsub", "qmul", "qdiv",
    "qsign", "qfloor", "qmod1", "parse_scalar", "as_quad", "sqrt_sign",
]


class MismatchedField(ValueError):
    pass


def squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def sqrt_sign(a, b, d) -> int:
    """Sign of ``a + b*sqrt(d)`` for rationals (or ints) ``a, b`` and ``d >= 1``."""
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: compare a^2 with b^2 d
    lhs = a * a
    rhs = b * b * d
    if lhs == rhs:
        return 0
    return sa if lhs > rhs else sb


Number = Union[int, Fraction, "Quad"]


class Quad:
    """An element ``a + b*sqrt(d)`` of a real quadratic field (or of Q).

    Immutable and hashable.  Ordering and ``floor`` are exact.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d: int = 1):
        a = Fraction(a)
        b = Fraction(b)
        if b == 0:
            d = 1
        elif d == 1:
            a, b = a + b, Fraction(0)
        elif not squarefree(d):
            raise ValueError(f"d={d} is not a squarefree integer >= 2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", int(d))

    def __setattr__(self, name, value):
        raise AttributeError("Quad is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        return (Quad, (self.a, self.b, self.d))

    @classmethod
    def sqrt(cls, d: int) -> "Quad":
        return cls(0, 1, d)

    # -- field plumbing -------------------------------------------------

    def _common(self, other) -> tuple["Quad", int]:
        if not isinstance(other, Quad):
            other = Quad(other)
        if self.d == other.d or other.d == 1:
            return other, self.d
        if self.d == 1:
            return other, other.d
        raise MismatchedField(f"Q(sqrt({self.d})) vs Q(sqrt({other.d}))")

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> "Quad":
        return Quad(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (Quad, int, Fraction)):
            return NotImplemented
        o, d = self._common(other)
        return Quad(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, (Quad, int, Fraction)):
            return NotImplemented
        o, d = self._common(other)
        return Quad(self.a - o.a, self.b - o.b, d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (Quad, int, Fraction)):
            return NotImplemented
        o, d = self._common(other)
        return Quad(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def inverse(self) -> "Quad":
        n = self.norm()
        if n == 0:
            # for squarefree d the norm vanishes only at zero
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        return Quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if not isinstance(other, (Quad, int, Fraction)):
            return NotImplemented
        o, _ = self._common(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return Quad(other) / self

    # -- comparisons ----------------------------------------------------

    def sign(self) -> int:
        return sqrt_sign(self.a, self.b, self.d)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if not isinstance(other, Quad):
            return NotImplemented
        return self.a == other.a and self.b == other.b and (self.b == 0 or self.d == other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- conversions ----------------------------------------------------

    def floor(self) -> int:
        # start from a float guess, then fix exactly
        guess = math.floor(float(self.a) + float(self.b) * math.sqrt(self.d))
        while self < guess:
            guess -= 1
        while self >= guess + 1:
            guess += 1
        return guess

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def to_decimal(self, digits: int = 50):
        import mpmath

        with mpmath.workdps(digits + 10):
            return mpmath.mpf(self.a.numerator) / self.a.denominator + \
                mpmath.mpf(self.b.numerator) / self.b.denominator * mpmath.sqrt(self.d)

    def __str__(self):
        if self.b == 0:
            return _frac_str(self.a)
        coef = abs(self.b)
        rad = f"sqrt({self.d})" if coef == 1 else f"{_frac_str(coef)}*sqrt({self.d})"
        if self.a == 0:
            return ("-" if self.b < 0 else "") + rad
        return f"{_frac_str(self.a)}{'-' if self.b < 0 else '+'}{rad}"

    def __repr__(self):
        return f"Quad({self})"


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def as_quad(x) -> Quad:
    if isinstance(x, Quad):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact scalars")
    return Quad(x)


def qadd(x, y):
    return as_quad(x) + as_quad(y)


def qsub(x, y):
    return as_quad(x) - as_quad(y)


def qmul(x, y):
    return as_quad(x) * as_quad(y)


def qdiv(x, y):
    return as_quad(x) / as_quad(y)


def qsign(x) -> int:
    return as_quad(x).sign()


def qfloor(x) -> int:
    return as_quad(x).floor()


def qmod1(x) -> Quad:
    """Reduce into ``[0, 1)``; the result differs from ``x`` by an integer."""
    x = as_quad(x)
    return x - x.floor()


_RAT = r"[+-]?\d+(?:/\d+)?"
_SCALAR = re.compile(
    rf"^\s*(?:(?P<a>{_RAT})\s*(?=[+-]|$))?"
    rf"(?:(?P<sgn>[+-])?\s*(?:(?P<b>\d+(?:/\d+)?)\s*\*\s*)?sqrt\(\s*(?P<d>\d+)\s*\))?\s*$"
)


_SWAPPED = re.compile(
    rf"^\s*(?P<sgn>[+-])?\s*(?:(?P<b>\d+(?:/\d+)?)\s*\*\s*)?sqrt\(\s*(?P<d>\d+)\s*\)"
    rf"\s*(?P<asgn>[+-])\s*(?P<a>\d+(?:/\d+)?)\s*$"
)


def parse_scalar(text: str, d: int | None = None) -> Quad:
    """Parse ``"p/q"``, ``"p/q+r/s*sqrt(d)"``, ``"-sqrt(5)"`` and similar.

    ``d`` (if given) must agree with any ``sqrt(..)`` present.
    """
    if not isinstance(text, str):
        return as_quad(text)
    w = _SWAPPED.match(text)
    if w:
        # "r*sqrt(d)+a" written radical first
        a = w.group("asgn") + w.group("a")
        b = (w.group("sgn") or "") + (w.group("b") or "1")
        text = f"{a}{'+' if b[0] != '-' else ''}{b}*sqrt({w.group('d')})"
    m = _SCALAR.match(text)
    if not m or (m.group("a") is None and m.group("d") is None):
        raise ValueError(f"cannot parse scalar {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    if m.group("d") is None:
        return Quad(a)
    if m.group("a") is not None and m.group("sgn") is None:
        raise ValueError(f"cannot parse scalar {text!r}")
    rd = int(m.group("d"))
    if d is not None and d != rd:
        raise MismatchedField(f"scalar {text!r} is not in Q(sqrt({d}))")
    b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
    if m.group("sgn") == "-":
        b = -b
    return Quad(a, b, rd)
