"""Exact scalars of the form q / sqrt(r), q rational and r a positive integer.

Every inner product between two embedded subset vertices, or between a
rational vector and a subset vertex, has this shape.  Values are kept in a
canonical form (square-free radicand) so that equality is structural and
ordering can be decided exactly by comparing signs and cross-multiplied
squares, with no floating arithmetic anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

import mpmath


def _square_free_split(r: int) -> tuple[int, int]:
    """Split r = a*a*b with b square-free; returns (a, b)."""
    a, b = 1, 1
    d = 2
    while d * d <= r:
        if r % d == 0:
            e = 0
            while r % d == 0:
                r //= d
                e += 1
            a *= d ** (e // 2)
            if e % 2:
                b *= d
        d += 1
    return a, b * r


@total_ordering
class ExactScalar:
    """Canonical representation of q / sqrt(r).

    The constructor accepts any rational `num` (int, Fraction, or 2-tuple)
    and a positive integer radicand; square factors of the radicand are
    folded into the rational part, so `ExactScalar(1, 4) == Fraction(1, 2)`.
    """

    __slots__ = ("num", "rad")

    def __init__(self, num, rad: int = 1):
        if isinstance(num, tuple):
            num = Fraction(*num)
        else:
            num = Fraction(num)
        rad = int(rad)
        if rad <= 0:
            raise ValueError(f"radicand must be positive, got {rad}")
        if rad > 1:
            a, b = _square_free_split(rad)
            num /= a
            rad = b
        if num == 0:
            rad = 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "rad", rad)

    def __setattr__(self, *args):
        raise AttributeError("ExactScalar is immutable")

    # -- arithmetic (closed operations only) --------------------------------

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(-self.num, self.rad)

    def __abs__(self) -> "ExactScalar":
        return ExactScalar(abs(self.num), self.rad)

    def __mul__(self, other) -> "ExactScalar":
        other = _coerce(other)
        return ExactScalar(self.num * other.num, self.rad * other.rad)

    __rmul__ = __mul__

    # -- exact order ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.rad == other.rad

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        s1, s2 = _sign(self.num), _sign(other.num)
        if s1 != s2:
            return s1 < s2
        if s1 == 0:
            return False
        # same nonzero sign: compare squares scaled by the opposite radicand
        lhs = self.num * self.num * other.rad
        rhs = other.num * other.num * self.rad
        if s1 > 0:
            return lhs < rhs
        return lhs > rhs

    def __hash__(self):
        if self.rad == 1:
            return hash(self.num)
        return hash((self.num, self.rad))

    # -- conversions ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num == 0

    def sign(self) -> int:
        return _sign(self.num)

    def __float__(self) -> float:
        return float(self.num) / math.sqrt(self.rad)

    def to_mpf(self, prec: int = 256) -> mpmath.mpf:
        """Evaluate at the given binary precision."""
        with mpmath.workprec(prec):
            value = mpmath.mpf(self.num.numerator) / self.num.denominator
            if self.rad > 1:
                value /= mpmath.sqrt(self.rad)
            return value

    def __repr__(self) -> str:
        if self.rad == 1:
            return f"ExactScalar({self.num})"
        return f"ExactScalar({self.num}/sqrt({self.rad}))"


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


def _coerce(value) -> ExactScalar:
    if isinstance(value, ExactScalar):
        return value
    if isinstance(value, (int, Fraction)):
        return ExactScalar(value)
    return NotImplemented
