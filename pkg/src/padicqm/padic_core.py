"""Finite-window p-adic arithmetic, balls, the additive character and the Monna map.

A p-adic number is held exactly as ``p**valuation * sum(d_i p**i)`` with the
digits known up to (but excluding) position ``resolution_cap``.  Ring
operations are exact modulo ``p**cap`` of the result; norms, measures,
fractional parts and Monna images are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

DEFAULT_CAP = 24

Rational = Union[int, Fraction]


def ord_p(value: Rational, p: int) -> float | int:
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    q = Fraction(value)
    if q == 0:
        return math.inf
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _int_ord(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _digits_of(n: int, p: int, count: int | None = None) -> tuple[int, ...]:
    out = []
    while n and (count is None or len(out) < count):
        n, d = divmod(n, p)
        out.append(d)
    if count is not None:
        out.extend([0] * (count - len(out)))
    return tuple(out)


def _check_prime(p: int) -> None:
    if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not a prime")


@dataclass(frozen=True)
class PAdicApprox:
    """A p-adic number known exactly on the digit window ``[valuation, resolution_cap)``.

    ``digits[i]`` is the coefficient of ``p**(valuation + i)``.  The canonical
    zero has no digits and ``valuation == resolution_cap``.
    """

    prime: int
    valuation: int
    digits: tuple[int, ...]
    resolution_cap: int

    def __post_init__(self):
        p = self.prime
        if any(not 0 <= d < p for d in self.digits):
            raise ValueError(f"digits must lie in [0, {p})")
        if self.digits and self.digits[0] == 0:
            raise ValueError("leading digit must be nonzero")
        if self.digits and self.digits[-1] == 0:
            raise ValueError("trailing zero digits must be stripped")
        if self.valuation > self.resolution_cap:
            raise ValueError("valuation exceeds resolution cap")
        if self.valuation + len(self.digits) > self.resolution_cap:
            raise ValueError("digits extend past the resolution cap")
        if not self.digits and self.valuation != self.resolution_cap:
            raise ValueError("zero must have valuation equal to its resolution cap")

    # -- construction -----------------------------------------------------

    @classmethod
    def _make(cls, p: int, n: int, shift: int, cap: int) -> "PAdicApprox":
        """Normalize ``n * p**shift`` known modulo ``p**cap``."""
        if n == 0 or shift >= cap:
            return cls.zero(p, cap)
        v = _int_ord(n, p)
        if shift + v >= cap:
            return cls.zero(p, cap)
        unit = (n // p**v) % p ** (cap - shift - v)
        digits = _digits_of(unit, p)
        return cls(p, shift + v, digits, cap)

    @classmethod
    def zero(cls, p: int, cap: int = DEFAULT_CAP) -> "PAdicApprox":
        return cls(p, cap, (), cap)

    @classmethod
    def from_digits(cls, p: int, valuation: int, digits: Sequence[int],
                    cap: int | None = None) -> "PAdicApprox":
        """Build from raw digits starting at ``valuation`` (leading zeros allowed)."""
        digits = list(digits)
        if any(not 0 <= d < p for d in digits):
            raise ValueError(f"digits must lie in [0, {p})")
        if cap is None:
            cap = max(valuation + len(digits), valuation)
        n = sum(d * p**i for i, d in enumerate(digits))
        return cls._make(p, n, valuation, cap)

    @classmethod
    def from_rational(cls, value: Rational, p: int, cap: int = DEFAULT_CAP) -> "PAdicApprox":
        _check_prime(p)
        q = Fraction(value)
        if q == 0:
            return cls.zero(p, cap)
        v = ord_p(q, p)
        if v >= cap:
            return cls.zero(p, cap)
        num, den = q.numerator, q.denominator
        # strip the p-part so num/den is a p-adic unit
        if v >= 0:
            num //= p**v
        else:
            den //= p ** (-v)
        mod = p ** (cap - v)
        unit = num * pow(den, -1, mod) % mod
        return cls(p, v, _digits_of(unit, p), cap)

    def _coerce(self, other) -> "PAdicApprox":
        if isinstance(other, PAdicApprox):
            if other.prime != self.prime:
                raise ValueError(f"prime mismatch: {self.prime} vs {other.prime}")
            return other
        if isinstance(other, (int, Fraction)):
            # exact constants get enough digits never to limit the result's cap
            v = ord_p(other, self.prime)
            v = 0 if v == math.inf else abs(v)
            cap = self.resolution_cap + abs(self.valuation) + 2 * v + 1
            return PAdicApprox.from_rational(other, self.prime, cap)
        return NotImplemented

    # -- accessors --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.digits

    @property
    def unit_part(self) -> int:
        return sum(d * self.prime**i for i, d in enumerate(self.digits))

    def digit(self, position: int) -> int:
        i = position - self.valuation
        if 0 <= i < len(self.digits):
            return self.digits[i]
        return 0

    def to_fraction(self) -> Fraction:
        """Exact rational value of the (terminating) digit window."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit_part) * Fraction(self.prime) ** self.valuation

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.prime
        cap = min(self.resolution_cap, other.resolution_cap)
        shift = min(self.valuation, other.valuation)
        n = (self.unit_part * p ** (self.valuation - shift)
             + other.unit_part * p ** (other.valuation - shift))
        return PAdicApprox._make(p, n, shift, cap)

    __radd__ = __add__

    def __neg__(self) -> "PAdicApprox":
        return PAdicApprox._make(self.prime, -self.unit_part, self.valuation, self.resolution_cap)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        cap = min(self.resolution_cap + other.valuation, other.resolution_cap + self.valuation)
        if self.is_zero or other.is_zero:
            return PAdicApprox.zero(self.prime, cap)
        return PAdicApprox._make(self.prime, self.unit_part * other.unit_part,
                                 self.valuation + other.valuation, cap)

    __rmul__ = __mul__

    def inverse(self) -> "PAdicApprox":
        if self.is_zero:
            raise ZeroDivisionError("p-adic zero has no inverse")
        n = self.resolution_cap - self.valuation
        unit = pow(self.unit_part, -1, self.prime**n)
        return PAdicApprox._make(self.prime, unit, -self.valuation, n - self.valuation)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    # -- rendering --------------------------------------------------------

    def __str__(self) -> str:
        p = self.prime
        lo = min(self.valuation, 0) if not self.is_zero else 0
        hi = max(self.valuation + len(self.digits) - 1, 0)
        left = " ".join(str(self.digit(i)) for i in range(hi, -1, -1))
        right = " ".join(str(self.digit(i)) for i in range(-1, lo - 1, -1))
        text = f"p={p}: …{left}"
        return text + (f" . {right}" if right else "")


def valuation_and_norm(x: PAdicApprox) -> tuple[float | int, Fraction]:
    """Return ``(ord(x), |x|_p)``; zero gives ``(inf, 0)``."""
    if x.is_zero:
        return math.inf, Fraction(0)
    return x.valuation, Fraction(x.prime) ** (-x.valuation)


def norm(x: PAdicApprox) -> Fraction:
    return valuation_and_norm(x)[1]


def fractional_part(x: PAdicApprox) -> Fraction:
    """{x}_p: the digits at negative positions, as a rational in [0, 1)."""
    p = x.prime
    total = Fraction(0)
    for i, d in enumerate(x.digits):
        pos = x.valuation + i
        if pos >= 0:
            break
        total += d * Fraction(p) ** pos
    return total


def additive_character(x: PAdicApprox) -> complex:
    """chi_p(x) = exp(2 pi i {x}_p)."""
    frac = fractional_part(x)
    if frac == 0:
        return 1.0 + 0.0j
    return cmath.exp(2j * math.pi * frac.numerator / frac.denominator)


def monna_map(x: PAdicApprox) -> Fraction:
    """Digit reversal sum(y_j p^j) -> sum(y_j p^(-j-1)); exact for the window digits."""
    p = Fraction(x.prime)
    return sum((d * p ** (-(x.valuation + i) - 1) for i, d in enumerate(x.digits)), Fraction(0))


def monna_of_rational(q: Rational, p: int, cap: int = DEFAULT_CAP) -> Fraction:
    return monna_map(PAdicApprox.from_rational(q, p, cap))


def _reduce_center(center: Rational, p: int, scale: int) -> Fraction:
    """Canonical representative of ``center + p**scale Z_p``: its digits below ``scale``."""
    q = Fraction(center)
    if q == 0:
        return Fraction(0)
    v = ord_p(q, p)
    if v >= scale:
        return Fraction(0)
    x = PAdicApprox.from_rational(q, p, cap=scale)
    return x.to_fraction()


class BallRelation(enum.Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    FIRST_IN_SECOND = "first_in_second"
    SECOND_IN_FIRST = "second_in_first"


@dataclass(frozen=True)
class Ball:
    """The ball ``center + p**scale Z_p``, of radius ``p**-scale``.

    ``center`` is stored canonically as the rational formed by its digits at
    positions below ``scale``; two balls compare equal iff they are the same set.
    """

    prime: int
    scale: int
    center: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "center", _reduce_center(self.center, self.prime, self.scale))

    @classmethod
    def around(cls, x: PAdicApprox | Rational, scale: int, p: int | None = None) -> "Ball":
        if isinstance(x, PAdicApprox):
            if x.resolution_cap < scale:
                raise ValueError("point is not known to the ball's scale")
            return cls(x.prime, scale, x.to_fraction())
        if p is None:
            raise ValueError("prime required for a rational center")
        return cls(p, scale, Fraction(x))

    @property
    def haar_measure(self) -> Fraction:
        return Fraction(self.prime) ** (-self.scale)

    @property
    def radius(self) -> Fraction:
        return self.haar_measure

    def center_digits(self) -> dict[int, int]:
        """Nonzero center digits keyed by position (all positions < scale)."""
        if self.center == 0:
            return {}
        x = PAdicApprox.from_rational(self.center, self.prime, cap=self.scale)
        return {x.valuation + i: d for i, d in enumerate(x.digits) if d}

    def contains(self, x: PAdicApprox | Rational) -> bool:
        if isinstance(x, PAdicApprox):
            if x.prime != self.prime:
                raise ValueError("prime mismatch")
            if x.resolution_cap < self.scale:
                raise ValueError("point is not known to the ball's scale")
            x = x.to_fraction()
        return ord_p(Fraction(x) - self.center, self.prime) >= self.scale

    def children(self) -> list["Ball"]:
        """The p sub-balls of scale ``scale + 1`` in ascending digit order."""
        p = self.prime
        step = Fraction(p) ** self.scale
        return [Ball(p, self.scale + 1, self.center + d * step) for d in range(p)]

    def __str__(self) -> str:
        return f"{self.center}+{self.prime}^{self.scale}Z_{self.prime}"


def ball_relation(b1: Ball, b2: Ball) -> BallRelation:
    if b1.prime != b2.prime:
        raise ValueError(f"prime mismatch: {b1.prime} vs {b2.prime}")
    if b1.scale == b2.scale:
        return BallRelation.EQUAL if b1.center == b2.center else BallRelation.DISJOINT
    if b1.scale < b2.scale:
        return BallRelation.SECOND_IN_FIRST if b1.contains(b2.center) else BallRelation.DISJOINT
    return BallRelation.FIRST_IN_SECOND if b2.contains(b1.center) else BallRelation.DISJOINT


def monna_image_of_ball(ball: Ball) -> tuple[Fraction, Fraction]:
    """M(B) = M(center) + [0, p**-scale], as exact endpoints."""
    lo = monna_of_rational(ball.center, ball.prime, cap=max(ball.scale, 1))
    return lo, lo + ball.haar_measure


def partition(ball: Ball, scale: int) -> Iterable[Ball]:
    """All sub-balls of ``ball`` at the given finer scale."""
    if scale < ball.scale:
        raise ValueError("partition scale must not be coarser than the ball")
    level = [ball]
    for _ in range(scale - ball.scale):
        level = [c for b in level for c in b.children()]
    return level
