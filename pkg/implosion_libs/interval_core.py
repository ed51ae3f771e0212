"""Directed-rounding interval arithmetic.

Endpoints are plain floats. After every endpoint operation the result is moved one ulp outward
only when the floating point result is not exact, so operations whose true result is representable
(integer and dyadic data) return tight intervals. Exactness is decided with error-free
transformations for sums and products and with exact rationals for quotients and square roots.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from implosion_libs.exceptions import ImplosionError

LOGGER = logging.getLogger(__name__)
# Veltkamp splitter for doubles, 2**27 + 1
_SPLITTER = 134217729.0
# products outside this band skip the error-free check and are always widened
_EFT_MIN = 1e-280
_EFT_MAX = 1e280

Number = Union[int, float, Fraction]


class IntervalError(ImplosionError):
    """Parent exception for the module."""


class EmptyInterval(IntervalError):
    """Raised when building an interval with lo > hi or NaN endpoints."""


class DivisionByIntervalContainingZero(IntervalError):
    """Raised when the divisor interval contains zero, the caller must split or reformulate."""


class IntervalDomainError(IntervalError):
    """Raised when a function is applied completely outside its domain."""


class DegenerateBox(IntervalError):
    """Raised when trying to split a box that has no width left in any dimension."""


def _down(value: float) -> float:
    return math.nextafter(value, -math.inf)


def _up(value: float) -> float:
    return math.nextafter(value, math.inf)


def _two_sum(a: float, b: float) -> tuple[float, float]:
    total = a + b
    b_virtual = total - a
    a_virtual = total - b_virtual
    return total, (a - a_virtual) + (b - b_virtual)


def _split(a: float) -> tuple[float, float]:
    scaled = _SPLITTER * a
    high = scaled - (scaled - a)
    return high, a - high


def _two_prod(a: float, b: float) -> tuple[float, float]:
    product = a * b
    a_high, a_low = _split(a)
    b_high, b_low = _split(b)
    error = ((a_high * b_high - product) + a_high * b_low + a_low * b_high) + a_low * b_low
    return product, error


def _add_round(a: float, b: float, upward: bool) -> float:
    if not (math.isfinite(a) and math.isfinite(b)):
        return a + b

    total, error = _two_sum(a, b)
    if math.isinf(total):
        # overflow of finite operands
        return total if upward else _down(total)
    if upward:
        return _up(total) if error > 0 else total
    return _down(total) if error < 0 else total


def _mul_round(a: float, b: float, upward: bool) -> float:
    if a == 0 or b == 0:
        return 0.0

    if not (math.isfinite(a) and math.isfinite(b)):
        return a * b

    product = a * b
    if not _EFT_MIN < abs(product) < _EFT_MAX or abs(a) > _EFT_MAX or abs(b) > _EFT_MAX:
        return _up(product) if upward else _down(product)

    product, error = _two_prod(a, b)
    if upward:
        return _up(product) if error > 0 else product
    return _down(product) if error < 0 else product


def _div_round(a: float, b: float, upward: bool) -> float:
    if a == 0:
        return 0.0

    quotient = a / b
    if math.isnan(quotient):
        return math.inf if upward else -math.inf
    if not (math.isfinite(a) and math.isfinite(b)):
        return quotient
    if math.isinf(quotient):
        # overflow of finite operands
        return quotient if upward == (quotient > 0) else (_up(quotient) if upward else _down(quotient))
    if quotient == 0:
        # underflow, the true value is a tiny nonzero number of known sign
        sign_positive = (a > 0) == (b > 0)
        if upward:
            return _up(0.0) if sign_positive else 0.0
        return 0.0 if sign_positive else _down(0.0)

    exact = Fraction(a) / Fraction(b)
    rounded = Fraction(quotient)
    if upward:
        return _up(quotient) if rounded < exact else quotient
    return _down(quotient) if rounded > exact else quotient


def _pow_round(base: float, exponent: int, upward: bool) -> float:
    """Round a nonnegative base raised to a positive integer power."""
    result = base
    for _ in range(exponent - 1):
        result = _mul_round(result, base, upward)
    return result


def _float_enclosure(value: Fraction) -> tuple[float, float]:
    approx = float(value)
    exact = Fraction(approx)
    if exact == value:
        return approx, approx
    if exact < value:
        return approx, _up(approx)
    return _down(approx), approx


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] of reals with float endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        """Reject NaN endpoints and empty intervals."""
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise EmptyInterval(f"NaN endpoint in [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise EmptyInterval(f"Empty interval [{self.lo}, {self.hi}]")
        if self.lo == math.inf or self.hi == -math.inf:
            raise EmptyInterval(f"Interval [{self.lo}, {self.hi}] has no real point")

    @classmethod
    def point(cls, value: float) -> "Interval":
        """Degenerate interval for a float that is exact by definition."""
        return cls(float(value), float(value))

    @classmethod
    def from_fraction(cls, value: Number) -> "Interval":
        """Tightest float interval containing the given rational."""
        return cls(*_float_enclosure(Fraction(value)))

    @classmethod
    def from_decimal_strings(cls, lo: str, hi: str) -> "Interval":
        """Parse decimal endpoints, widening outward whenever the decimal is not a float."""
        lo_lo, _ = _float_enclosure(Fraction(lo))
        _, hi_hi = _float_enclosure(Fraction(hi))
        return cls(lo_lo, hi_hi)

    @property
    def width(self) -> float:
        """Upper bound of hi - lo."""
        return _add_round(self.hi, -self.lo, upward=True)

    @property
    def mid(self) -> float:
        """A float between the endpoints, not a rigorous quantity."""
        if math.isinf(self.lo) and math.isinf(self.hi):
            return 0.0
        if math.isinf(self.lo):
            return self.hi
        if math.isinf(self.hi):
            return self.lo
        middle = self.lo / 2 + self.hi / 2
        return min(max(middle, self.lo), self.hi)

    @property
    def rad(self) -> float:
        """Upper bound of the distance from mid to both endpoints."""
        middle = self.mid
        return max(_add_round(self.hi, -middle, upward=True), _add_round(middle, -self.lo, upward=True))

    def contains(self, value: Number) -> bool:
        """Exact membership test."""
        if isinstance(value, Fraction):
            above_lo = math.isinf(self.lo) or Fraction(self.lo) <= value
            below_hi = math.isinf(self.hi) or value <= Fraction(self.hi)
            return above_lo and below_hi
        return self.lo <= value <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        """Whether other is a subset of self."""
        return self.lo <= other.lo and other.hi <= self.hi

    def contains_zero(self) -> bool:
        """Whether 0 is in the interval."""
        return self.lo <= 0 <= self.hi

    def is_positive(self) -> bool:
        """Strictly positive everywhere."""
        return self.lo > 0

    def is_negative(self) -> bool:
        """Strictly negative everywhere."""
        return self.hi < 0

    def __add__(self, other: "Interval | Number") -> "Interval":
        return iv_add(self, as_interval(other))

    def __radd__(self, other: Number) -> "Interval":
        return iv_add(as_interval(other), self)

    def __sub__(self, other: "Interval | Number") -> "Interval":
        return iv_sub(self, as_interval(other))

    def __rsub__(self, other: Number) -> "Interval":
        return iv_sub(as_interval(other), self)

    def __mul__(self, other: "Interval | Number") -> "Interval":
        return iv_mul(self, as_interval(other))

    def __rmul__(self, other: Number) -> "Interval":
        return iv_mul(as_interval(other), self)

    def __truediv__(self, other: "Interval | Number") -> "Interval":
        return iv_div(self, as_interval(other))

    def __rtruediv__(self, other: Number) -> "Interval":
        return iv_div(as_interval(other), self)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __str__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def as_interval(value: "Interval | Number") -> Interval:
    """Wrap a number as an interval, rationals get their tightest enclosure."""
    if isinstance(value, Interval):
        return value
    if isinstance(value, float):
        return Interval.point(value)
    return Interval.from_fraction(value)


def iv_add(a: Interval, b: Interval) -> Interval:
    """[a] + [b], outward rounded."""
    return Interval(_add_round(a.lo, b.lo, upward=False), _add_round(a.hi, b.hi, upward=True))


def iv_sub(a: Interval, b: Interval) -> Interval:
    """[a] - [b], outward rounded."""
    return Interval(_add_round(a.lo, -b.hi, upward=False), _add_round(a.hi, -b.lo, upward=True))


def iv_mul(a: Interval, b: Interval) -> Interval:
    """[a] * [b], min and max of the four endpoint products, outward rounded."""
    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(
        min(_mul_round(x, y, upward=False) for x, y in pairs),
        max(_mul_round(x, y, upward=True) for x, y in pairs),
    )


def iv_div(a: Interval, b: Interval) -> Interval:
    """[a] / [b] for divisors that do not contain zero."""
    if b.contains_zero():
        raise DivisionByIntervalContainingZero(f"Can't divide {a} by {b}")

    pairs = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(
        min(_div_round(x, y, upward=False) for x, y in pairs),
        max(_div_round(x, y, upward=True) for x, y in pairs),
    )


def iv_sqr(a: Interval) -> Interval:
    """[a]^2, nonnegative even when a straddles zero."""
    return iv_pow(a, 2)


def iv_pow(a: Interval, exponent: int) -> Interval:
    """[a]^n for a nonnegative integer n, tight for the monotone pieces."""
    if exponent < 0:
        raise IntervalDomainError(f"Only nonnegative integer powers are supported, got {exponent}")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return a

    if exponent % 2 == 1:
        lower = _pow_round(a.lo, exponent, upward=False) if a.lo >= 0 else -_pow_round(-a.lo, exponent, upward=True)
        upper = _pow_round(a.hi, exponent, upward=True) if a.hi >= 0 else -_pow_round(-a.hi, exponent, upward=False)
        return Interval(lower, upper)

    if a.lo >= 0:
        return Interval(_pow_round(a.lo, exponent, upward=False), _pow_round(a.hi, exponent, upward=True))
    if a.hi <= 0:
        return Interval(_pow_round(-a.hi, exponent, upward=False), _pow_round(-a.lo, exponent, upward=True))
    return Interval(0.0, _pow_round(max(-a.lo, a.hi), exponent, upward=True))


def iv_sqrt(a: Interval) -> Interval:
    """Square root of the nonnegative part of [a]."""
    if a.hi < 0:
        raise IntervalDomainError(f"Square root of the negative interval {a}")

    def _rounded(value: float, upward: bool) -> float:
        if value <= 0:
            return 0.0
        if math.isinf(value):
            return value
        root = math.sqrt(value)
        square = Fraction(root) ** 2
        if upward:
            return _up(root) if square < Fraction(value) else root
        return _down(root) if square > Fraction(value) else root

    return Interval(_rounded(max(a.lo, 0.0), upward=False), _rounded(a.hi, upward=True))


def iv_hull(intervals: Iterable[Interval]) -> Interval:
    """Smallest interval containing all the given ones."""
    items = list(intervals)
    return Interval(min(item.lo for item in items), max(item.hi for item in items))


def iv_eval_poly(coeffs: Sequence[Interval], x: Interval) -> Interval:
    """Horner enclosure of sum(coeffs[i] * x**i)."""
    if not coeffs:
        raise IntervalDomainError("Can't evaluate a polynomial with no coefficients")

    result = coeffs[-1]
    for coeff in reversed(coeffs[:-1]):
        result = iv_add(iv_mul(result, x), coeff)
    return result


def poly_add(first: Sequence[Interval], second: Sequence[Interval]) -> list[Interval]:
    """Sum of two coefficient lists."""
    longest, shortest = (first, second) if len(first) >= len(second) else (second, first)
    return [iv_add(coeff, shortest[index]) if index < len(shortest) else coeff for index, coeff in enumerate(longest)]


def poly_sub(first: Sequence[Interval], second: Sequence[Interval]) -> list[Interval]:
    """Difference of two coefficient lists."""
    return poly_add(first, poly_scale(second, Interval.point(-1.0)))


def poly_scale(coeffs: Sequence[Interval], factor: Interval) -> list[Interval]:
    """Every coefficient times factor."""
    return [iv_mul(coeff, factor) for coeff in coeffs]


def poly_mul(first: Sequence[Interval], second: Sequence[Interval]) -> list[Interval]:
    """Product of two coefficient lists (Cauchy product)."""
    if not first or not second:
        return []

    result = [ZERO] * (len(first) + len(second) - 1)
    for i, left in enumerate(first):
        for j, right in enumerate(second):
            result[i + j] = iv_add(result[i + j], iv_mul(left, right))
    return result


def poly_deriv(coeffs: Sequence[Interval]) -> list[Interval]:
    """Coefficients of the derivative."""
    if len(coeffs) <= 1:
        return [ZERO]
    return [iv_mul(coeff, Interval.point(float(power))) for power, coeff in enumerate(coeffs) if power > 0]


def poly_taylor_shift(coeffs: Sequence[Interval], center: float) -> list[Interval]:
    """Coefficients of s -> p(center + s), by repeated synthetic division."""
    shifted = list(coeffs)
    point = Interval.point(center)
    degree = len(shifted) - 1
    for stage in range(degree):
        for index in range(degree - 1, stage - 1, -1):
            shifted[index] = iv_add(shifted[index], iv_mul(shifted[index + 1], point))
    return shifted


def iv_eval_poly_centered(coeffs: Sequence[Interval], x: Interval) -> Interval:
    """Centered-form enclosure of a polynomial over x.

    The polynomial is re-expanded at the midpoint c of x and bounded as a_0 + sum a_j [-h, h]^j, which keeps
    the enclosure width proportional to |p'(c)| * width(x) for narrow x.
    """
    if not coeffs:
        raise IntervalDomainError("Can't evaluate a polynomial with no coefficients")
    if not (math.isfinite(x.lo) and math.isfinite(x.hi)):
        return iv_eval_poly(coeffs, x)

    center = x.mid
    half_width = max(_add_round(x.hi, -center, upward=True), _add_round(center, -x.lo, upward=True))
    symmetric = Interval(-half_width, half_width)
    shifted = poly_taylor_shift(coeffs, center)
    result = shifted[0]
    for power, coeff in enumerate(shifted[1:], start=1):
        result = iv_add(result, iv_mul(coeff, iv_pow(symmetric, power)))
    # plain Horner can be tighter for wide boxes
    horner = iv_eval_poly(coeffs, x)
    return Interval(max(result.lo, horner.lo), min(result.hi, horner.hi))


@dataclass(frozen=True)
class Box:
    """Cartesian product of intervals."""

    dims: tuple[Interval, ...]

    @classmethod
    def of(cls, *dims: Interval) -> "Box":
        """Build a box from its intervals."""
        return cls(dims=tuple(dims))

    @property
    def width(self) -> float:
        """Largest width over the dimensions."""
        return max(dim.width for dim in self.dims)

    def contains_point(self, point: Sequence[float]) -> bool:
        """Whether every coordinate lies in the matching interval."""
        return all(dim.contains(value) for dim, value in zip(self.dims, point))

    def __str__(self) -> str:
        return " x ".join(str(dim) for dim in self.dims)


def box_split(box: Box) -> tuple[Box, Box]:
    """Halve the widest dimension, ties going to the lowest index."""
    widths = [dim.hi - dim.lo for dim in box.dims]
    widest = max(widths)
    index = widths.index(widest)
    dim = box.dims[index]
    middle = dim.mid
    if widest <= 0 or not dim.lo < middle < dim.hi:
        raise DegenerateBox(f"Can't split {box}, no representable midpoint left")

    first = box.dims[:index] + (Interval(dim.lo, middle),) + box.dims[index + 1 :]
    second = box.dims[:index] + (Interval(middle, dim.hi),) + box.dims[index + 1 :]
    return Box(dims=first), Box(dims=second)
