"""Barrier curves around the sonic point and the sign of the flow across them.

A parametric barrier is stored homogeneously: t -> (W_poly(t), Z_poly(t)) / d_poly(t), with exact rational
coefficients, so the crossing sign along it is (up to the positive factor d^6) a polynomial in t that can be
enclosed with interval arithmetic. Polynomial curves have d = 1.

The crossing sign is the wedge of the psi-field with the curve tangent, negative meaning the flow goes upwards
through the barrier.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from implosion_libs.common import ArgparsableEnum
from implosion_libs.euler_selfsim import (
    GasParams,
    PhasePoint,
    QuadraticForm,
    field_forms,
    field_forms_interval,
    field_psi,
    find_Po,
    po_data,
    sonic_data,
)
from implosion_libs.exceptions import ImplosionError
from implosion_libs.interval_core import (
    Interval,
    iv_eval_poly,
    iv_eval_poly_centered,
    poly_add,
    poly_deriv,
    poly_mul,
    poly_scale,
    poly_sub,
)
from implosion_libs.taylor_engine import ProfileSeries

LOGGER = logging.getLogger(__name__)
ROOT_TOLERANCE = 1e-12
TANGENT_GUARD = 1e-12
SCAN_POINTS = 2000
# relative width of the first cell of the scan grid graded towards its start
GRADED_SCAN_FLOOR = 1e-6

Polynomial = tuple[Fraction, ...]


class BarrierError(ImplosionError):
    """Parent exception for the module."""


class DegenerateEndpoint(BarrierError):
    """Raised when the order matching at P_o has no unique solution."""


class TangentDegenerate(BarrierError):
    """Raised when W_1 + Z_1 vanishes and the implicit barrier slope is undefined."""


class NoCrossing(BarrierError):
    """Raised when a function has no sign change on the searched domain."""


class NoBarrierIntersection(BarrierError):
    """Raised when two barriers don't meet inside the parameter domain."""


class BarrierSide(ArgparsableEnum):
    """Which side of P_s a barrier lives on."""

    LEFT = "left-of-Ps"
    RIGHT = "right-of-Ps"


@dataclass(frozen=True)
class ParamBarrier:
    """Rational curve t -> (W_poly(t), Z_poly(t)) / d_poly(t) for t in [t_min, t_max]."""

    W_poly: Polynomial
    Z_poly: Polynomial
    t_domain: tuple[float, float]
    side: BarrierSide
    label: str
    d_poly: Polynomial = (Fraction(1),)
    beta: float | None = None
    n: int | None = None

    def point(self, t: float) -> PhasePoint:
        """Curve point at t."""
        denominator = _eval_float(self.d_poly, t)
        return PhasePoint(W=_eval_float(self.W_poly, t) / denominator, Z=_eval_float(self.Z_poly, t) / denominator)

    def tangent(self, t: float) -> tuple[float, float]:
        """Curve derivative at t."""
        denominator = _eval_float(self.d_poly, t)
        d_prime = _eval_float(_deriv(self.d_poly), t)
        W, Z = _eval_float(self.W_poly, t), _eval_float(self.Z_poly, t)
        W_prime, Z_prime = _eval_float(_deriv(self.W_poly), t), _eval_float(_deriv(self.Z_poly), t)
        square = denominator * denominator
        return (W_prime * denominator - W * d_prime) / square, (Z_prime * denominator - Z * d_prime) / square

    @property
    def t_max(self) -> float:
        """Upper end of the parameter domain."""
        return self.t_domain[1]


@dataclass(frozen=True)
class ImplicitBarrier:
    """Nullset of B(W, Z) = (W - W_0 - Z/2 + Z_0/2)(W + Z - F0) - F1 (W + Z - W_0 - Z_0)."""

    F0: float
    F1: float
    Ps: PhasePoint
    far_anchor: PhasePoint
    tangent_slope: float
    label: str = "B_fr"

    def __call__(self, W: Any, Z: Any) -> Any:
        W0, Z0 = self.Ps.W, self.Ps.Z
        return (W - W0 - Z / 2 + Z0 / 2) * (W + Z - self.F0) - self.F1 * (W + Z - W0 - Z0)

    def parametrization(self, t_domain: tuple[float, float] | None = None) -> ParamBarrier:
        """Exact rational parametrisation of the nullset by the slope t of the chord from P_s.

        With (u, v) = lambda (1, t) measured from P_s, B = 0 gives lambda = -(S (1 - t/2) - F1 (1 + t)) / d(t)
        with d(t) = (1 - t/2)(1 + t) and S = W_0 + Z_0 - F0. The slope of the tangent at P_s maps to P_s itself.
        """
        W0, Z0 = Fraction(self.Ps.W), Fraction(self.Ps.Z)
        F0, F1 = Fraction(self.F0), Fraction(self.F1)
        S = W0 + Z0 - F0
        half = Fraction(1, 2)
        # (1 - t/2)(1 + t) = 1 + t/2 - t^2/2
        denominator = (Fraction(1), half, -half)
        # S (1 - t/2) - F1 (1 + t)
        chord = (S - F1, -S * half - F1)
        W_poly = _poly_sub_exact(tuple(W0 * coeff for coeff in denominator), chord)
        Z_poly = _poly_sub_exact(tuple(Z0 * coeff for coeff in denominator), (Fraction(0),) + chord)
        if t_domain is None:
            t_domain = (self.tangent_slope, _chord_slope(self.Ps, self.far_anchor))
        return ParamBarrier(
            W_poly=W_poly,
            Z_poly=Z_poly,
            d_poly=denominator,
            t_domain=(min(t_domain), max(t_domain)),
            side=BarrierSide.RIGHT,
            label=self.label,
        )


@dataclass(frozen=True)
class Intersection:
    """Where a barrier meets another one."""

    t: float
    point: PhasePoint
    other_t: float | None = None


def _eval_float(coeffs: Sequence[Fraction], t: float) -> float:
    result = 0.0
    for coeff in reversed(coeffs):
        result = result * t + float(coeff)
    return result


def _deriv(coeffs: Sequence[Fraction]) -> Polynomial:
    if len(coeffs) <= 1:
        return (Fraction(0),)
    return tuple(coeff * power for power, coeff in enumerate(coeffs) if power > 0)


def _poly_sub_exact(first: Sequence[Fraction], second: Sequence[Fraction]) -> Polynomial:
    size = max(len(first), len(second))
    padded_first = list(first) + [Fraction(0)] * (size - len(first))
    padded_second = list(second) + [Fraction(0)] * (size - len(second))
    return tuple(left - right for left, right in zip(padded_first, padded_second))


def _chord_slope(origin: PhasePoint, target: PhasePoint) -> float:
    return (target.Z - origin.Z) / (target.W - origin.W)


def _series_poly(coeffs: Sequence[float], order: int, sign: int) -> list[Fraction]:
    """Power coefficients of sum_{i <= order} c_i (sign t)^i / i!."""
    return [Fraction(coeffs[index]) * sign**index / math.factorial(index) for index in range(order + 1)]


def make_b_nl(series: ProfileSeries, t_max: float = 1.0) -> ParamBarrier:
    """Cubic truncation of the series, continued on the left of P_s (positive xi)."""
    if series.order < 3:
        raise ValueError(f"b_nl needs a series of order at least 3, got {series.order}")

    return ParamBarrier(
        W_poly=tuple(_series_poly(series.W_coeffs, 3, 1)),
        Z_poly=tuple(_series_poly(series.Z_coeffs, 3, 1)),
        t_domain=(0.0, t_max),
        side=BarrierSide.LEFT,
        label="b_nl",
    )


def b_nr_t_max(k: float, n: int, beta: float, c: float = 1.0) -> float:
    """c beta |k - n|^(1 / (n - 1))."""
    return c * beta * abs(k - n) ** (1 / (n - 1))


def make_b_nr(series: ProfileSeries, n: int, beta: float, c: float = 1.0) -> ParamBarrier:
    """Series truncated at order n in -t, with (-1)^n beta |Z_n| (-t)^(n+1) / (n+1)! added to Z."""
    if n not in (3, 4):
        raise ValueError(f"b_nr is only defined for n = 3 and n = 4, got {n}")
    if series.order < n:
        raise ValueError(f"b_nr_{n} needs a series of order at least {n}, got {series.order}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")

    Z_poly = _series_poly(series.Z_coeffs, n, -1)
    # (-1)^n (-1)^(n+1) = -1
    Z_poly.append(-Fraction(beta) * abs(Fraction(series.Z_coeffs[n])) / math.factorial(n + 1))
    return ParamBarrier(
        W_poly=tuple(_series_poly(series.W_coeffs, n, -1)),
        Z_poly=tuple(Z_poly),
        t_domain=(0.0, b_nr_t_max(series.k_at_r, n, beta, c)),
        side=BarrierSide.RIGHT,
        label=f"b_nr_{n}",
        beta=beta,
        n=n,
    )


def fl_coefficients(g: GasParams, series: ProfileSeries) -> tuple[float, float, float]:
    """(B_1, B_2, B_3) with b_fl(1) = P_o and b_fl'(1) along the dominant eigendirection at P_o."""
    W0, Z0 = series.W_coeffs[0], series.Z_coeffs[0]
    W1, Z1 = series.W_coeffs[1], series.Z_coeffs[1]
    Po = find_Po(g)
    delta_W, delta_Z = Po.W - W0, Po.Z - Z0
    v_W, v_Z = po_data(g).dominant_direction
    # b'(1) = (B_1 W_1 + B_2, B_1 Z_1 + B_3) with B_2 / 2 = dW - B_1 W_1 and B_3 / 2 = dZ - B_1 Z_1
    denominator = Z1 * v_W - W1 * v_Z
    if abs(denominator) < TANGENT_GUARD * math.hypot(W1, Z1):
        raise DegenerateEndpoint(
            f"(W_1, Z_1) = ({W1}, {Z1}) is parallel to the eigendirection {(v_W, v_Z)} at P_o, B_1 is undefined"
        )

    B1 = 2 * (delta_Z * v_W - delta_W * v_Z) / denominator
    return B1, 2 * (delta_W - B1 * W1), 2 * (delta_Z - B1 * Z1)


def make_b_fl(g: GasParams, series: ProfileSeries) -> ParamBarrier:
    """Quadratic from P_s (t = 0) to P_o (t = 1) on the left of P_s."""
    B1, B2, B3 = fl_coefficients(g, series)
    W0, Z0 = Fraction(series.W_coeffs[0]), Fraction(series.Z_coeffs[0])
    W1, Z1 = Fraction(series.W_coeffs[1]), Fraction(series.Z_coeffs[1])
    LOGGER.debug("b_fl coefficients for %s: B_1 = %r, B_2 = %r, B_3 = %r", g, B1, B2, B3)
    return ParamBarrier(
        W_poly=(W0, Fraction(B1) * W1, Fraction(B2) / 2),
        Z_poly=(Z0, Fraction(B1) * Z1, Fraction(B3) / 2),
        t_domain=(0.0, 1.0),
        side=BarrierSide.LEFT,
        label="b_fl",
    )


def make_B_fr(g: GasParams, series: ProfileSeries) -> ImplicitBarrier:
    """Conic through P_s tangent to the smooth profile, bending towards W + Z = F0 = -2 (r - 1).

    The far anchor is the second point of the nullset on the line joining P_s with the origin.
    """
    W0, Z0 = series.W_coeffs[0], series.Z_coeffs[0]
    W1, Z1 = series.W_coeffs[1], series.Z_coeffs[1]
    if abs(W1 + Z1) < TANGENT_GUARD:
        raise TangentDegenerate(f"W_1 + Z_1 = {W1 + Z1!r} for {g}, the slope F1 is undefined")

    F0 = -2 * (g.r - 1)
    S = W0 + Z0 - F0
    F1 = S * (W1 - Z1 / 2) / (W1 + Z1)
    # (u, v) = lam (p, q) from P_s, B = lam^2 (p - q/2)(p + q) + lam (S (p - q/2) - F1 (p + q))
    p, q = -W0, -Z0
    lam = -(S * (p - q / 2) - F1 * (p + q)) / ((p - q / 2) * (p + q))
    far_anchor = PhasePoint(W=W0 + lam * p, Z=Z0 + lam * q)
    barrier = ImplicitBarrier(
        F0=F0, F1=F1, Ps=PhasePoint(W=W0, Z=Z0), far_anchor=far_anchor, tangent_slope=Z1 / W1
    )
    LOGGER.debug("B_fr for %s: F0 = %r, F1 = %r, far anchor %s", g, F0, F1, far_anchor)
    return barrier


def crossing_sign_param(b: ParamBarrier, g: GasParams, t: float | Interval) -> float | Interval:
    """psi-field at b(t) wedged with b'(t), negative when the flow crosses upwards."""
    if isinstance(t, Interval):
        numerator = iv_eval_poly_centered(crossing_polynomial(b, g), t)
        if len(b.d_poly) == 1 and b.d_poly[0] == 1:
            return numerator
        denominator = iv_eval_poly_centered([Interval.from_fraction(coeff) for coeff in b.d_poly], t)
        return numerator / (denominator * denominator * denominator * denominator * denominator * denominator)

    field_W, field_Z = field_psi(b.point(t), g)
    tangent_W, tangent_Z = b.tangent(t)
    return field_W * tangent_Z - field_Z * tangent_W


def _homogenized(
    form: QuadraticForm[Interval], W: list[Interval], Z: list[Interval], d: list[Interval], degree: int
) -> list[Interval]:
    """d^degree form(W / d, Z / d) for degree 1 (affine forms) or 2."""
    linear = poly_add(poly_scale(W, form.cW), poly_scale(Z, form.cZ))
    if degree == 1:
        return poly_add(poly_scale(d, form.c0), linear)

    quadratic = poly_add(
        poly_add(poly_scale(poly_mul(W, W), form.cWW), poly_scale(poly_mul(W, Z), form.cWZ)),
        poly_scale(poly_mul(Z, Z), form.cZZ),
    )
    return poly_add(poly_add(poly_scale(poly_mul(d, d), form.c0), poly_mul(linear, d)), quadratic)


def crossing_polynomial(b: ParamBarrier, g: GasParams) -> list[Interval]:
    """Interval coefficients (power basis in t) of d(t)^6 times the crossing sign, which has its sign."""
    forms = field_forms_interval(g)
    W = [Interval.from_fraction(coeff) for coeff in b.W_poly]
    Z = [Interval.from_fraction(coeff) for coeff in b.Z_poly]
    d = [Interval.from_fraction(coeff) for coeff in b.d_poly]
    field_W = poly_mul(_homogenized(forms.N_W, W, Z, d, 2), _homogenized(forms.D_Z, W, Z, d, 1))
    field_Z = poly_mul(_homogenized(forms.N_Z, W, Z, d, 2), _homogenized(forms.D_W, W, Z, d, 1))
    d_prime = poly_deriv(d)
    tangent_W = poly_sub(poly_mul(poly_deriv(W), d), poly_mul(W, d_prime))
    tangent_Z = poly_sub(poly_mul(poly_deriv(Z), d), poly_mul(Z, d_prime))
    wedge = poly_sub(poly_mul(field_W, tangent_Z), poly_mul(field_Z, tangent_W))
    return poly_mul(wedge, d)


def asymptotic_P_nr(n: int, beta: float, series: ProfileSeries, t: float) -> float:
    """Two-term principal part of the crossing sign along b_nr_n near r_n, as usually quoted.

    |N_W0 D_Z1| beta |Z_n| (-t)^(n+1) / (n+1)! + |d_Z D_Z N_W0| Z_n^2 (-t)^(2n-1) / (n! (n-1)!)
    """
    forms = field_forms(series.gas)
    W0, Z0 = series.W_coeffs[0], series.Z_coeffs[0]
    n_w0 = forms.N_W(W0, Z0)
    d_z1 = forms.D_Z.cW * series.W_coeffs[1] + forms.D_Z.cZ * series.Z_coeffs[1]
    Z_n = series.Z_coeffs[n]
    return abs(n_w0 * d_z1) * beta * abs(Z_n) * (-t) ** (n + 1) / math.factorial(n + 1) + abs(
        forms.D_Z.cZ * n_w0
    ) * Z_n * Z_n * (-t) ** (2 * n - 1) / (math.factorial(n) * math.factorial(n - 1))


def leading_coefficient_P_nr(n: int, beta: float, series: ProfileSeries, g: GasParams) -> float:
    """Exact t^(n+1) coefficient of the crossing sign along b_nr_n, the lower ones vanish.

    With p_1 = -(W_1, Z_1) the initial tangent and delta the (n+1)-th t-derivative of b_nr_n minus that of the
    smooth solution, the coefficient is lambda_- (p_1 ^ delta) / n! + (J delta) ^ p_1 / (n+1)!.
    """
    if series.order < n + 1:
        raise ValueError(f"The leading coefficient along b_nr_{n} needs order {n + 1}, the series has {series.order}")

    sonic = sonic_data(g)
    sign = (-1) ** (n + 1)
    delta = np.array(
        [-sign * series.W_coeffs[n + 1], -beta * abs(series.Z_coeffs[n]) - sign * series.Z_coeffs[n + 1]]
    )
    p1 = -np.array([series.W_coeffs[1], series.Z_coeffs[1]])
    pushed = sonic.jacobian @ delta

    def _wedge(first: np.ndarray, second: np.ndarray) -> float:
        return float(first[0] * second[1] - first[1] * second[0])

    return sonic.lambda_minus * _wedge(p1, delta) / math.factorial(n) + _wedge(pushed, p1) / math.factorial(n + 1)


def _scan_grid(start: float, end: float, points: int) -> np.ndarray:
    """Uniform grid on (start, end] merged with a geometric one crowding towards start."""
    uniform = np.linspace(start, end, points + 1)[1:]
    graded = start + (end - start) * np.geomspace(GRADED_SCAN_FLOOR, 1.0, max(points // 2, 2))
    return np.unique(np.concatenate([graded, uniform]))


def _paired_roots(function: Callable[[float], float], left: float, right: float, value: float) -> list[float]:
    """Two roots between left and right when function dips through zero without changing sign at the samples."""
    sign = math.copysign(1.0, value)
    dip = minimize_scalar(
        lambda t: sign * function(t), bounds=(left, right), method="bounded", options={"xatol": ROOT_TOLERANCE}
    )
    if dip.fun >= 0:
        return []
    return [
        brentq(function, left, dip.x, xtol=ROOT_TOLERANCE),
        brentq(function, dip.x, right, xtol=ROOT_TOLERANCE),
    ]


def _find_roots(
    function: Callable[[float], float], start: float, end: float, points: int = SCAN_POINTS
) -> list[float]:
    """Sorted roots of function in (start, end].

    Sign changes on the scan grid are refined with brentq. A sample closer to zero than both its neighbours with the
    same sign is searched for a pair of roots hidden inside one cell.
    """
    grid = _scan_grid(start, end, points)
    values = [function(t) for t in grid]
    roots = []
    for index in range(len(grid) - 1):
        if values[index] == 0:
            roots.append(float(grid[index]))
        elif values[index] * values[index + 1] < 0:
            roots.append(brentq(function, grid[index], grid[index + 1], xtol=ROOT_TOLERANCE))
        elif index and values[index - 1] * values[index] > 0 and values[index] * values[index + 1] > 0:
            if abs(values[index]) < min(abs(values[index - 1]), abs(values[index + 1])):
                roots.extend(_paired_roots(function, grid[index - 1], grid[index + 1], values[index]))
    if values[-1] == 0:
        roots.append(float(grid[-1]))
    return sorted(roots)


def _dz_along(barrier: ParamBarrier, g: GasParams, t: float) -> float:
    point = barrier.point(t)
    return field_forms(g).D_Z(point.W, point.Z)


def dz_along_bnr4(series: ProfileSeries, g: GasParams, t: float, beta: float = 500.0) -> tuple[float, float]:
    """(D_Z(b_nr_4(t)), its two-term leading part -D_Z1 t + d_Z D_Z Z_4 t^4 / 24)."""
    forms = field_forms(g)
    d_z1 = forms.D_Z.cW * series.W_coeffs[1] + forms.D_Z.cZ * series.Z_coeffs[1]
    leading = -d_z1 * t + forms.D_Z.cZ * series.Z_coeffs[4] * t**4 / 24
    return _dz_along(make_b_nr(series, 4, beta), g, t), leading


def dz_crossing_bnr4(series: ProfileSeries, g: GasParams, beta: float, c: float = 1.0) -> float:
    """Smallest positive t where b_nr_4 meets the sonic line D_Z = 0."""
    barrier = make_b_nr(series, 4, beta, c)
    t_max = barrier.t_max
    roots = _find_roots(lambda t: _dz_along(barrier, g, t), 0.0, t_max)
    if not roots:
        raise NoCrossing(f"D_Z along b_nr_4 keeps its sign on (0, {t_max}], beta = {beta} is too small")
    return roots[0]


def _signed_distance(curve: ParamBarrier, point: PhasePoint) -> tuple[float, float]:
    """(signed distance, closest parameter) from point to the curve, the sign is the side of the tangent."""
    start, end = curve.t_domain

    def _squared(s: float) -> float:
        other = curve.point(s)
        return (other.W - point.W) ** 2 + (other.Z - point.Z) ** 2

    grid = np.linspace(start, end, 201)
    best = int(np.argmin([_squared(s) for s in grid]))
    bounds = (grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)])
    result = minimize_scalar(_squared, bounds=bounds, method="bounded", options={"xatol": 1e-14})
    closest = float(result.x)
    other = curve.point(closest)
    tangent_W, tangent_Z = curve.tangent(closest)
    side = tangent_W * (point.Z - other.Z) - tangent_Z * (point.W - other.W)
    return math.copysign(math.sqrt(result.fun), side), closest


def barrier_intersection(
    b1: ParamBarrier, b2: ParamBarrier | ImplicitBarrier, t_start: float | None = None, t_end: float | None = None
) -> Intersection:
    """Smallest parameter of b1 past t_start where it lies on b2.

    Against an implicit barrier this is a root of B(b1(t)), against a parametric one a root of the signed distance.
    Curves starting on each other (both barriers leave P_s) are searched strictly after t_start.
    """
    start = b1.t_domain[0] if t_start is None else t_start
    end = b1.t_domain[1] if t_end is None else t_end
    if isinstance(b2, ImplicitBarrier):

        def _implicit(t: float) -> float:
            point = b1.point(t)
            return b2(point.W, point.Z)

        roots = _find_roots(_implicit, start, end)
        if not roots:
            raise NoBarrierIntersection(f"{b1.label} doesn't meet {b2.label} for t in ({start}, {end}]")
        return Intersection(t=roots[0], point=b1.point(roots[0]))

    if b1.W_poly == b2.W_poly and b1.Z_poly == b2.Z_poly and b1.d_poly == b2.d_poly:
        return Intersection(t=start, point=b1.point(start), other_t=start)

    roots = _find_roots(lambda t: _signed_distance(b2, b1.point(t))[0], start, end, points=400)
    for root in roots:
        distance, other_t = _signed_distance(b2, b1.point(root))
        if abs(distance) < 1e-8:
            return Intersection(t=root, point=b1.point(root), other_t=other_t)

    raise NoBarrierIntersection(f"{b1.label} doesn't meet {b2.label} for t in ({start}, {end}]")


def validity_time(b: ParamBarrier, g: GasParams, t_end: float | None = None) -> float:
    """First t > 0 where the crossing sign along b changes sign, t_end if it doesn't."""
    start, end = b.t_domain[0], b.t_max if t_end is None else t_end
    roots = _find_roots(lambda t: crossing_sign_param(b, g, t), start, end)
    # a root at the very start is the fixed point P_s
    roots = [root for root in roots if root > start + ROOT_TOLERANCE * max(1.0, abs(end - start))]
    return roots[0] if roots else end


def barrier_to_dict(b: ParamBarrier | ImplicitBarrier, g: GasParams) -> dict[str, Any]:
    """JSON-friendly descriptor, coefficients as exact 'p/q' strings and as floats."""
    descriptor: dict[str, Any] = {"label": b.label, "gamma": str(g.gamma), "r": g.r}
    if isinstance(b, ImplicitBarrier):
        descriptor.update(
            {
                "kind": "implicit",
                "F0": b.F0,
                "F1": b.F1,
                "Ps": [b.Ps.W, b.Ps.Z],
                "far_anchor": [b.far_anchor.W, b.far_anchor.Z],
            }
        )
        return descriptor

    descriptor.update(
        {
            "kind": "parametric",
            "side": str(b.side),
            "t_domain": list(b.t_domain),
            "beta": b.beta,
            "n": b.n,
        }
    )
    for name in ("W_poly", "Z_poly", "d_poly"):
        coeffs = getattr(b, name)
        descriptor[name] = [str(coeff) for coeff in coeffs]
        descriptor[f"{name}_float"] = [float(coeff) for coeff in coeffs]
    return descriptor


def sample_barrier(b: ParamBarrier, count: int = 200) -> list[tuple[float, float, float]]:
    """(t, W, Z) rows along the barrier domain."""
    rows = []
    for t in np.linspace(b.t_domain[0], b.t_domain[1], count):
        point = b.point(float(t))
        rows.append((float(t), point.W, point.Z))
    return rows


def enclose_point(b: ParamBarrier, t: Interval) -> tuple[Interval, Interval]:
    """Interval enclosure of the curve over a parameter interval."""
    d = iv_eval_poly([Interval.from_fraction(coeff) for coeff in b.d_poly], t)
    W = iv_eval_poly([Interval.from_fraction(coeff) for coeff in b.W_poly], t)
    Z = iv_eval_poly([Interval.from_fraction(coeff) for coeff in b.Z_poly], t)
    if d.lo == d.hi == 1.0:
        return W, Z
    return W / d, Z / d
