"""Taylor expansion of the smooth profile at the sonic point.

Coefficients follow the derivative convention, (W(xi), Z(xi)) = sum xi^n / n! (W_n, Z_n), so every composition
of a quadratic field component with the series is a Leibniz sum with binomial weights.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from implosion_libs.euler_selfsim import (
    FieldForms,
    GasParams,
    PhasePoint,
    QuadraticForm,
    SonicData,
    field_forms,
    sonic_data,
)
from implosion_libs.exceptions import ImplosionError

LOGGER = logging.getLogger(__name__)
RESONANCE_GUARD = 1e-8
NEAR_RESONANCE_WARNING = 1e-3
COEFFICIENT_LIMIT = 1e300
COMPENSATED_SUM_ORDER = 100
BRANCH_ANGLE_TOLERANCE = 1e-6
COMPONENTS = ("N_W", "D_W", "N_Z", "D_Z")


class TaylorError(ImplosionError):
    """Parent exception for the module."""


class OrderExceeded(TaylorError):
    """Raised when asking for a coefficient beyond the computed order."""


class BranchAmbiguity(TaylorError):
    """Raised when no root of the first order relation is aligned with nu_minus."""


class ResonanceSingular(TaylorError):
    """Raised when k(r) is too close to the order being computed."""

    def __init__(self, order: int, k: float):
        """Keep the offending order around for the callers."""
        self.order = order
        self.k = k
        super().__init__(f"Order {order} is resonant, k = {k!r} (|n - k| < {RESONANCE_GUARD})")


class CoefficientOverflow(TaylorError):
    """Raised when a coefficient leaves the representable range."""


@dataclass(frozen=True)
class ProfileSeries:
    """Taylor coefficients of the smooth solution at P_s, derivative convention."""

    order: int
    W_coeffs: tuple[float, ...]
    Z_coeffs: tuple[float, ...]
    k_at_r: float
    gas: GasParams
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def Ps(self) -> PhasePoint:
        """The expansion point."""
        return PhasePoint(W=self.W_coeffs[0], Z=self.Z_coeffs[0])

    def truncated(self, order: int) -> "ProfileSeries":
        """The same series cut at a lower order."""
        if order > self.order:
            raise OrderExceeded(f"Can't truncate a series of order {self.order} at order {order}")
        return ProfileSeries(
            order=order,
            W_coeffs=self.W_coeffs[: order + 1],
            Z_coeffs=self.Z_coeffs[: order + 1],
            k_at_r=self.k_at_r,
            gas=self.gas,
            warnings=self.warnings,
        )

    def normalized(self) -> tuple[list[float], list[float]]:
        """Power series coefficients W_n / n!, Z_n / n!."""
        return (
            [value / math.factorial(index) for index, value in enumerate(self.W_coeffs)],
            [value / math.factorial(index) for index, value in enumerate(self.Z_coeffs)],
        )


@dataclass(frozen=True)
class SweepRow:
    """Coefficients of one r value of a sweep, NaN filled when the order can't be reached."""

    r: float
    k: float
    W_coeffs: tuple[float, ...]
    Z_coeffs: tuple[float, ...]
    flag: str = ""


def _leibniz(first: Sequence[float], second: Sequence[float], order: int, summer: Callable) -> float:
    return summer(math.comb(order, j) * first[j] * second[order - j] for j in range(order + 1))


def _compose(
    form: QuadraticForm[float], W: Sequence[float], Z: Sequence[float], order: int, summer: Callable = sum
) -> float:
    """order-th xi-derivative at 0 of form(W(xi), Z(xi))."""
    return summer(
        [
            form.c0 if order == 0 else 0.0,
            form.cW * W[order],
            form.cZ * Z[order],
            form.cWW * _leibniz(W, W, order, summer),
            form.cWZ * _leibniz(W, Z, order, summer),
            form.cZZ * _leibniz(Z, Z, order, summer),
        ]
    )


def compose_coeffs(series: ProfileSeries, which: str, n: int) -> float:
    """n-th coefficient of one of N_W, D_W, N_Z, D_Z composed with the series."""
    if which not in COMPONENTS:
        raise ValueError(f"Unknown field component {which}, expected one of {COMPONENTS}")
    if n > series.order:
        raise OrderExceeded(f"Coefficient {n} requested from a series of order {series.order}")

    form = getattr(field_forms(series.gas), which)
    return _compose(form, series.W_coeffs, series.Z_coeffs, n)


def _first_order(g: GasParams, sonic: SonicData) -> tuple[float, float]:
    forms = field_forms(g)
    W0, Z0 = sonic.Ps.W, sonic.Ps.Z
    d_w0 = forms.D_W(W0, Z0)
    W1 = forms.N_W(W0, Z0) / d_w0
    a, b = forms.D_Z.cW, forms.D_Z.cZ
    c, d = forms.N_Z.d_W(W0, Z0), forms.N_Z.d_Z(W0, Z0)
    # Z1 (a W1 + b Z1) = c W1 + d Z1
    roots = _quadratic_roots(b, a * W1 - d, -c * W1)
    nu_w, nu_z = sonic.nu_minus

    def _angle(Z1: float) -> float:
        cross = abs(W1 * nu_z - Z1 * nu_w)
        return math.asin(min(1.0, cross / math.hypot(W1, Z1)))

    best = min(roots, key=_angle)
    if _angle(best) > BRANCH_ANGLE_TOLERANCE:
        raise BranchAmbiguity(
            f"No first order direction aligned with nu_minus = {sonic.nu_minus} for {g}, candidates Z1 = {roots}"
        )
    return W1, best


def _quadratic_roots(quadratic: float, linear: float, constant: float) -> list[float]:
    discriminant = linear * linear - 4 * quadratic * constant
    if discriminant < 0:
        return []
    half_sum = -0.5 * (linear + math.copysign(math.sqrt(discriminant), linear))
    if half_sum == 0:
        return [0.0]
    return [half_sum / quadratic, constant / half_sum]


def first_order(g: GasParams) -> tuple[float, float]:
    """(W_1, Z_1): W_1 = N_W(P_s) / D_W(P_s) and Z_1 the root making (W_1, Z_1) parallel to nu_minus."""
    return _first_order(g, sonic_data(g))


def _check_finite(order: int, W_n: float, Z_n: float) -> None:
    if not (abs(W_n) <= COEFFICIENT_LIMIT and abs(Z_n) <= COEFFICIENT_LIMIT):
        raise CoefficientOverflow(f"Coefficient of order {order} overflowed: W = {W_n!r}, Z = {Z_n!r}")


def _recurrence(
    forms: FieldForms[float], W: list[float], Z: list[float], n: int, k: float, summer: Callable
) -> tuple[float, float]:
    d_w = [_compose(forms.D_W, W, Z, order, summer) for order in range(n)]
    n_w = _compose(forms.N_W, W, Z, n - 1, summer)
    W_n = (n_w - summer(math.comb(n - 1, j) * d_w[n - 1 - j] * W[j + 1] for j in range(n - 1))) / d_w[0]

    # Z_n enters N_Z,n and D_Z,n linearly, evaluate both with Z_n = 0 and move the Z_n terms to the left
    W_ext, Z_ext = W + [W_n], Z + [0.0]
    n_z_rest = _compose(forms.N_Z, W_ext, Z_ext, n, summer)
    d_z_rest = _compose(forms.D_Z, W_ext, Z_ext, n, summer)
    d_z = [_compose(forms.D_Z, W_ext, Z_ext, order, summer) for order in range(n)]
    W0, Z0 = W[0], Z[0]
    b = forms.D_Z.cZ
    d = forms.N_Z.d_Z(W0, Z0)
    if abs(n - k) < RESONANCE_GUARD:
        raise ResonanceSingular(order=n, k=k)

    right = n_z_rest - Z[1] * d_z_rest - summer(math.comb(n, j) * Z[j + 1] * d_z[n - j] for j in range(1, n - 1))
    Z_n = right / (n * d_z[1] + b * Z[1] - d)
    return W_n, Z_n


def recurrence_step(series: ProfileSeries, n: int, g: GasParams) -> tuple[float, float]:
    """(W_n, Z_n) from the coefficients of order below n."""
    if n < 2:
        raise ValueError(f"The recurrence starts at order 2, got {n}")
    if series.order < n - 1:
        raise OrderExceeded(f"Order {n} needs the coefficients up to {n - 1}, the series stops at {series.order}")

    summer = math.fsum if n > COMPENSATED_SUM_ORDER else sum
    return _recurrence(
        field_forms(g), list(series.W_coeffs[:n]), list(series.Z_coeffs[:n]), n, series.k_at_r, summer
    )


def taylor_at_Ps(g: GasParams, N: int, allow_resonant: bool = False) -> ProfileSeries:
    """Series of the smooth profile at P_s up to order N.

    With allow_resonant, a resonant order stops the expansion instead of raising: the series is returned cut at
    the previous order with a warning.
    """
    if N < 1:
        raise ValueError(f"The series order must be at least 1, got {N}")

    sonic = sonic_data(g)
    W1, Z1 = _first_order(g, sonic)
    W = [sonic.Ps.W, W1]
    Z = [sonic.Ps.Z, Z1]
    warnings: list[str] = []
    forms = field_forms(g)
    summer = math.fsum if N > COMPENSATED_SUM_ORDER else sum
    for n in range(2, N + 1):
        if abs(n - sonic.k) < NEAR_RESONANCE_WARNING:
            message = f"order {n} is close to resonance, |n - k| = {abs(n - sonic.k):.3e}"
            LOGGER.warning("%s (r = %r)", message, g.r)
            warnings.append(message)
        try:
            W_n, Z_n = _recurrence(forms, W, Z, n, sonic.k, summer)
        except ResonanceSingular as error:
            if not allow_resonant:
                raise
            warnings.append(str(error))
            LOGGER.warning("Stopping the expansion at order %d: %s", n - 1, error)
            break
        _check_finite(n, W_n, Z_n)
        W.append(W_n)
        Z.append(Z_n)

    LOGGER.debug("Computed %d Taylor coefficients at r = %r (k = %r)", len(W), g.r, sonic.k)
    return ProfileSeries(
        order=len(W) - 1,
        W_coeffs=tuple(W),
        Z_coeffs=tuple(Z),
        k_at_r=sonic.k,
        gas=g,
        warnings=tuple(warnings),
    )


def evaluate_series(series: ProfileSeries, xi: float, order: int | None = None, derivative: int = 0) -> PhasePoint:
    """Value (or derivative) at xi of the series truncated at order."""
    last = series.order if order is None else order
    W_value, Z_value = 0.0, 0.0
    weight = 1.0
    for power in range(last + 1 - derivative):
        W_value += series.W_coeffs[power + derivative] * weight
        Z_value += series.Z_coeffs[power + derivative] * weight
        weight *= xi / (power + 1)
    return PhasePoint(W=W_value, Z=Z_value)


def series_residual(series: ProfileSeries, g: GasParams, xi: float) -> float:
    """Largest residual of W' D_W = N_W and Z' D_Z = N_Z for the truncated series at xi."""
    forms = field_forms(g)
    point = evaluate_series(series, xi)
    slope = evaluate_series(series, xi, derivative=1)
    return max(
        abs(slope.W * forms.D_W(point.W, point.Z) - forms.N_W(point.W, point.Z)),
        abs(slope.Z * forms.D_Z(point.W, point.Z) - forms.N_Z(point.W, point.Z)),
    )


def coefficient_sweep(gamma: Fraction | str | float, r_values: Iterable[float], order: int) -> list[SweepRow]:
    """Coefficients up to order for each r, resonant or overflowing r values give NaN rows."""
    rows = []
    for r in r_values:
        g = GasParams.build(gamma, r)
        try:
            series = taylor_at_Ps(g, order)
        except (ResonanceSingular, CoefficientOverflow) as error:
            LOGGER.debug("Sweep point r = %r skipped: %s", r, error)
            nans = tuple(math.nan for _ in range(order + 1))
            rows.append(SweepRow(r=r, k=sonic_data(g).k, W_coeffs=nans, Z_coeffs=nans, flag=type(error).__name__))
            continue

        rows.append(SweepRow(r=r, k=series.k_at_r, W_coeffs=series.W_coeffs, Z_coeffs=series.Z_coeffs))

    return rows


def series_rows(series: ProfileSeries) -> list[tuple[int, float, float]]:
    """(n, W_n, Z_n) rows for export."""
    return [(index, W_n, Z_n) for index, (W_n, Z_n) in enumerate(zip(series.W_coeffs, series.Z_coeffs))]


def sweep_rows(rows: Sequence[SweepRow]) -> tuple[list[str], list[list[float | str]]]:
    """Header and rows (r, k, W_0..W_N, Z_0..Z_N, flag) for export."""
    order = len(rows[0].W_coeffs) - 1 if rows else 0
    header = ["r", "k"] + [f"W_{n}" for n in range(order + 1)] + [f"Z_{n}" for n in range(order + 1)] + ["flag"]
    return header, [[row.r, row.k, *row.W_coeffs, *row.Z_coeffs, row.flag] for row in rows]
