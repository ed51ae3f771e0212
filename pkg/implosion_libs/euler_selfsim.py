"""Self-similar radial Euler system in Riemann-invariant variables.

The smooth self-similar profiles (W, Z)(xi) solve

    dW/dxi = N_W / D_W,    dZ/dxi = N_Z / D_Z

with quadratic numerators and affine denominators depending on alpha = (gamma - 1) / 2 and the
self-similar exponent r. Multiplying through by D_W * D_Z gives the polynomial psi-field used for
integration and for barrier certification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import replace as replace_in_dataclass
from fractions import Fraction
from typing import Any, Generic, Iterable, Sequence, TypeVar

import numpy as np
from scipy.optimize import brentq

from implosion_libs.exceptions import ImplosionError
from implosion_libs.interval_core import Interval

LOGGER = logging.getLogger(__name__)
GAMMA_MONOATOMIC = Fraction(5, 3)
# distance kept from the ends of (1, r*) when bisecting k(r)
R_BRACKET_MARGIN = 1e-9

Coefficient = TypeVar("Coefficient", float, Interval)


class SelfSimilarError(ImplosionError):
    """Parent exception for the module."""


class DomainError(SelfSimilarError):
    """Raised when r is outside the range where the sonic point analysis holds."""


class NoSonicPoint(SelfSimilarError):
    """Raised when D_Z = 0 and N_Z = 0 don't meet in the W > Z half-plane."""


class NoIntersection(SelfSimilarError):
    """Raised when the nullclines N_W = 0 and N_Z = 0 don't meet in the W > Z half-plane."""


class ComplexEigenvalues(SelfSimilarError):
    """Raised when the psi-flow Jacobian at P_s has complex eigenvalues."""


class NotBracketed(SelfSimilarError):
    """Raised when the requested k value is not reached for r in (1, r*)."""


class OutOfProfileRange(SelfSimilarError):
    """Raised when a physical point needs a xi value outside the sampled profile."""


class NonPhysicalProfile(SelfSimilarError):
    """Raised when the profile leaves the positive density region W - Z > 0."""


@dataclass(frozen=True)
class GasParams:
    """Adiabatic exponent (kept as an exact rational) and self-similar exponent."""

    gamma: Fraction
    r: float

    def __post_init__(self):
        """Validate gamma."""
        if self.gamma <= 1:
            raise DomainError(f"gamma must be > 1, got {self.gamma}")
        if self.gamma >= 3:
            raise DomainError(f"gamma must be < 3 for the sonic line D_Z = 0 to be a graph over Z, got {self.gamma}")

    @classmethod
    def build(cls, gamma: Fraction | str | float, r: float) -> "GasParams":
        """Build from loosely typed values, gamma strings like '5/3' are parsed exactly."""
        return cls(gamma=Fraction(gamma), r=float(r))

    @property
    def alpha_fraction(self) -> Fraction:
        """(gamma - 1) / 2, exact."""
        return (self.gamma - 1) / 2

    @property
    def alpha(self) -> float:
        """(gamma - 1) / 2 as the nearest float."""
        return float(self.alpha_fraction)

    def with_r(self, r: float) -> "GasParams":
        """Same gas, different exponent."""
        return replace_in_dataclass(self, r=float(r))


@dataclass(frozen=True)
class PhasePoint:
    """A point of the (W, Z) plane."""

    W: float
    Z: float

    def as_array(self) -> np.ndarray:
        """Numpy view, for linear algebra."""
        return np.array([self.W, self.Z])

    @property
    def norm(self) -> float:
        """Distance to the origin."""
        return math.hypot(self.W, self.Z)


@dataclass(frozen=True)
class FieldEval:
    """Values of the four components of the xi-field at a point."""

    N_W: float
    D_W: float
    N_Z: float
    D_Z: float


@dataclass(frozen=True)
class QuadraticForm(Generic[Coefficient]):
    """c0 + cW W + cZ Z + cWW W^2 + cWZ W Z + cZZ Z^2.

    The coefficients can be floats or intervals, evaluation only uses + and *.
    """

    c0: Coefficient
    cW: Coefficient
    cZ: Coefficient
    cWW: Coefficient
    cWZ: Coefficient
    cZZ: Coefficient

    def __call__(self, W: Any, Z: Any) -> Any:
        return self.c0 + (self.cW + self.cWW * W + self.cWZ * Z) * W + (self.cZ + self.cZZ * Z) * Z

    def d_W(self, W: Any, Z: Any) -> Any:
        """Partial derivative in W."""
        return self.cW + 2 * self.cWW * W + self.cWZ * Z

    def d_Z(self, W: Any, Z: Any) -> Any:
        """Partial derivative in Z."""
        return self.cZ + self.cWZ * W + 2 * self.cZZ * Z

    def roots_in_W(self, Z: float) -> list[float]:
        """Real W solving form(W, Z) = 0 for a fixed Z (float coefficients only)."""
        quadratic = float(self.cWW)
        linear = float(self.cW) + float(self.cWZ) * Z
        constant = float(self.c0) + float(self.cZ) * Z + float(self.cZZ) * Z * Z
        if quadratic == 0:
            return [] if linear == 0 else [-constant / linear]
        return _real_quadratic_roots(quadratic, linear, constant)


@dataclass(frozen=True)
class FieldForms(Generic[Coefficient]):
    """The four quadratic forms of the xi-system."""

    N_W: QuadraticForm[Coefficient]
    D_W: QuadraticForm[Coefficient]
    N_Z: QuadraticForm[Coefficient]
    D_Z: QuadraticForm[Coefficient]


@dataclass(frozen=True)
class SonicData:
    """Linearisation of the psi-flow at the sonic point.

    lambda_minus < lambda_plus are the two (positive) psi-rates, nu_minus is the slow direction the smooth
    profile leaves along and k = lambda_plus / lambda_minus.
    """

    Ps: PhasePoint
    jacobian: np.ndarray
    lambda_minus: float
    lambda_plus: float
    nu_minus: tuple[float, float]
    nu_plus: tuple[float, float]
    k: float


@dataclass(frozen=True)
class PoData:
    """Linearisation of the psi-flow at P_o, a saddle."""

    Po: PhasePoint
    jacobian: np.ndarray
    eigenvalues: tuple[float, float]
    eigenvectors: tuple[tuple[float, float], tuple[float, float]]

    @property
    def dominant_direction(self) -> tuple[float, float]:
        """Eigenvector of the eigenvalue with the largest modulus."""
        index = 0 if abs(self.eigenvalues[0]) >= abs(self.eigenvalues[1]) else 1
        return self.eigenvectors[index]


@dataclass(frozen=True)
class ProfileSamples:
    """A profile sampled on an increasing xi grid."""

    xi: np.ndarray
    W: np.ndarray
    Z: np.ndarray


@dataclass(frozen=True)
class PhysicalSample:
    """Physical fields at one radius and time."""

    R: float
    u: float
    sigma: float
    rho: float


def _real_quadratic_roots(quadratic: float, linear: float, constant: float) -> list[float]:
    discriminant = linear * linear - 4 * quadratic * constant
    if discriminant < 0:
        return []
    # cancellation free form
    half_sum = -0.5 * (linear + math.copysign(math.sqrt(discriminant), linear))
    if half_sum == 0:
        return [0.0, 0.0]
    return sorted([half_sum / quadratic, constant / half_sum])


def _forms(alpha: Any, r: Any, one: Any, zero: Any) -> FieldForms:
    half = one / 2
    plus = half * (one + 2 * alpha)
    mixed = half * (one - alpha)
    square = alpha / 2
    return FieldForms(
        N_W=QuadraticForm(c0=zero, cW=-r, cZ=zero, cWW=-plus, cWZ=-mixed, cZZ=square),
        D_W=QuadraticForm(c0=one, cW=half * (one + alpha), cZ=mixed, cWW=zero, cWZ=zero, cZZ=zero),
        N_Z=QuadraticForm(c0=zero, cW=zero, cZ=-r, cWW=square, cWZ=-mixed, cZZ=-plus),
        D_Z=QuadraticForm(c0=one, cW=mixed, cZ=half * (one + alpha), cWW=zero, cWZ=zero, cZZ=zero),
    )


def field_forms(g: GasParams) -> FieldForms[float]:
    """Float coefficients of the four components."""
    return _forms(alpha=g.alpha, r=g.r, one=1.0, zero=0.0)


def field_forms_interval(g: GasParams) -> FieldForms[Interval]:
    """Interval coefficients of the four components, alpha enclosed from its exact value."""
    alpha = Interval.from_fraction(g.alpha_fraction)
    return _forms(alpha=alpha, r=Interval.point(g.r), one=Interval.point(1.0), zero=Interval.point(0.0))


def field_xi(p: PhasePoint, g: GasParams) -> FieldEval:
    """Values of N_W, D_W, N_Z, D_Z at p."""
    forms = field_forms(g)
    return FieldEval(
        N_W=forms.N_W(p.W, p.Z),
        D_W=forms.D_W(p.W, p.Z),
        N_Z=forms.N_Z(p.W, p.Z),
        D_Z=forms.D_Z(p.W, p.Z),
    )


def field_psi(p: PhasePoint, g: GasParams) -> tuple[float, float]:
    """The desingularised field (N_W * D_Z, N_Z * D_W)."""
    values = field_xi(p, g)
    return values.N_W * values.D_Z, values.N_Z * values.D_W


def jacobian_psi(p: PhasePoint, g: GasParams) -> np.ndarray:
    """Closed form Jacobian of field_psi at p."""
    forms = field_forms(g)
    W, Z = p.W, p.Z
    n_w, d_w, n_z, d_z = forms.N_W(W, Z), forms.D_W(W, Z), forms.N_Z(W, Z), forms.D_Z(W, Z)
    return np.array(
        [
            [
                forms.N_W.d_W(W, Z) * d_z + n_w * forms.D_Z.d_W(W, Z),
                forms.N_W.d_Z(W, Z) * d_z + n_w * forms.D_Z.d_Z(W, Z),
            ],
            [
                forms.N_Z.d_W(W, Z) * d_w + n_z * forms.D_W.d_W(W, Z),
                forms.N_Z.d_Z(W, Z) * d_w + n_z * forms.D_W.d_Z(W, Z),
            ],
        ]
    )


def jacobian_psi_fd(p: PhasePoint, g: GasParams, step: float = 1e-6) -> np.ndarray:
    """Central finite difference Jacobian of field_psi, a check on jacobian_psi."""
    columns = []
    for shift in ((step, 0.0), (0.0, step)):
        forward = field_psi(PhasePoint(p.W + shift[0], p.Z + shift[1]), g)
        backward = field_psi(PhasePoint(p.W - shift[0], p.Z - shift[1]), g)
        columns.append([(forward[0] - backward[0]) / (2 * step), (forward[1] - backward[1]) / (2 * step)])
    return np.array(columns).T


def _sonic_line(alpha: float) -> tuple[float, float]:
    """(w0, w1) with D_Z = 0 <=> W = w0 + w1 Z."""
    return -2 / (1 - alpha), -(1 + alpha) / (1 - alpha)


def _sonic_quadratic(g: GasParams) -> tuple[float, float, float]:
    """Coefficients (A, B, C) of N_Z restricted to D_Z = 0 as a polynomial in Z."""
    forms = field_forms(g)
    w0, w1 = _sonic_line(g.alpha)
    n_z = forms.N_Z
    quadratic = n_z.cZZ + n_z.cWZ * w1 + n_z.cWW * w1 * w1
    linear = n_z.cZ + n_z.cWZ * w0 + 2 * n_z.cWW * w0 * w1
    constant = n_z.cWW * w0 * w0
    return quadratic, linear, constant


def r_star(gamma: Fraction | str | float) -> float:
    """Upper end of the sonic window, where the two sonic points merge (3 - sqrt(3) for gamma = 5/3)."""
    quadratic, linear_at_zero, constant = _sonic_quadratic(GasParams.build(gamma, 0.0))
    return linear_at_zero - 2 * math.sqrt(quadratic * constant)


def find_Ps(g: GasParams) -> PhasePoint:
    """Sonic point: intersection of D_Z = 0 and N_Z = 0 continuously connected to (-1, -1) at r = 1."""
    quadratic, linear, constant = _sonic_quadratic(g)
    roots = _real_quadratic_roots(quadratic, linear, constant)
    if not roots:
        raise NoSonicPoint(f"No sonic point for {g}, r must be below r* = {r_star(g.gamma)}")

    w0, w1 = _sonic_line(g.alpha)
    Z = roots[-1]
    W = w0 + w1 * Z
    if W <= Z:
        raise NoSonicPoint(f"The sonic point ({W}, {Z}) for {g} is not in the W > Z half-plane")

    LOGGER.debug("Sonic point for %s: (%r, %r)", g, W, Z)
    return PhasePoint(W=W, Z=Z)


def find_Po(g: GasParams) -> PhasePoint:
    """Intersection of N_W = 0 and N_Z = 0 in the W > Z half-plane.

    On the ray Z = s W both nullclines reduce to s^3 + 3 s^2 - 3 s - 1 = 0 for every alpha, the root
    s = -2 - sqrt(3) gives the point with W > Z.
    """
    alpha = g.alpha
    slope = -2 - math.sqrt(3)
    denominator = 0.5 * (1 + 2 * alpha) + 0.5 * (1 - alpha) * slope - 0.5 * alpha * slope * slope
    if denominator == 0:
        raise NoIntersection(f"N_W = 0 has no finite intersection with N_Z = 0 on Z = {slope} W for {g}")

    W = -g.r / denominator
    point = PhasePoint(W=W, Z=slope * W)
    if point.W <= point.Z:
        raise NoIntersection(f"The nullcline intersection {point} for {g} is not in the W > Z half-plane")
    return point


def _oriented(vector: np.ndarray) -> tuple[float, float]:
    unit = vector / np.linalg.norm(vector)
    first_nonzero = unit[0] if unit[0] != 0 else unit[1]
    if first_nonzero < 0:
        unit = -unit
    return float(unit[0]), float(unit[1])


def _real_eigen(jacobian: np.ndarray, where: str) -> tuple[np.ndarray, np.ndarray]:
    trace = jacobian[0, 0] + jacobian[1, 1]
    determinant = jacobian[0, 0] * jacobian[1, 1] - jacobian[0, 1] * jacobian[1, 0]
    if trace * trace - 4 * determinant < 0:
        raise ComplexEigenvalues(f"The psi-flow Jacobian at {where} has complex eigenvalues:\n{jacobian}")

    eigenvalues, eigenvectors = np.linalg.eig(jacobian)
    return np.real(eigenvalues), np.real(eigenvectors)


def sonic_data(g: GasParams) -> SonicData:
    """Sonic point with its psi-flow eigenvalues, eigendirections and the ratio k."""
    sonic_point = find_Ps(g)
    jacobian = jacobian_psi(sonic_point, g)
    eigenvalues, eigenvectors = _real_eigen(jacobian, where=f"P_s for {g}")
    slow, fast = sorted(range(2), key=lambda index: abs(eigenvalues[index]))
    lambda_minus, lambda_plus = float(eigenvalues[slow]), float(eigenvalues[fast])
    if lambda_minus == 0:
        raise DomainError(f"The psi-flow degenerates at P_s for {g} (zero eigenvalue)")
    if lambda_minus * lambda_plus < 0:
        LOGGER.warning("P_s is a saddle of the psi-flow for %s, k is negative", g)

    return SonicData(
        Ps=sonic_point,
        jacobian=jacobian,
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
        nu_minus=_oriented(eigenvectors[:, slow]),
        nu_plus=_oriented(eigenvectors[:, fast]),
        k=lambda_plus / lambda_minus,
    )


def po_data(g: GasParams) -> PoData:
    """P_o with the eigen-decomposition of the psi-flow there."""
    point = find_Po(g)
    jacobian = jacobian_psi(point, g)
    eigenvalues, eigenvectors = _real_eigen(jacobian, where=f"P_o for {g}")
    return PoData(
        Po=point,
        jacobian=jacobian,
        eigenvalues=(float(eigenvalues[0]), float(eigenvalues[1])),
        eigenvectors=(_oriented(eigenvectors[:, 0]), _oriented(eigenvectors[:, 1])),
    )


def k_closed_form(r: float) -> float:
    """k(r) for gamma = 5/3."""
    if r < 1:
        raise DomainError(f"k(r) is only defined for r >= 1, got {r}")
    if r >= 3 - math.sqrt(3):
        raise DomainError(f"k(r) diverges at r* = 3 - sqrt(3), got r = {r}")

    root = math.sqrt(2 * r - 2)
    return (r - 2 - root) / (r - 2 + root)


def k_of_r(gamma: Fraction | str | float, r: float) -> float:
    """k(r), closed form for gamma = 5/3 and through the Jacobian otherwise."""
    if Fraction(gamma) == GAMMA_MONOATOMIC:
        return k_closed_form(r)
    return sonic_data(GasParams.build(gamma, r)).k


def r_of_k(kk: float, g_gamma: Fraction | str | float) -> float:
    """The exponent r_j with k(r_j) = kk, k being increasing in r."""
    if kk == 1:
        return 1.0

    upper = r_star(g_gamma)
    lower_r, upper_r = 1 + R_BRACKET_MARGIN, upper - R_BRACKET_MARGIN
    if kk < 1 or kk <= k_of_r(g_gamma, lower_r) or kk >= k_of_r(g_gamma, upper_r):
        raise NotBracketed(f"k = {kk} is not reached for r in (1, {upper}) with gamma = {g_gamma}")

    return brentq(lambda r: k_of_r(g_gamma, r) - kk, lower_r, upper_r, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def k_sweep(gamma: Fraction | str | float, r_values: Iterable[float]) -> list[tuple[float, float]]:
    """Rows (r, k(r))."""
    return [(r, k_of_r(gamma, r)) for r in r_values]


def to_riemann(u: float, sigma: float) -> tuple[float, float]:
    """(u, sigma) -> (w, z)."""
    return u + sigma, u - sigma


def from_riemann(w: float, z: float) -> tuple[float, float]:
    """(w, z) -> (u, sigma)."""
    return (w + z) / 2, (w - z) / 2


def reconstruct_physical(
    profile: ProfileSamples, g: GasParams, T: float, t: float, R_list: Sequence[float]
) -> list[PhysicalSample]:
    """Physical velocity, rescaled sound speed and density at time t < T from a sampled profile.

    w = (1/r) R / (T - t) W(xi), z likewise, with xi = log(R / (T - t)^(1/r)).
    """
    if t >= T:
        raise DomainError(f"The profile is only defined before the implosion time, got t = {t} >= T = {T}")

    radii = np.asarray(R_list, dtype=float)
    if np.any(radii <= 0):
        raise DomainError(f"Radii must be positive, got {R_list}")

    remaining = T - t
    xi = np.log(radii / remaining ** (1 / g.r))
    if xi.min() < profile.xi[0] or xi.max() > profile.xi[-1]:
        raise OutOfProfileRange(
            f"xi range [{xi.min()}, {xi.max()}] is outside the profile range [{profile.xi[0]}, {profile.xi[-1]}]"
        )

    scale = radii / (g.r * remaining)
    w = scale * np.interp(xi, profile.xi, profile.W)
    z = scale * np.interp(xi, profile.xi, profile.Z)
    u, sigma = from_riemann(w, z)
    if np.any(sigma < 0):
        raise NonPhysicalProfile(f"Negative sound speed at t = {t} for radii {radii[sigma < 0]}")

    alpha = g.alpha
    rho = (alpha * sigma) ** (1 / alpha)
    return [
        PhysicalSample(R=float(radius), u=float(velocity), sigma=float(speed), rho=float(density))
        for radius, velocity, speed, density in zip(radii, u, sigma, rho)
    ]


def sonic_lines(g: GasParams, z_values: Sequence[float]) -> dict[str, list[tuple[float, float]]]:
    """The straight lines D_W = 0 and D_Z = 0 sampled at the given Z values."""
    alpha = g.alpha
    d_w_line = [(-(2 + (1 - alpha) * Z) / (1 + alpha), Z) for Z in z_values]
    w0, w1 = _sonic_line(alpha)
    d_z_line = [(w0 + w1 * Z, Z) for Z in z_values]
    return {"D_W": d_w_line, "D_Z": d_z_line}


def nullcline_polylines(
    g: GasParams, z_values: Sequence[float], w_bounds: tuple[float, float]
) -> dict[str, list[list[tuple[float, float]]]]:
    """Polylines of D_W = 0, D_Z = 0, N_W = 0 and N_Z = 0, N_* split in their two W-branches.

    Points with W outside w_bounds are dropped, a polyline is split wherever a branch stops being real.
    """
    forms = field_forms(g)
    lines = sonic_lines(g, z_values)
    result: dict[str, list[list[tuple[float, float]]]] = {
        name: [[(W, Z) for W, Z in points if w_bounds[0] <= W <= w_bounds[1]]] for name, points in lines.items()
    }
    for name, form in (("N_W", forms.N_W), ("N_Z", forms.N_Z)):
        branches: list[list[tuple[float, float]]] = []
        for branch in range(2):
            current: list[tuple[float, float]] = []
            for Z in z_values:
                roots = form.roots_in_W(Z)
                if len(roots) == 2 and w_bounds[0] <= roots[branch] <= w_bounds[1]:
                    current.append((roots[branch], Z))
                elif current:
                    branches.append(current)
                    current = []
            if current:
                branches.append(current)
        result[name] = branches

    return result
