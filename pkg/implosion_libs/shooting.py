"""Trajectories of the psi-flow leaving the sonic point and shooting on r.

Nothing in here is rigorous, the certified statements come from the barriers and certify modules.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from implosion_libs.common import ArgparsableEnum
from implosion_libs.euler_selfsim import (
    GasParams,
    PhasePoint,
    ProfileSamples,
    field_forms,
    find_Po,
    k_of_r,
    po_data,
    r_of_k,
)
from implosion_libs.exceptions import ImplosionError
from implosion_libs.taylor_engine import ProfileSeries, evaluate_series, taylor_at_Ps

LOGGER = logging.getLogger(__name__)
FIXED_POINT_GUARD = 1e-13
ORIENTATION_GUARD = 1e-12
DEFAULT_LAUNCH_ORDER = 8
# the refinement run launches this many times closer to P_s, with halved tolerances
REFINEMENT_FACTOR = 10.0
# distance from the resonant exponents kept at both ends of a bisection window
WINDOW_MARGIN = 1e-3


class ShootingError(ImplosionError):
    """Parent exception for the module."""


class StepSizeUnderflow(ShootingError):
    """Raised when the integrator can't make progress."""


class AmbiguousOrientation(ShootingError):
    """Raised when the xi direction at P_s is undefined (D_W vanishes there)."""


class DichotomyFailed(ShootingError):
    """Raised when both ends of the r window classify the same way."""


class Termination(ArgparsableEnum):
    """How a trajectory stopped, the first event hit wins."""

    HITS_DW = "HitsDW"
    HITS_DZ = "HitsDZ"
    HITS_VACUUM = "HitsVacuum"
    REACHES_ORIGIN = "ReachesOrigin"
    CONVERGES_TO_PO = "ConvergesToPo"
    ESCAPES_TO_INFINITY = "EscapesToInfinity"
    STARTS_AT_FIXED_POINT = "StartsAtFixedPoint"
    TIMEOUT = "Timeout"


class Side(ArgparsableEnum):
    """Branch of the smooth profile, right is the negative xi continuation."""

    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class IntegrationSettings:
    """Integrator tolerances and event radii."""

    rtol: float = 1e-10
    atol: float = 1e-12
    psi_max: float = 500.0
    origin_radius: float = 1e-4
    po_radius: float = 1e-3
    escape_radius: float = 1e3
    launch_offset: float = 1e-2
    launch_order: int = DEFAULT_LAUNCH_ORDER


@dataclass(frozen=True)
class Trajectory:
    """Samples of one integration, xi carried along through dxi/dpsi = D_W D_Z."""

    psi: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    xi: np.ndarray
    termination: Termination
    r: float
    gamma: Fraction
    side: Side | None = None

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        """(psi, W, Z) rows."""
        return [(float(psi), float(W), float(Z)) for psi, W, Z in zip(self.psi, self.W, self.Z)]

    @property
    def end(self) -> PhasePoint:
        """Last point."""
        return PhasePoint(W=float(self.W[-1]), Z=float(self.Z[-1]))

    @property
    def min_density_gap(self) -> float:
        """Smallest W - Z along the samples, positive while the density is."""
        return float(np.min(self.W - self.Z))


@dataclass(frozen=True)
class Classification:
    """Termination of one branch, and of its refinement run closer to P_s with tighter tolerances."""

    termination: Termination
    check_termination: Termination
    trajectory: Trajectory

    @property
    def consistent(self) -> bool:
        """Whether the refinement run keeps the tag."""
        return self.termination == self.check_termination


@dataclass(frozen=True)
class BisectionStep:
    """One evaluation of the bisection."""

    r: float
    termination: Termination


@dataclass(frozen=True)
class ShootingResult:
    """Outcome of find_r_bisect with its history."""

    gamma: Fraction
    n: int
    r: float
    bracket: tuple[float, float]
    window: tuple[float, float]
    end_tags: tuple[Termination, Termination]
    history: list[BisectionStep] = field(default_factory=list)
    iterations: int = 0


def _psi_rhs(g: GasParams, origin: PhasePoint) -> Callable[[float, np.ndarray], list[float]]:
    forms = field_forms(g)

    def _rhs(_psi: float, state: np.ndarray) -> list[float]:
        W, Z = origin.W + state[0], origin.Z + state[1]
        n_w, d_w, n_z, d_z = forms.N_W(W, Z), forms.D_W(W, Z), forms.N_Z(W, Z), forms.D_Z(W, Z)
        return [n_w * d_z, n_z * d_w, d_w * d_z]

    return _rhs


def _terminal(function: Callable[[float, np.ndarray], float], direction: int = 0) -> Callable:
    function.terminal = True  # type: ignore[attr-defined]
    function.direction = direction  # type: ignore[attr-defined]
    return function


def po_contraction(g: GasParams) -> Callable[[float, float], float]:
    """Negative where the linearised psi-flow at the saddle P_o pulls (W, Z) towards it.

    In the eigen-coordinates (x_s, x_u) of P_o that is lambda_u x_u**2 + lambda_s x_s**2 < 0, so only points close to
    the stable manifold qualify and trajectories merely passing by the saddle don't.
    """
    data = po_data(g)
    stable, unstable = sorted(range(2), key=lambda index: data.eigenvalues[index])
    lambda_s, lambda_u = data.eigenvalues[stable], data.eigenvalues[unstable]
    if lambda_s >= 0 or lambda_u <= 0:
        LOGGER.warning("P_o is not a saddle for %s (eigenvalues %r), only its radius is checked", g, data.eigenvalues)
        return lambda _W, _Z: -1.0

    to_eigen = np.linalg.inv(np.column_stack([data.eigenvectors[stable], data.eigenvectors[unstable]]))
    weight_s, weight_u = math.sqrt(-lambda_s), math.sqrt(lambda_u)

    def _contraction(W: float, Z: float) -> float:
        x_s, x_u = to_eigen @ np.array([W - data.Po.W, Z - data.Po.Z])
        return weight_u * abs(x_u) - weight_s * abs(x_s)

    return _contraction


def _events(g: GasParams, origin: PhasePoint, settings: IntegrationSettings) -> dict[Termination, Callable]:
    forms = field_forms(g)
    Po = find_Po(g)
    contraction = po_contraction(g)

    def _point(state: np.ndarray) -> tuple[float, float]:
        return origin.W + state[0], origin.Z + state[1]

    def _hits_dw(_psi: float, state: np.ndarray) -> float:
        return forms.D_W(*_point(state))

    def _hits_dz(_psi: float, state: np.ndarray) -> float:
        return forms.D_Z(*_point(state))

    def _hits_vacuum(_psi: float, state: np.ndarray) -> float:
        W, Z = _point(state)
        return W - Z

    def _origin(_psi: float, state: np.ndarray) -> float:
        return math.hypot(*_point(state)) - settings.origin_radius

    def _po(_psi: float, state: np.ndarray) -> float:
        W, Z = _point(state)
        return max(math.hypot(W - Po.W, Z - Po.Z) - settings.po_radius, contraction(W, Z))

    def _escape(_psi: float, state: np.ndarray) -> float:
        return math.hypot(*_point(state)) - settings.escape_radius

    return {
        Termination.HITS_DW: _terminal(_hits_dw),
        Termination.HITS_DZ: _terminal(_hits_dz),
        Termination.HITS_VACUUM: _terminal(_hits_vacuum, direction=-1),
        Termination.REACHES_ORIGIN: _terminal(_origin, direction=-1),
        Termination.CONVERGES_TO_PO: _terminal(_po, direction=-1),
        Termination.ESCAPES_TO_INFINITY: _terminal(_escape, direction=1),
    }


def integrate_psi(
    start: PhasePoint,
    g: GasParams,
    settings: IntegrationSettings | None = None,
    xi_start: float = 0.0,
    origin: PhasePoint | None = None,
    side: Side | None = None,
) -> Trajectory:
    """Integrate the psi-field from start until the first event or psi_max.

    The state is kept relative to origin (the start point by default) to keep digits near the fixed points.
    """
    settings = settings or IntegrationSettings()
    origin = origin or start
    forms = field_forms(g)
    n_w, d_w = forms.N_W(start.W, start.Z), forms.D_W(start.W, start.Z)
    n_z, d_z = forms.N_Z(start.W, start.Z), forms.D_Z(start.W, start.Z)
    if math.hypot(n_w * d_z, n_z * d_w) < FIXED_POINT_GUARD * (1 + start.norm**2):
        LOGGER.debug("%s is a fixed point of the psi-flow for %s, nothing to integrate", start, g)
        return Trajectory(
            psi=np.array([0.0]),
            W=np.array([start.W]),
            Z=np.array([start.Z]),
            xi=np.array([xi_start]),
            termination=Termination.STARTS_AT_FIXED_POINT,
            r=g.r,
            gamma=g.gamma,
            side=side,
        )

    events = _events(g, origin, settings)
    solution = solve_ivp(
        _psi_rhs(g, origin),
        (0.0, settings.psi_max),
        [start.W - origin.W, start.Z - origin.Z, xi_start],
        method="DOP853",
        rtol=settings.rtol,
        atol=settings.atol,
        events=list(events.values()),
    )
    if solution.status == -1:
        raise StepSizeUnderflow(f"Integration from {start} for {g} failed: {solution.message}")

    termination = Termination.TIMEOUT
    first_time = math.inf
    for tag, times in zip(events, solution.t_events):
        if len(times) and times[0] < first_time:
            termination, first_time = tag, times[0]

    LOGGER.debug("Trajectory from %s for %s: %s at psi = %r", start, g, termination, solution.t[-1])
    return Trajectory(
        psi=solution.t,
        W=origin.W + solution.y[0],
        Z=origin.Z + solution.y[1],
        xi=solution.y[2],
        termination=termination,
        r=g.r,
        gamma=g.gamma,
        side=side,
    )


def _launch_xi(series: ProfileSeries, side: Side, offset: float) -> float:
    """xi on the given branch where the Taylor polynomial is offset away from P_s."""
    sign = 1.0 if side == Side.LEFT else -1.0
    Ps = series.Ps
    slope = math.hypot(series.W_coeffs[1], series.Z_coeffs[1])
    first_guess = offset / slope

    def _distance(xi: float) -> float:
        point = evaluate_series(series, sign * xi)
        return math.hypot(point.W - Ps.W, point.Z - Ps.Z) - offset

    try:
        return sign * brentq(_distance, 0.0, 4 * first_guess, xtol=1e-15)
    except ValueError:
        LOGGER.debug("Falling back to the first order launch for offset %r", offset)
        return sign * first_guess


def _check_orientation(series: ProfileSeries, g: GasParams) -> None:
    d_w0 = field_forms(g).D_W(series.Ps.W, series.Ps.Z)
    if abs(d_w0) < ORIENTATION_GUARD:
        raise AmbiguousOrientation(f"D_W(P_s) = {d_w0!r} for {g}, the xi direction at P_s is undefined")


def launch_branch(
    g: GasParams,
    side: Side,
    settings: IntegrationSettings | None = None,
    series: ProfileSeries | None = None,
    offset: float | None = None,
) -> Trajectory:
    """Integrate one branch of the smooth profile from its Taylor polynomial."""
    settings = settings or IntegrationSettings()
    series = series or taylor_at_Ps(g, settings.launch_order, allow_resonant=True)
    _check_orientation(series, g)
    xi = _launch_xi(series, side, settings.launch_offset if offset is None else offset)
    start = evaluate_series(series, xi)
    return integrate_psi(start, g, settings=settings, xi_start=xi, origin=series.Ps, side=side)


def refinement_settings(settings: IntegrationSettings) -> IntegrationSettings:
    """Settings of the stability re-run: launch closer to P_s and halve both tolerances."""
    return replace(
        settings,
        rtol=settings.rtol / 2,
        atol=settings.atol / 2,
        launch_offset=settings.launch_offset / REFINEMENT_FACTOR,
    )


def _classify(g: GasParams, side: Side, settings: IntegrationSettings) -> Classification:
    series = taylor_at_Ps(g, settings.launch_order, allow_resonant=True)
    trajectory = launch_branch(g, side, settings, series)
    refined = refinement_settings(settings)
    check = launch_branch(g, side, refined, series)
    if check.termination != trajectory.termination:
        LOGGER.warning(
            "Unstable classification of the %s branch for %s: %s at offset %r, %s at offset %r with rtol %r",
            side,
            g,
            trajectory.termination,
            settings.launch_offset,
            check.termination,
            refined.launch_offset,
            refined.rtol,
        )
    return Classification(
        termination=trajectory.termination, check_termination=check.termination, trajectory=trajectory
    )


def classify_right(g: GasParams, settings: IntegrationSettings | None = None) -> Classification:
    """Classify the negative xi continuation of the smooth profile."""
    return _classify(g, Side.RIGHT, settings or IntegrationSettings())


def classify_left(g: GasParams, settings: IntegrationSettings | None = None) -> Classification:
    """Classify the positive xi continuation of the smooth profile."""
    return _classify(g, Side.LEFT, settings or IntegrationSettings())


def resonance_window(gamma: Fraction | str | float, n: int, margin: float = WINDOW_MARGIN) -> tuple[float, float]:
    """(r_n + eps, r_(n+1) - eps), eps shrunk to a tenth of the window when it is narrow."""
    lower, upper = r_of_k(n, gamma), r_of_k(n + 1, gamma)
    eps = min(margin, (upper - lower) / 10)
    return lower + eps, upper - eps


def find_r_bisect(
    g_gamma: Fraction | str | float,
    n: int,
    tol_r: float = 1e-7,
    settings: IntegrationSettings | None = None,
    classifier: Callable[[GasParams, IntegrationSettings], Classification] | None = None,
) -> ShootingResult:
    """Bisect r in (r_n, r_(n+1)) on the boundary between the HitsDW and HitsDZ right branches.

    The two ends must carry one tag each. Which end hits D_W follows the sign of the resonant Taylor coefficients
    (for gamma = 5/3 and n = 3 the lower end hits D_Z), so the order is recorded in end_tags rather than imposed.
    A midpoint with any third tag ends the search there.
    """
    settings = settings or IntegrationSettings()
    classifier = classifier or (lambda g, run_settings: classify_right(g, run_settings))
    gamma = Fraction(g_gamma)
    window = resonance_window(gamma, n)
    lower, upper = window
    lower_tag = classifier(GasParams(gamma=gamma, r=lower), settings).termination
    upper_tag = classifier(GasParams(gamma=gamma, r=upper), settings).termination
    dichotomy = {Termination.HITS_DW, Termination.HITS_DZ}
    if lower_tag == upper_tag or {lower_tag, upper_tag} != dichotomy:
        raise DichotomyFailed(
            f"The window ({lower}, {upper}) for gamma = {gamma}, n = {n} classifies as {lower_tag} / {upper_tag}"
        )

    LOGGER.info("Bisecting r in (%r, %r): %s / %s", lower, upper, lower_tag, upper_tag)
    history = [BisectionStep(r=lower, termination=lower_tag), BisectionStep(r=upper, termination=upper_tag)]
    iterations = 0
    while upper - lower > tol_r:
        middle = (lower + upper) / 2
        tag = classifier(GasParams(gamma=gamma, r=middle), settings).termination
        history.append(BisectionStep(r=middle, termination=tag))
        iterations += 1
        LOGGER.debug("r = %r: %s", middle, tag)
        if tag == lower_tag:
            lower = middle
        elif tag == upper_tag:
            upper = middle
        else:
            LOGGER.info("r = %r ends with %s, stopping the bisection there", middle, tag)
            lower = upper = middle
            break

    return ShootingResult(
        gamma=gamma,
        n=n,
        r=(lower + upper) / 2,
        bracket=(lower, upper),
        window=window,
        end_tags=(lower_tag, upper_tag),
        history=history,
        iterations=iterations,
    )


def scan_resonance_window(gamma: Fraction | str | float, r_target: float) -> tuple[int, float, float]:
    """(n, r_n, r_(n+1)) with r_n <= r_target < r_(n+1)."""
    n = math.floor(k_of_r(gamma, r_target))
    return n, r_of_k(n, gamma), r_of_k(n + 1, gamma)


def _monotone(xi: np.ndarray, W: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Longest prefix on which xi moves away from its start strictly."""
    steps = np.diff(xi) * np.sign(xi[-1] - xi[0] or 1.0)
    stop = int(np.argmax(steps <= 0)) + 1 if np.any(steps <= 0) else len(xi)
    return xi[:stop], W[:stop], Z[:stop]


def build_profile(g: GasParams, settings: IntegrationSettings | None = None) -> ProfileSamples:
    """Both branches glued at P_s (xi = 0) into one xi-increasing sampled profile."""
    settings = settings or IntegrationSettings()
    series = taylor_at_Ps(g, settings.launch_order, allow_resonant=True)
    right = launch_branch(g, Side.RIGHT, settings, series)
    left = launch_branch(g, Side.LEFT, settings, series)
    right_xi, right_W, right_Z = _monotone(right.xi, right.W, right.Z)
    left_xi, left_W, left_Z = _monotone(left.xi, left.W, left.Z)
    Ps = series.Ps
    LOGGER.debug("Profile for %s: right %s, left %s", g, right.termination, left.termination)
    return ProfileSamples(
        xi=np.concatenate([right_xi[::-1], [0.0], left_xi]),
        W=np.concatenate([right_W[::-1], [Ps.W], left_W]),
        Z=np.concatenate([right_Z[::-1], [Ps.Z], left_Z]),
    )


def shooting_report(result: ShootingResult) -> dict[str, Any]:
    """JSON-friendly report of a bisection."""
    return {
        "gamma": str(result.gamma),
        "n": result.n,
        "r": result.r,
        "bracket": list(result.bracket),
        "window": list(result.window),
        "end_tags": [str(tag) for tag in result.end_tags],
        "iterations": result.iterations,
        "history": [{"r": step.r, "termination": str(step.termination)} for step in result.history],
    }
