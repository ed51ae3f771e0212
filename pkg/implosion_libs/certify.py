"""Branch and bound proofs of strict sign conditions with interval arithmetic."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from dataclasses import replace as replace_in_dataclass
from functools import reduce
from pathlib import Path
from typing import Any, Callable, Iterable

from implosion_libs.barriers import (
    ImplicitBarrier,
    ParamBarrier,
    asymptotic_P_nr,
    crossing_polynomial,
    leading_coefficient_P_nr,
)
from implosion_libs.common import EXIT_DISPROVED, EXIT_INCONCLUSIVE, ArgparsableEnum
from implosion_libs.euler_selfsim import GasParams, find_Ps
from implosion_libs.exceptions import ImplosionError
from implosion_libs.interval_core import (
    Box,
    DegenerateBox,
    EmptyInterval,
    Interval,
    IntervalError,
    box_split,
    iv_eval_poly_centered,
)
from implosion_libs.taylor_engine import ProfileSeries

LOGGER = logging.getLogger(__name__)
DEFAULT_TOLERANCE = 1e-10
DEFAULT_LEAF_BUDGET = 10**7
DEFAULT_T_MIN_FACTOR = 1e-4
CERTIFICATE_FORMAT_VERSION = 1
# distance below which a barrier is considered to start at P_s
ANCHOR_TOLERANCE = 1e-10

IntervalFunction = Callable[[Box], Interval]


class CertificationError(ImplosionError):
    """Parent exception for the module."""


class BudgetExhausted(CertificationError):
    """Raised when the leaf budget runs out before the search ends."""


class CertificateParseError(CertificationError):
    """Raised when a certificate file is malformed."""


class SingularParametrization(CertificationError):
    """Raised when the denominator of a rational barrier vanishes on the certified range."""


class Verdict(ArgparsableEnum):
    """Outcome of a branch and bound run, Disproved dominating Inconclusive dominating Proved."""

    PROVED = "Proved"
    DISPROVED = "Disproved"
    INCONCLUSIVE = "Inconclusive"


_VERDICT_RANK = {Verdict.PROVED: 0, Verdict.INCONCLUSIVE: 1, Verdict.DISPROVED: 2}


def combine_verdicts(verdicts: Iterable[Verdict]) -> Verdict:
    """Verdict of a condition split in independent parts."""
    return reduce(lambda first, second: max(first, second, key=_VERDICT_RANK.__getitem__), verdicts, Verdict.PROVED)


@dataclass(frozen=True)
class Leaf:
    """A box of the final partition with the enclosure of the condition on it."""

    box: Box
    enclosure: Interval


@dataclass(frozen=True)
class Certificate:
    """Result of prove_positive, leaves in depth-first order when kept."""

    verdict: Verdict
    condition_id: str
    box: Box
    tolerance: float
    leaf_count: int
    max_depth_reached: int
    leaves: tuple[Leaf, ...] | None = None
    witness: Leaf | None = None
    parameters: dict[str, Any] = field(default_factory=dict)

    def recheck(self, condition: IntervalFunction) -> Verdict:
        """Re-evaluate condition on every stored leaf.

        Proved only if every leaf is strictly positive and the leaves tile the box, the witness of a Disproved
        certificate must lie inside the box and still be strictly negative.
        """
        if self.verdict == Verdict.DISPROVED:
            if self.witness is None:
                raise CertificateParseError("A Disproved certificate needs a witness box")
            if not _inside(self.box, self.witness.box):
                LOGGER.warning("The witness %s of %s lies outside %s", self.witness.box, self.condition_id, self.box)
                return Verdict.INCONCLUSIVE
            return Verdict.DISPROVED if condition(self.witness.box).is_negative() else Verdict.INCONCLUSIVE

        if self.leaves is None:
            raise CertificateParseError(f"Certificate {self.condition_id} carries no leaves to recheck")
        if not _tiles(self.box, [leaf.box for leaf in self.leaves]):
            return Verdict.INCONCLUSIVE
        if all(condition(leaf.box).is_positive() for leaf in self.leaves):
            return Verdict.PROVED
        return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class CrossingReport:
    """Certificate of a crossing sign with what is known on the excluded segment next to P_s."""

    certificate: Certificate
    t_range: Interval
    t_min: float | None = None
    leading_coefficient: float | None = None
    asymptotic_at_t_min: float | None = None

    @property
    def near_zero_agrees(self) -> bool | None:
        """Whether the sign of the exact leading term matches the claimed sign on the excluded segment."""
        if self.leading_coefficient is None:
            return None
        return self.leading_coefficient * self.certificate.parameters.get("claimed_sign", 1) > 0


def _depth_first(box: Box, condition: IntervalFunction, tol: float, budget: int, keep_leaves: bool) -> Certificate:
    stack: list[tuple[Box, int]] = [(box, 0)]
    leaves: list[Leaf] = []
    leaf_count = 0
    max_depth = 0
    inconclusive = False
    while stack:
        current, depth = stack.pop()
        max_depth = max(max_depth, depth)
        try:
            enclosure = condition(current)
        except IntervalError as error:
            LOGGER.debug("No enclosure on %s (%s), splitting", current, error)
            enclosure = Interval(float("-inf"), float("inf"))

        if enclosure.is_positive():
            leaf_count += 1
            if keep_leaves:
                leaves.append(Leaf(box=current, enclosure=enclosure))
        elif enclosure.is_negative():
            LOGGER.debug("Condition negative on %s: %s", current, enclosure)
            return Certificate(
                verdict=Verdict.DISPROVED,
                condition_id="",
                box=box,
                tolerance=tol,
                leaf_count=leaf_count + 1,
                max_depth_reached=max_depth,
                witness=Leaf(box=current, enclosure=enclosure),
            )
        elif current.width < tol:
            LOGGER.debug("Tolerance reached on %s without a sign: %s", current, enclosure)
            inconclusive = True
            leaf_count += 1
            if keep_leaves:
                leaves.append(Leaf(box=current, enclosure=enclosure))
        else:
            try:
                first, second = box_split(current)
            except DegenerateBox:
                inconclusive = True
                leaf_count += 1
                continue
            stack.append((second, depth + 1))
            stack.append((first, depth + 1))

        if leaf_count >= budget and stack:
            raise BudgetExhausted(f"Leaf budget {budget} used up with {len(stack)} boxes still to check")

    return Certificate(
        verdict=Verdict.INCONCLUSIVE if inconclusive else Verdict.PROVED,
        condition_id="",
        box=box,
        tolerance=tol,
        leaf_count=leaf_count,
        max_depth_reached=max_depth,
        leaves=tuple(leaves) if keep_leaves else None,
    )


def prove_positive(
    f: IntervalFunction,
    box: Box,
    tol: float = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_LEAF_BUDGET,
    keep_leaves: bool = False,
    condition_id: str = "f > 0",
) -> Certificate:
    """Prove f > 0 on box by bisection, depth first with the lower half first."""
    certificate = _depth_first(box=box, condition=f, tol=tol, budget=budget, keep_leaves=keep_leaves)
    LOGGER.debug(
        "%s on %s: %s after %d leaves (depth %d)",
        condition_id,
        box,
        certificate.verdict,
        certificate.leaf_count,
        certificate.max_depth_reached,
    )
    return replace_in_dataclass(certificate, condition_id=condition_id)


def crossing_condition(b: ParamBarrier, g: GasParams, claimed_sign: int) -> IntervalFunction:
    """claimed_sign times d^6 P(t) on a one dimensional box, same sign as the claimed crossing."""
    coeffs = crossing_polynomial(b, g)
    if claimed_sign < 0:
        coeffs = [-coeff for coeff in coeffs]

    def _condition(box: Box) -> Interval:
        return iv_eval_poly_centered(coeffs, box.dims[0])

    return _condition


def _starts_at_sonic_point(b: ParamBarrier, g: GasParams, t: float) -> bool:
    point, sonic_point = b.point(t), find_Ps(g)
    return abs(point.W - sonic_point.W) + abs(point.Z - sonic_point.Z) < ANCHOR_TOLERANCE


def certify_crossing(
    b: ParamBarrier | ImplicitBarrier,
    g: GasParams,
    t_range: Interval | None = None,
    claimed_sign: int = 1,
    tol: float = DEFAULT_TOLERANCE,
    budget: int = DEFAULT_LEAF_BUDGET,
    t_min_factor: float = DEFAULT_T_MIN_FACTOR,
    series: ProfileSeries | None = None,
    keep_leaves: bool = False,
) -> CrossingReport:
    """Certify sign(P(t)) = claimed_sign on t_range (the barrier domain by default).

    Ranges starting at P_s, where P vanishes, are cut at t_min = t_min_factor * t_max. When the barrier is b_nr_n
    and a series of order n + 1 is given, the report carries the exact leading coefficient and the two-term
    asymptotic value at t_min for the excluded segment.
    """
    if claimed_sign not in (1, -1):
        raise ValueError(f"claimed_sign must be 1 or -1, got {claimed_sign}")

    barrier = b.parametrization() if isinstance(b, ImplicitBarrier) else b
    if t_range is None:
        t_range = Interval(*barrier.t_domain)

    t_min = None
    if _starts_at_sonic_point(barrier, g, t_range.lo):
        t_min = t_range.lo + t_min_factor * (t_range.hi - t_range.lo)
        t_range = Interval(t_min, t_range.hi)

    d_coeffs = [Interval.from_fraction(coeff) for coeff in barrier.d_poly]
    if iv_eval_poly_centered(d_coeffs, t_range).contains_zero():
        raise SingularParametrization(f"The parametrisation of {barrier.label} is singular inside {t_range}")

    condition_id = f"{'+' if claimed_sign > 0 else '-'}P[{barrier.label}]"
    certificate = prove_positive(
        crossing_condition(barrier, g, claimed_sign),
        Box.of(t_range),
        tol=tol,
        budget=budget,
        keep_leaves=keep_leaves,
        condition_id=condition_id,
    )
    parameters = {
        "label": barrier.label,
        "gamma": str(g.gamma),
        "r": g.r,
        "claimed_sign": claimed_sign,
        "beta": barrier.beta,
        "n": barrier.n,
        "t_min": t_min,
    }
    certificate = replace_in_dataclass(certificate, parameters=parameters)

    leading, asymptotic = None, None
    if t_min is not None and barrier.n is not None and barrier.beta is not None and series is not None:
        if series.order > barrier.n:
            leading = leading_coefficient_P_nr(barrier.n, barrier.beta, series, g)
        asymptotic = asymptotic_P_nr(barrier.n, barrier.beta, series, t_min)

    LOGGER.info("%s for %s on %s: %s", condition_id, g, t_range, certificate.verdict)
    return CrossingReport(
        certificate=certificate,
        t_range=t_range,
        t_min=t_min,
        leading_coefficient=leading,
        asymptotic_at_t_min=asymptotic,
    )


def _volume(dims: tuple[Interval, ...]) -> float:
    result = 1.0
    for dim in dims:
        result *= dim.hi - dim.lo
    return result


def _inside(box: Box, inner: Box) -> bool:
    return len(inner.dims) == len(box.dims) and all(
        outer.contains_interval(dim) for outer, dim in zip(box.dims, inner.dims)
    )


def _tiles(box: Box, leaves: list[Box]) -> bool:
    """Whether the leaves cover box with no gap and no overlap, one dimensional leaves meeting end to end exactly."""
    if not leaves or not all(_inside(box, leaf) for leaf in leaves):
        return False

    if len(box.dims) == 1:
        ordered = sorted(leaves, key=lambda leaf: leaf.dims[0].lo)
        if ordered[0].dims[0].lo != box.dims[0].lo or ordered[-1].dims[0].hi != box.dims[0].hi:
            return False
        return all(first.dims[0].hi == second.dims[0].lo for first, second in zip(ordered, ordered[1:]))

    expected = _volume(box.dims)
    slack = 1e-9 * expected
    if abs(sum(_volume(leaf.dims) for leaf in leaves) - expected) > slack:
        return False
    overlap = 0.0
    for index, first in enumerate(leaves):
        for second in leaves[index + 1 :]:
            common = 1.0
            for a, b in zip(first.dims, second.dims):
                common *= max(0.0, min(a.hi, b.hi) - max(a.lo, b.lo))
            overlap += common
    return overlap <= slack


def _interval_to_json(interval: Interval) -> list[str]:
    return [repr(interval.lo), repr(interval.hi)]


def _interval_from_json(value: Any) -> Interval:
    if not isinstance(value, list) or len(value) != 2 or not all(isinstance(end, str) for end in value):
        raise CertificateParseError(f"Expected a pair of decimal strings, got {value!r}")
    try:
        return Interval.from_decimal_strings(value[0], value[1])
    except (ValueError, ZeroDivisionError, EmptyInterval) as error:
        raise CertificateParseError(f"Invalid interval {value!r}: {error}") from error


def _box_from_json(value: Any) -> Box:
    if not isinstance(value, list) or not value:
        raise CertificateParseError(f"Expected a non empty list of intervals, got {value!r}")
    return Box(dims=tuple(_interval_from_json(dim) for dim in value))


def _leaf_to_json(leaf: Leaf) -> dict[str, Any]:
    return {"box": [_interval_to_json(dim) for dim in leaf.box.dims], "enclosure": _interval_to_json(leaf.enclosure)}


def _leaf_from_json(value: Any) -> Leaf:
    if not isinstance(value, dict) or set(value) != {"box", "enclosure"}:
        raise CertificateParseError(f"Malformed leaf {value!r}")
    return Leaf(box=_box_from_json(value["box"]), enclosure=_interval_from_json(value["enclosure"]))


def certificate_to_dict(c: Certificate) -> dict[str, Any]:
    """JSON-friendly form, interval endpoints as shortest round-tripping decimal strings."""
    return {
        "format_version": CERTIFICATE_FORMAT_VERSION,
        "verdict": str(c.verdict),
        "condition_id": c.condition_id,
        "box": [_interval_to_json(dim) for dim in c.box.dims],
        "tolerance": c.tolerance,
        "leaf_count": c.leaf_count,
        "max_depth_reached": c.max_depth_reached,
        "leaves": None if c.leaves is None else [_leaf_to_json(leaf) for leaf in c.leaves],
        "witness": None if c.witness is None else _leaf_to_json(c.witness),
        "parameters": c.parameters,
    }


def certificate_export(c: Certificate, path: Path) -> None:
    """Write the certificate as JSON."""
    path.write_text(json.dumps(certificate_to_dict(c), indent=2, sort_keys=True), encoding="utf-8")
    LOGGER.debug("Certificate %s written to %s", c.condition_id, path)


def certificate_from_dict(data: Any) -> Certificate:
    """Inverse of certificate_to_dict, endpoints widened outward when they are not floats."""
    required = {"format_version", "verdict", "condition_id", "box", "tolerance", "leaf_count", "max_depth_reached"}
    if not isinstance(data, dict) or not required.issubset(data):
        raise CertificateParseError(f"Missing certificate fields: {sorted(required - set(data or {}))}")
    if data["format_version"] != CERTIFICATE_FORMAT_VERSION:
        raise CertificateParseError(f"Unsupported certificate format version {data['format_version']!r}")

    try:
        verdict = Verdict(data["verdict"])
        tolerance = float(data["tolerance"])
        leaf_count = int(data["leaf_count"])
        max_depth = int(data["max_depth_reached"])
    except (ValueError, TypeError) as error:
        raise CertificateParseError(f"Invalid certificate header: {error}") from error

    leaves = data.get("leaves")
    witness = data.get("witness")
    parameters = data.get("parameters") or {}
    if not isinstance(parameters, dict):
        raise CertificateParseError(f"Parameters must be a mapping, got {parameters!r}")
    if leaves is not None and not isinstance(leaves, list):
        raise CertificateParseError(f"Leaves must be a list, got {leaves!r}")

    return Certificate(
        verdict=verdict,
        condition_id=str(data["condition_id"]),
        box=_box_from_json(data["box"]),
        tolerance=tolerance,
        leaf_count=leaf_count,
        max_depth_reached=max_depth,
        leaves=None if leaves is None else tuple(_leaf_from_json(leaf) for leaf in leaves),
        witness=None if witness is None else _leaf_from_json(witness),
        parameters=parameters,
    )


def certificate_load(path: Path) -> Certificate:
    """Read a certificate written by certificate_export."""
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise CertificateParseError(f"{path} is not valid JSON: {error}") from error
    return certificate_from_dict(data)


def verdict_exit_code(verdict: Verdict) -> int:
    """Cookbook exit code of a (combined) verdict."""
    return {Verdict.PROVED: 0, Verdict.DISPROVED: EXIT_DISPROVED, Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[verdict]
