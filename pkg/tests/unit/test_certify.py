from __future__ import annotations

import json
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from implosion_libs.barriers import crossing_sign_param, leading_coefficient_P_nr, make_B_fr, make_b_nl, make_b_nr
from implosion_libs.certify import (
    BudgetExhausted,
    CertificateParseError,
    SingularParametrization,
    Verdict,
    certificate_export,
    certificate_load,
    certify_crossing,
    combine_verdicts,
    crossing_condition,
    prove_positive,
    verdict_exit_code,
)
from implosion_libs.common import UtilsForTesting
from implosion_libs.euler_selfsim import GasParams
from implosion_libs.interval_core import Box, Interval, iv_eval_poly_centered
from implosion_libs.taylor_engine import taylor_at_Ps

MONOATOMIC = GasParams(gamma=Fraction(5, 3), r=1.13)


@pytest.fixture(scope="module")
def series():
    return taylor_at_Ps(MONOATOMIC, 8)


def _polynomial(*coeffs: float):
    points = [Interval.point(coeff) for coeff in coeffs]

    def _condition(box: Box) -> Interval:
        return iv_eval_poly_centered(points, box.dims[0])

    return _condition


def _squares_difference(box: Box) -> Interval:
    # x^2 - x^2 + 1/10, needs splitting because of the dependency problem
    x = box.dims[0]
    return x * x - x * x + 0.1


def _saddle(box: Box) -> Interval:
    x, y = box.dims
    return x * y - x * y + 0.5


def test_positive_polynomial_is_proved_quickly():
    certificate = prove_positive(_polynomial(1.0, 0.0, 1.0), Box.of(Interval(-1.0, 1.0)), condition_id="x^2 + 1")

    assert certificate.verdict == Verdict.PROVED
    assert certificate.condition_id == "x^2 + 1"
    assert certificate.leaf_count <= 4


def test_sign_change_is_disproved_with_a_witness():
    certificate = prove_positive(_polynomial(0.0, 1.0), Box.of(Interval(-1.0, 1.0)))

    assert certificate.verdict == Verdict.DISPROVED
    assert certificate.witness is not None
    assert certificate.witness.enclosure.is_negative()
    assert certificate.witness.box.dims[0].hi <= 0


def test_double_root_is_inconclusive():
    certificate = prove_positive(_polynomial(0.25, -1.0, 1.0), Box.of(Interval(0.0, 1.0)), tol=1e-6)

    assert certificate.verdict == Verdict.INCONCLUSIVE
    assert certificate.max_depth_reached >= 20


def test_budget_exhausted_raises():
    with pytest.raises(BudgetExhausted):
        prove_positive(_polynomial(0.25, -1.0, 1.0), Box.of(Interval(0.0, 1.0)), tol=1e-12, budget=3)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "one_dimension": {"condition": _squares_difference, "box": Box.of(Interval(0.0, 1.0))},
            "two_dimensions": {
                "condition": _saddle,
                "box": Box.of(Interval(-1.0, 1.0), Interval(0.0, 2.0)),
            },
        }
    )
)
def test_kept_leaves_tile_the_box(box: Box, condition):
    certificate = prove_positive(condition, box, keep_leaves=True)

    assert certificate.verdict == Verdict.PROVED
    assert certificate.leaves is not None
    assert len(certificate.leaves) == certificate.leaf_count > 1
    assert certificate.recheck(condition) == Verdict.PROVED


def test_recheck_with_a_missing_leaf_is_inconclusive():
    certificate = prove_positive(_squares_difference, Box.of(Interval(0.0, 1.0)), keep_leaves=True)
    holed = replace(certificate, leaves=certificate.leaves[1:])

    assert holed.recheck(_squares_difference) == Verdict.INCONCLUSIVE


def _constant(box: Box) -> Interval:
    return Interval.point(1.0)


def test_recheck_with_a_repeated_leaf_is_inconclusive():
    certificate = prove_positive(_squares_difference, Box.of(Interval(0.0, 1.0)), keep_leaves=True)
    repeated = replace(certificate, leaves=certificate.leaves + certificate.leaves[:1])

    assert certificate.recheck(_constant) == Verdict.PROVED
    assert repeated.recheck(_constant) == Verdict.INCONCLUSIVE


def test_recheck_with_overlapping_leaves_is_inconclusive():
    certificate = prove_positive(_squares_difference, Box.of(Interval(0.0, 1.0)), keep_leaves=True)
    leaves = sorted(certificate.leaves, key=lambda leaf: leaf.box.dims[0].lo)
    first, second = leaves[0].box.dims[0], leaves[1].box.dims[0]
    widened = replace(leaves[0], box=Box.of(Interval(first.lo, (second.lo + second.hi) / 2)))
    overlapping = replace(certificate, leaves=(widened, *leaves[1:]))

    assert overlapping.recheck(_constant) == Verdict.INCONCLUSIVE


def test_recheck_with_a_witness_outside_the_box_is_inconclusive():
    certificate = prove_positive(_polynomial(0.0, 1.0), Box.of(Interval(-1.0, 1.0)))
    outside = Box.of(Interval(-3.0, -2.0))
    moved = replace(certificate, witness=replace(certificate.witness, box=outside))

    assert _polynomial(0.0, 1.0)(outside).is_negative()
    assert certificate.recheck(_polynomial(0.0, 1.0)) == Verdict.DISPROVED
    assert moved.recheck(_polynomial(0.0, 1.0)) == Verdict.INCONCLUSIVE


def test_recheck_without_leaves_raises():
    certificate = prove_positive(_polynomial(1.0, 0.0, 1.0), Box.of(Interval(-1.0, 1.0)))

    with pytest.raises(CertificateParseError):
        certificate.recheck(_polynomial(1.0, 0.0, 1.0))


def test_certificate_survives_export_and_load(tmp_path):
    certificate = prove_positive(
        _saddle, Box.of(Interval(-1.0, 1.0), Interval(0.0, 2.0)), keep_leaves=True, condition_id="saddle"
    )
    path = tmp_path / "certificate-saddle.json"
    certificate_export(certificate, path)
    loaded = certificate_load(path)

    assert json.loads(path.read_text())["format_version"] == 1
    assert loaded.verdict == Verdict.PROVED
    assert loaded.condition_id == "saddle"
    assert loaded.box == certificate.box
    assert loaded.leaf_count == certificate.leaf_count
    assert loaded.recheck(_saddle) == Verdict.PROVED


def test_disproved_certificate_survives_export_and_load(tmp_path):
    certificate = prove_positive(_polynomial(0.0, 1.0), Box.of(Interval(-1.0, 1.0)))
    path = tmp_path / "certificate-x.json"
    certificate_export(certificate, path)

    assert certificate_load(path).recheck(_polynomial(0.0, 1.0)) == Verdict.DISPROVED


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "not_json": {"content": "{not json"},
            "missing_fields": {"content": json.dumps({"verdict": "Proved"})},
            "unknown_version": {
                "content": json.dumps(
                    {
                        "format_version": 2,
                        "verdict": "Proved",
                        "condition_id": "f > 0",
                        "box": [["0.0", "1.0"]],
                        "tolerance": 1e-10,
                        "leaf_count": 1,
                        "max_depth_reached": 0,
                    }
                )
            },
            "bad_interval": {
                "content": json.dumps(
                    {
                        "format_version": 1,
                        "verdict": "Proved",
                        "condition_id": "f > 0",
                        "box": [["1.0", "0.0"]],
                        "tolerance": 1e-10,
                        "leaf_count": 1,
                        "max_depth_reached": 0,
                    }
                )
            },
            "unknown_verdict": {
                "content": json.dumps(
                    {
                        "format_version": 1,
                        "verdict": "Maybe",
                        "condition_id": "f > 0",
                        "box": [["0.0", "1.0"]],
                        "tolerance": 1e-10,
                        "leaf_count": 1,
                        "max_depth_reached": 0,
                    }
                )
            },
        }
    )
)
def test_corrupt_certificate_raises(tmp_path, content: str):
    path = tmp_path / "certificate.json"
    path.write_text(content)

    with pytest.raises(CertificateParseError):
        certificate_load(path)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "nothing": {"verdicts": [], "expected": Verdict.PROVED},
            "all_proved": {"verdicts": [Verdict.PROVED, Verdict.PROVED], "expected": Verdict.PROVED},
            "one_inconclusive": {"verdicts": [Verdict.PROVED, Verdict.INCONCLUSIVE], "expected": Verdict.INCONCLUSIVE},
            "disproved_wins": {
                "verdicts": [Verdict.INCONCLUSIVE, Verdict.DISPROVED, Verdict.PROVED],
                "expected": Verdict.DISPROVED,
            },
        }
    )
)
def test_combine_verdicts(expected: Verdict, verdicts: list[Verdict]):
    assert combine_verdicts(verdicts) == expected


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "proved": {"verdict": Verdict.PROVED, "expected": 0},
            "disproved": {"verdict": Verdict.DISPROVED, "expected": 2},
            "inconclusive": {"verdict": Verdict.INCONCLUSIVE, "expected": 3},
        }
    )
)
def test_verdict_exit_code(expected: int, verdict: Verdict):
    assert verdict_exit_code(verdict) == expected


def test_wrong_crossing_sign_is_disproved(series):
    barrier = make_b_nl(series)
    observed = math.copysign(1, crossing_sign_param(barrier, MONOATOMIC, 0.5))
    report = certify_crossing(barrier, MONOATOMIC, t_range=Interval(0.49, 0.51), claimed_sign=-int(observed), tol=1e-6)

    assert report.certificate.verdict == Verdict.DISPROVED
    assert report.t_min is None
    assert report.certificate.condition_id == f"{'+' if observed < 0 else '-'}P[b_nl]"


def test_range_starting_at_the_sonic_point_is_cut(series):
    barrier = make_b_nr(series, 3, 500.0)
    report = certify_crossing(
        barrier, MONOATOMIC, t_range=Interval(0.0, 1e-2), claimed_sign=1, tol=1e-3, series=series
    )
    leading = leading_coefficient_P_nr(3, 500.0, series, MONOATOMIC)

    assert report.t_min == pytest.approx(1e-6)
    assert report.t_range.lo == report.t_min
    assert report.leading_coefficient == leading
    assert report.asymptotic_at_t_min is not None
    assert report.near_zero_agrees == (leading > 0)
    assert report.certificate.parameters["n"] == 3
    assert report.certificate.parameters["beta"] == 500.0


def test_singular_parametrization_raises(series):
    with pytest.raises(SingularParametrization):
        certify_crossing(make_B_fr(MONOATOMIC, series), MONOATOMIC, t_range=Interval(-1.5, -0.5))


def test_invalid_claimed_sign_raises(series):
    with pytest.raises(ValueError):
        certify_crossing(make_b_nl(series), MONOATOMIC, claimed_sign=0)


def _check_against_samples(report, barrier, g: GasParams, claimed_sign: int):
    """A Proved verdict matches the sampled crossing sign, a Disproved one has a witness that rechecks."""
    certificate = report.certificate
    if certificate.verdict == Verdict.PROVED:
        samples = np.linspace(report.t_range.lo, report.t_range.hi, 50)
        assert all(claimed_sign * crossing_sign_param(barrier, g, float(t)) > 0 for t in samples)
    else:
        assert certificate.verdict == Verdict.DISPROVED
        assert certificate.recheck(crossing_condition(barrier, g, claimed_sign)) == Verdict.DISPROVED
        assert report.t_range.contains_interval(certificate.witness.box.dims[0])


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "b_nr_3_inside_the_window": {"n": 3, "r": 1.13},
            "b_nr_4_below_the_upper_resonance": {"n": 4, "r": (43 - 5 * math.sqrt(43)) / 9 - 1e-3},
        }
    )
)
def test_crossing_along_b_nr_is_settled(n: int, r: float):
    g = GasParams(gamma=Fraction(5, 3), r=r)
    barrier = make_b_nr(taylor_at_Ps(g, 8), n, 500.0)
    t_range = Interval(1e-2, 1e-1)
    claimed_sign = int(math.copysign(1, crossing_sign_param(barrier, g, t_range.mid)))
    report = certify_crossing(barrier, g, t_range=t_range, claimed_sign=claimed_sign, tol=1e-8)

    assert report.t_min is None
    assert report.certificate.parameters["n"] == n
    _check_against_samples(report, barrier, g, claimed_sign)


def test_crossing_along_B_fr_is_settled(series):
    parametrized = make_B_fr(MONOATOMIC, series).parametrization()
    start, end = parametrized.t_domain
    span = end - start
    t_range = Interval(start + 0.1 * span, end - 0.1 * span)
    claimed_sign = int(math.copysign(1, crossing_sign_param(parametrized, MONOATOMIC, t_range.mid)))
    report = certify_crossing(
        make_B_fr(MONOATOMIC, series), MONOATOMIC, t_range=t_range, claimed_sign=claimed_sign, tol=1e-8
    )

    assert report.certificate.condition_id.endswith("P[B_fr]")
    _check_against_samples(report, parametrized, MONOATOMIC, claimed_sign)
