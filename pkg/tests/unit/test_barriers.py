from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from implosion_libs.barriers import (
    BarrierSide,
    NoBarrierIntersection,
    NoCrossing,
    ParamBarrier,
    _find_roots,
    asymptotic_P_nr,
    b_nr_t_max,
    barrier_intersection,
    barrier_to_dict,
    crossing_polynomial,
    crossing_sign_param,
    dz_along_bnr4,
    dz_crossing_bnr4,
    enclose_point,
    leading_coefficient_P_nr,
    make_b_fl,
    make_B_fr,
    make_b_nl,
    make_b_nr,
    sample_barrier,
    validity_time,
)
from implosion_libs.common import UtilsForTesting
from implosion_libs.euler_selfsim import GasParams, PhasePoint, find_Po, po_data
from implosion_libs.interval_core import Interval
from implosion_libs.taylor_engine import taylor_at_Ps

MONOATOMIC = GasParams(gamma=Fraction(5, 3), r=1.13)


@pytest.fixture(scope="module")
def series():
    return taylor_at_Ps(MONOATOMIC, 8)


def _line(start: tuple[float, float], direction: tuple[float, float], label: str) -> ParamBarrier:
    return ParamBarrier(
        W_poly=(Fraction(start[0]), Fraction(direction[0])),
        Z_poly=(Fraction(start[1]), Fraction(direction[1])),
        t_domain=(0.0, 1.0),
        side=BarrierSide.LEFT,
        label=label,
    )


def _assert_encloses(enclosure: Interval, value: float):
    slack = 1e-12 * max(1.0, abs(value))
    assert enclosure.lo - slack <= value <= enclosure.hi + slack


def test_b_nl_is_the_cubic_truncation(series):
    barrier = make_b_nl(series)

    assert barrier.side == BarrierSide.LEFT
    assert barrier.point(0.0) == series.Ps
    for index in range(4):
        assert barrier.W_poly[index] == Fraction(series.W_coeffs[index]) / math.factorial(index)
        assert barrier.Z_poly[index] == Fraction(series.Z_coeffs[index]) / math.factorial(index)


def test_b_nl_needs_a_cubic_series(series):
    with pytest.raises(ValueError):
        make_b_nl(series.truncated(2))


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "third_order": {"n": 3},
            "fourth_order": {"n": 4},
        }
    )
)
def test_b_nr_adds_the_beta_term_to_z(series, n: int):
    beta = 500.0
    barrier = make_b_nr(series, n, beta)

    assert barrier.W_poly[1] == -Fraction(series.W_coeffs[1])
    assert len(barrier.W_poly) == n + 1
    assert barrier.Z_poly[n + 1] == -Fraction(beta) * abs(Fraction(series.Z_coeffs[n])) / math.factorial(n + 1)
    assert barrier.t_max == b_nr_t_max(series.k_at_r, n, beta)
    assert (barrier.n, barrier.beta) == (n, beta)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "unsupported_order": {"n": 5, "beta": 500.0},
            "non_positive_beta": {"n": 3, "beta": 0.0},
        }
    )
)
def test_b_nr_invalid_arguments_raise(series, beta: float, n: int):
    with pytest.raises(ValueError):
        make_b_nr(series, n, beta)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "square_root": {"k": 3.5, "n": 3, "c": 1.0, "expected": 2 * math.sqrt(0.5)},
            "cube_root": {"k": 4.5, "n": 4, "c": 2.0, "expected": 4 * 0.5 ** (1 / 3)},
        }
    )
)
def test_b_nr_t_max(c: float, expected: float, k: float, n: int):
    assert b_nr_t_max(k, n, 2.0, c) == pytest.approx(expected, rel=1e-14)


def test_b_fl_joins_the_sonic_point_to_po(series):
    barrier = make_b_fl(MONOATOMIC, series)
    Po = find_Po(MONOATOMIC)
    v_W, v_Z = po_data(MONOATOMIC).dominant_direction
    tangent_W, tangent_Z = barrier.tangent(1.0)

    assert barrier.point(0.0) == series.Ps
    assert barrier.point(1.0).W == pytest.approx(Po.W, abs=1e-12)
    assert barrier.point(1.0).Z == pytest.approx(Po.Z, abs=1e-12)
    assert abs(tangent_W * v_Z - tangent_Z * v_W) < 1e-9 * math.hypot(tangent_W, tangent_Z)


def test_B_fr_goes_through_the_sonic_point_and_its_far_anchor(series):
    barrier = make_B_fr(MONOATOMIC, series)
    sonic_point, far = series.Ps, barrier.far_anchor

    assert barrier.F0 == pytest.approx(-0.26, abs=1e-14)
    assert barrier(sonic_point.W, sonic_point.Z) == pytest.approx(0, abs=1e-14)
    assert barrier(far.W, far.Z) == pytest.approx(0, abs=1e-9)
    # far anchor on the line joining P_s with the origin
    assert far.W * sonic_point.Z - far.Z * sonic_point.W == pytest.approx(0, abs=1e-12)


def test_B_fr_parametrization_stays_on_the_nullset(series):
    barrier = make_B_fr(MONOATOMIC, series)
    curve = barrier.parametrization()
    start = curve.point(barrier.tangent_slope)

    assert curve.side == BarrierSide.RIGHT
    assert start.W == pytest.approx(series.Ps.W, abs=1e-12)
    assert start.Z == pytest.approx(series.Ps.Z, abs=1e-12)
    for t in np.linspace(curve.t_domain[0], curve.t_domain[1], 9):
        point = curve.point(float(t))
        assert barrier(point.W, point.Z) == pytest.approx(0, abs=1e-9)


def test_interval_crossing_sign_encloses_point_values(series):
    barrier = make_b_nl(series)
    box = Interval(0.1, 0.3)
    enclosure = crossing_sign_param(barrier, MONOATOMIC, box)

    for t in np.linspace(box.lo, box.hi, 11):
        _assert_encloses(enclosure, crossing_sign_param(barrier, MONOATOMIC, float(t)))


def test_interval_crossing_sign_of_a_rational_barrier_encloses_point_values(series):
    curve = make_B_fr(MONOATOMIC, series).parametrization()
    box = Interval(0.2, 0.4)
    enclosure = crossing_sign_param(curve, MONOATOMIC, box)

    for t in np.linspace(box.lo, box.hi, 11):
        _assert_encloses(enclosure, crossing_sign_param(curve, MONOATOMIC, float(t)))


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "third_order": {"n": 3},
            "fourth_order": {"n": 4},
        }
    )
)
def test_leading_coefficient_matches_the_crossing_polynomial(series, n: int):
    beta = 500.0
    coeffs = crossing_polynomial(make_b_nr(series, n, beta), MONOATOMIC)
    leading = leading_coefficient_P_nr(n, beta, series, MONOATOMIC)

    assert leading != 0
    assert coeffs[n + 1].mid == pytest.approx(leading, rel=1e-6)
    for coeff in coeffs[: n + 1]:
        assert abs(coeff.mid) < 1e-8 * abs(leading)


def test_leading_coefficient_needs_one_more_order(series):
    with pytest.raises(ValueError):
        leading_coefficient_P_nr(3, 500.0, series.truncated(3), MONOATOMIC)


def test_dz_along_bnr4_starts_on_the_sonic_line(series):
    at_start, leading_at_start = dz_along_bnr4(series, MONOATOMIC, 0.0)
    value, leading = dz_along_bnr4(series, MONOATOMIC, 1e-6)

    assert at_start == pytest.approx(0, abs=1e-14)
    assert leading_at_start == 0
    assert value / leading == pytest.approx(1, abs=1e-4)


def test_barrier_to_dict_keeps_exact_coefficients(series):
    barrier = make_b_nl(series)
    descriptor = barrier_to_dict(barrier, MONOATOMIC)

    assert descriptor["kind"] == "parametric"
    assert descriptor["side"] == "left-of-Ps"
    assert descriptor["gamma"] == "5/3"
    assert [Fraction(coeff) for coeff in descriptor["W_poly"]] == list(barrier.W_poly)
    assert descriptor["Z_poly_float"][0] == series.Z_coeffs[0]


def test_barrier_to_dict_of_implicit_barrier(series):
    descriptor = barrier_to_dict(make_B_fr(MONOATOMIC, series), MONOATOMIC)

    assert descriptor["kind"] == "implicit"
    assert descriptor["label"] == "B_fr"
    assert descriptor["Ps"] == [series.Ps.W, series.Ps.Z]


def test_sample_barrier(series):
    rows = sample_barrier(make_b_nl(series), count=11)

    assert len(rows) == 11
    assert rows[0] == (0.0, series.Ps.W, series.Ps.Z)
    assert rows[-1][0] == 1.0


def test_enclose_point_contains_the_curve(series):
    barrier = make_b_fl(MONOATOMIC, series)
    W, Z = enclose_point(barrier, Interval(0.4, 0.6))

    for t in np.linspace(0.4, 0.6, 5):
        point = barrier.point(float(t))
        _assert_encloses(W, point.W)
        _assert_encloses(Z, point.Z)


def test_crossing_lines_intersect():
    intersection = barrier_intersection(_line((0.0, 0.0), (1.0, 0.0), "flat"), _line((0.5, -0.5), (0.0, 1.0), "up"))

    assert intersection.t == pytest.approx(0.5, abs=1e-8)
    assert intersection.other_t == pytest.approx(0.5, abs=1e-6)
    assert intersection.point.W == pytest.approx(0.5, abs=1e-8)


def test_parallel_lines_dont_intersect():
    with pytest.raises(NoBarrierIntersection):
        barrier_intersection(_line((0.0, 0.0), (1.0, 0.0), "low"), _line((0.0, 1.0), (1.0, 0.0), "high"))


def test_barrier_meeting_itself_returns_the_start(series):
    barrier = make_b_nl(series)
    intersection = barrier_intersection(barrier, barrier)

    assert intersection.t == 0.0
    assert intersection.point == PhasePoint(W=series.Ps.W, Z=series.Ps.Z)


def test_B_fr_is_tangent_to_the_profile_at_the_sonic_point(series):
    barrier = make_B_fr(MONOATOMIC, series)
    W1, Z1 = series.W_coeffs[1], series.Z_coeffs[1]
    step = 1e-6
    along = barrier(series.Ps.W + step * W1, series.Ps.Z + step * Z1)
    across = barrier(series.Ps.W - step * Z1, series.Ps.Z + step * W1)

    assert abs(across) > 0
    assert abs(along) < 1e-3 * abs(across)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "n_3_crosses_positively": {"n": 3, "sign": 1},
            "n_4_crosses_negatively": {"n": 4, "sign": -1},
        }
    )
)
def test_asymptotic_P_nr_scales_with_the_resonant_power(series, n: int, sign: int):
    near, nearer = asymptotic_P_nr(n, 500.0, series, 1e-4), asymptotic_P_nr(n, 500.0, series, 5e-5)

    assert math.copysign(1, near) == sign
    assert near / nearer == pytest.approx(2 ** (n + 1), rel=1e-2)


def test_validity_time_of_b_nl_bounds_a_constant_crossing_sign(series):
    barrier = make_b_nl(series)
    valid_until = validity_time(barrier, MONOATOMIC)
    signs = {
        math.copysign(1, crossing_sign_param(barrier, MONOATOMIC, float(t)))
        for t in np.linspace(0.01 * valid_until, 0.99 * valid_until, 50)
    }

    assert 0 < valid_until <= barrier.t_max
    assert len(signs) == 1


def test_validity_time_stops_at_t_end(series):
    barrier = make_b_nl(series)
    valid_until = validity_time(barrier, MONOATOMIC)

    assert validity_time(barrier, MONOATOMIC, t_end=valid_until / 2) == valid_until / 2


def test_b_nr_4_stays_off_the_sonic_line_inside_the_window(series):
    # Z_3 > 0 is outweighed by the linear term and Z_4 < 0 along -t
    with pytest.raises(NoCrossing):
        dz_crossing_bnr4(series, MONOATOMIC, 500.0)


def test_b_nl_meets_a_segment_across_it(series):
    barrier = make_b_nl(series)
    point = barrier.point(0.01)
    tangent_W, tangent_Z = barrier.tangent(0.01)
    norm = math.hypot(tangent_W, tangent_Z)
    normal = (-tangent_Z / norm, tangent_W / norm)
    segment = _line((point.W - normal[0], point.Z - normal[1]), (2 * normal[0], 2 * normal[1]), "across")
    intersection = barrier_intersection(barrier, segment)

    assert intersection.t == pytest.approx(0.01, abs=1e-8)
    assert intersection.other_t == pytest.approx(0.5, abs=1e-6)


def test_find_roots_sees_two_roots_inside_one_cell():
    roots = _find_roots(lambda t: (t - 0.5002) ** 2 - 1e-8, 0.0, 1.0)

    assert roots == pytest.approx([0.5001, 0.5003], abs=1e-9)


def test_find_roots_sees_a_root_close_to_the_start():
    roots = _find_roots(lambda t: (t - 5e-6) * (t - 0.7), 0.0, 1.0)

    assert roots == pytest.approx([5e-6, 0.7], abs=1e-11)
