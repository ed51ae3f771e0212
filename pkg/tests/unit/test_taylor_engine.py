from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from implosion_libs.common import UtilsForTesting
from implosion_libs.euler_selfsim import GasParams, field_forms, find_Ps, r_of_k, sonic_data
from implosion_libs.taylor_engine import (
    OrderExceeded,
    ResonanceSingular,
    coefficient_sweep,
    compose_coeffs,
    evaluate_series,
    first_order,
    recurrence_step,
    series_residual,
    series_rows,
    sweep_rows,
    taylor_at_Ps,
)

MONOATOMIC = GasParams(gamma=Fraction(5, 3), r=1.13)
R_2 = 11 - math.sqrt(99)
R_3 = 6 - 2 * math.sqrt(6)
R_4 = (43 - 5 * math.sqrt(43)) / 9


@pytest.fixture(scope="module")
def series():
    return taylor_at_Ps(MONOATOMIC, 8)


def test_series_starts_at_the_sonic_point(series):
    sonic_point = find_Ps(MONOATOMIC)

    assert series.Ps == sonic_point
    assert evaluate_series(series, 0.0) == sonic_point
    assert series.order == 8
    assert not series.warnings


def test_first_order_values(series):
    assert series.W_coeffs[1] == pytest.approx(2.11476, abs=1e-4)
    assert series.Z_coeffs[1] == pytest.approx(-0.51726, abs=1e-4)
    assert first_order(MONOATOMIC) == (series.W_coeffs[1], series.Z_coeffs[1])


def test_first_order_is_aligned_with_the_slow_direction(series):
    nu_w, nu_z = sonic_data(MONOATOMIC).nu_minus
    W1, Z1 = series.W_coeffs[1], series.Z_coeffs[1]

    assert abs(W1 * nu_z - Z1 * nu_w) / math.hypot(W1, Z1) < 1e-9


def test_recurrence_step_reproduces_the_series(series):
    for order in range(2, 6):
        W_n, Z_n = recurrence_step(series.truncated(order - 1), order, MONOATOMIC)
        assert W_n == pytest.approx(series.W_coeffs[order], rel=1e-12)
        assert Z_n == pytest.approx(series.Z_coeffs[order], rel=1e-12)


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "order_4": {"order": 4},
            "order_6": {"order": 6},
        }
    )
)
def test_residual_decays_with_the_truncation_order(order: int):
    truncated = taylor_at_Ps(MONOATOMIC, order)
    step = 0.05
    ratio = series_residual(truncated, MONOATOMIC, -step) / series_residual(truncated, MONOATOMIC, -step / 2)

    assert 2 ** (order - 1) < ratio < 2 ** (order + 2)


def test_compose_at_order_zero(series):
    sonic_point = series.Ps
    forms = field_forms(MONOATOMIC)

    assert compose_coeffs(series, "D_Z", 0) == pytest.approx(0, abs=1e-14)
    assert compose_coeffs(series, "N_W", 0) == pytest.approx(forms.N_W(sonic_point.W, sonic_point.Z), rel=1e-14)


def test_compose_first_order_is_the_chain_rule(series):
    sonic_point = series.Ps
    D_W = field_forms(MONOATOMIC).D_W
    expected = D_W.d_W(sonic_point.W, sonic_point.Z) * series.W_coeffs[1] + D_W.d_Z(
        sonic_point.W, sonic_point.Z
    ) * series.Z_coeffs[1]

    assert compose_coeffs(series, "D_W", 1) == pytest.approx(expected, rel=1e-14)


def test_compose_beyond_the_order_raises(series):
    with pytest.raises(OrderExceeded):
        compose_coeffs(series, "N_Z", 9)


def test_truncated_beyond_the_order_raises(series):
    with pytest.raises(OrderExceeded):
        series.truncated(9)


def test_normalized_divides_by_factorials(series):
    W_normalized, Z_normalized = series.normalized()

    assert W_normalized[3] == series.W_coeffs[3] / 6
    assert Z_normalized[4] == series.Z_coeffs[4] / 24


def test_third_coefficient_changes_sign_across_r_3():
    below = taylor_at_Ps(MONOATOMIC.with_r(R_3 - 1e-4), 3)
    above = taylor_at_Ps(MONOATOMIC.with_r(R_3 + 1e-4), 3)

    assert below.Z_coeffs[3] * above.Z_coeffs[3] < 0
    assert min(abs(below.Z_coeffs[3]), abs(above.Z_coeffs[3])) > 10 * abs(taylor_at_Ps(MONOATOMIC, 3).Z_coeffs[3])


def test_resonant_order_raises_with_the_order():
    with pytest.raises(ResonanceSingular) as error:
        taylor_at_Ps(MONOATOMIC.with_r(r_of_k(3, Fraction(5, 3))), 5)

    assert error.value.order == 3
    assert error.value.k == pytest.approx(3)


def test_allow_resonant_truncates_with_a_warning():
    series = taylor_at_Ps(MONOATOMIC.with_r(R_3), 5, allow_resonant=True)

    assert series.order == 2
    assert any("resonant" in warning for warning in series.warnings)


def test_coefficient_sweep_flags_resonant_rows():
    rows = coefficient_sweep(Fraction(5, 3), [1.04, R_3, 1.12], 4)

    assert [row.flag for row in rows] == ["", "ResonanceSingular", ""]
    assert all(math.isnan(value) for value in rows[1].W_coeffs)
    assert rows[2].W_coeffs == taylor_at_Ps(MONOATOMIC.with_r(1.12), 4).W_coeffs


def test_export_rows(series):
    header, rows = sweep_rows(coefficient_sweep(Fraction(5, 3), [1.12], 2))

    assert header == ["r", "k", "W_0", "W_1", "W_2", "Z_0", "Z_1", "Z_2", "flag"]
    assert len(rows[0]) == len(header)
    assert series_rows(series.truncated(4))[4] == (4, series.W_coeffs[4], series.Z_coeffs[4])


def test_higher_order_values(series):
    assert series.W_coeffs[2] == pytest.approx(-10.534, rel=1e-3)
    assert series.Z_coeffs[2] == pytest.approx(2.6997, rel=1e-3)
    assert series.W_coeffs[3] == pytest.approx(169.5, rel=1e-2)
    assert series.Z_coeffs[3] == pytest.approx(-148.9, rel=1e-2)


def test_resonant_coefficients_bend_z_down_inside_the_window(series):
    # third and fourth order are both negative between r_3 and r_4, this fixes which sonic line each branch meets
    assert series.Z_coeffs[3] < 0
    assert series.Z_coeffs[4] < -1e4
    assert taylor_at_Ps(MONOATOMIC.with_r(R_3 + 1e-3), 3).Z_coeffs[3] < 0
    assert taylor_at_Ps(MONOATOMIC.with_r(R_4 - 1e-3), 4).Z_coeffs[4] < 0


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "order_4_left": {"order": 4, "sign": 1},
            "order_4_right": {"order": 4, "sign": -1},
            "order_8_left": {"order": 8, "sign": 1},
            "order_8_right": {"order": 8, "sign": -1},
        }
    )
)
def test_residual_scales_with_the_truncation_order_close_to_the_sonic_point(order: int, sign: int):
    truncated = taylor_at_Ps(MONOATOMIC, order)
    step = sign * 2e-3
    ratio = series_residual(truncated, MONOATOMIC, step) / series_residual(truncated, MONOATOMIC, step / 2)

    assert 2 ** (order - 1) < ratio < 2 ** (order + 2)


def test_residual_drops_with_the_order():
    residuals = [series_residual(taylor_at_Ps(MONOATOMIC, order), MONOATOMIC, 1e-3) for order in (4, 8, 16)]

    assert residuals[0] > residuals[1] > residuals[2]
    assert residuals[2] < 1e-12


@pytest.mark.parametrize(
    **UtilsForTesting.to_parametrize(
        test_cases={
            "second_order_at_r_2": {"order": 2, "resonant_r": R_2},
            "third_order_at_r_3": {"order": 3, "resonant_r": R_3},
            "fourth_order_at_r_4": {"order": 4, "resonant_r": R_4},
        }
    )
)
def test_coefficient_sweep_has_a_sign_changing_pole_at_each_resonance(order: int, resonant_r: float):
    r_values = np.linspace(1.04, 1.14, 400)
    rows = coefficient_sweep(Fraction(5, 3), r_values, 4)
    Z_n = np.array([row.Z_coeffs[order] for row in rows])
    above = int(np.searchsorted(r_values, resonant_r))

    assert not any(row.flag for row in rows)
    assert Z_n[above - 1] * Z_n[above] < 0
    assert min(abs(Z_n[above - 1]), abs(Z_n[above])) > 10 * np.median(np.abs(Z_n))
