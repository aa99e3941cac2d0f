"""Exponential reference profiles and scenario schedules."""
import math

import pytest

from flatgrid.errors import ConfigurationError
from flatgrid.models import (DC_REF, GRID_MAGNITUDE, INPUT_POWER, REACTIVE_REF, Scenario,
                             ScenarioEvent)
from flatgrid.trajectory import (DC_REF_SHAPE_ORDER, align_to_step, compile_schedule, exp_transition,
                                 exp_transition_integral, grid_magnitude_at, make_scenario, reference_at,
                                 settle_multiple, weak_grid_scenario)

TAU = 0.010 / 4.6
RATED = 8000.0 / math.sqrt(2.0)


def test_transition_starts_at_from_value():
    value, d1, d2, d3 = exp_transition(0.01, 0.01, 100.0, 200.0, 0.002)
    assert value == 100.0
    assert d1 == pytest.approx(100.0 / 0.002)
    assert d2 == pytest.approx(-100.0 / 0.002 ** 2)
    assert d3 == pytest.approx(100.0 / 0.002 ** 3)


def test_transition_after_one_time_constant():
    value, _, _, _ = exp_transition(0.012, 0.01, 100.0, 200.0, 0.002)
    assert value == pytest.approx(100.0 + 0.6321 * 100.0, abs=0.01)


def test_transition_asymptote():
    assert exp_transition(10.0, 0.0, 1.0, 3.0, 0.001) == pytest.approx((3.0, 0.0, 0.0, 0.0))


def test_transition_before_start_holds_from_value():
    assert exp_transition(0.0, 0.01, 5.0, 7.0, 0.001) == (5.0, 0.0, 0.0, 0.0)


def test_transition_rejects_non_positive_tau():
    with pytest.raises(ValueError):
        exp_transition(0.0, 0.0, 0.0, 1.0, 0.0)


def test_transition_never_overshoots():
    for k in range(200):
        value, _, _, _ = exp_transition(k * 1e-4, 0.0, 750.0, 735.0, TAU)
        assert 735.0 <= value <= 750.0


def test_derivatives_match_finite_differences():
    h = 1e-7
    for t in (0.0105, 0.012, 0.016, 0.019):
        f = [exp_transition(t + k * h, 0.01, 0.0, RATED, TAU)[0] for k in (-2, -1, 0, 1, 2)]
        value, d1, d2, _ = exp_transition(t, 0.01, 0.0, RATED, TAU)
        fd1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        fd2 = (f[1] - 2 * f[2] + f[3]) / h ** 2
        assert fd1 == pytest.approx(d1, rel=1e-6)
        assert fd2 == pytest.approx(d2, rel=1e-4)


def test_empty_scenario_is_constant():
    r = reference_at(0.05, Scenario(v_ref0=735.0))
    assert r.v_ref == 735.0
    assert (r.v_ref_d1, r.v_ref_d2, r.v_ref_d3) == (0.0, 0.0, 0.0)
    assert (r.q_ref, r.q_ref_int, r.p_i, r.p_i_d1, r.p_i_d2) == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_input_power_mid_ramp(scenario):
    r = reference_at(0.015, scenario)
    assert r.p_i == pytest.approx(RATED * (1.0 - math.exp(-0.005 / TAU)), rel=1e-12)
    assert r.p_i_d1 == pytest.approx(RATED * math.exp(-0.005 / TAU) / TAU, rel=1e-12)


def test_dc_reference_reaches_target(scenario):
    assert reference_at(0.060, scenario).v_ref == pytest.approx(750.0, abs=1e-6)
    assert reference_at(0.030, scenario).v_ref == pytest.approx(735.0 + 0.99 * 15.0, abs=0.01)


def test_reactive_integral_grows_by_rectangle(scenario):
    """With q_ref settled at rated var, 10 ms adds rated * 0.01 to its integral."""
    start = reference_at(0.100, scenario).q_ref_int
    end = reference_at(0.110, scenario).q_ref_int
    assert end - start == pytest.approx(RATED * 0.010, rel=1e-6)
    assert RATED * 0.010 == pytest.approx(56.57, abs=0.01)


def test_reactive_integral_is_continuous(scenario):
    eps = 1e-9
    for t in (0.070, 0.220):
        before = reference_at(t - eps, scenario).q_ref_int
        after = reference_at(t + eps, scenario).q_ref_int
        assert after == pytest.approx(before, abs=1e-4)


def test_reactive_integral_derivative_is_reference(scenario):
    h = 1e-7
    for t in (0.075, 0.090, 0.225):
        fd = (reference_at(t + h, scenario).q_ref_int - reference_at(t - h, scenario).q_ref_int) / (2 * h)
        assert fd == pytest.approx(reference_at(t, scenario).q_ref, rel=1e-6)


def test_grid_magnitude_schedule(scenario):
    assert grid_magnitude_at(0.005, scenario) == 1.0
    assert grid_magnitude_at(0.130, scenario) == 0.8
    assert grid_magnitude_at(0.170, scenario) == 1.2
    assert grid_magnitude_at(0.250, scenario) == 1.0


def test_ramp_down_starts_from_current_value():
    events = [ScenarioEvent(0.0, INPUT_POWER, 1000.0, 0.010), ScenarioEvent(0.010, INPUT_POWER, 0.0, 0.010)]
    scenario = make_scenario(events)
    expected = 1000.0 * (1.0 - math.exp(-4.6))
    assert reference_at(0.010, scenario).p_i == pytest.approx(expected, rel=1e-12)


def test_overlapping_transitions_rejected():
    events = [ScenarioEvent(0.010, DC_REF, 750.0, 0.010), ScenarioEvent(0.015, DC_REF, 760.0, 0.010)]
    with pytest.raises(ConfigurationError):
        reference_at(0.02, make_scenario(events))


def test_transitions_of_different_kinds_may_overlap():
    events = [ScenarioEvent(0.010, DC_REF, 750.0, 0.010), ScenarioEvent(0.012, REACTIVE_REF, 100.0, 0.010)]
    r = reference_at(0.015, make_scenario(events))
    assert 735.0 < r.v_ref < 750.0
    assert 0.0 < r.q_ref < 100.0


def test_grid_events_must_be_steps():
    with pytest.raises(ConfigurationError):
        reference_at(0.0, make_scenario([ScenarioEvent(0.1, GRID_MAGNITUDE, 0.8, 0.001)]))


def test_unknown_kind_rejected():
    with pytest.raises(ConfigurationError):
        reference_at(0.0, Scenario(events=(ScenarioEvent(0.1, 'frequency', 1.0),)))


def test_events_sorted_by_time():
    scenario = make_scenario([ScenarioEvent(0.2, GRID_MAGNITUDE, 1.0), ScenarioEvent(0.1, GRID_MAGNITUDE, 0.8)])
    assert [e.time for e in scenario.events] == [0.1, 0.2]


def test_align_to_step_rounds_event_times():
    scenario = make_scenario([ScenarioEvent(0.0100004, INPUT_POWER, 100.0, 0.01)])
    aligned = align_to_step(scenario, 1e-6)
    assert aligned.events[0].time == pytest.approx(0.010, abs=1e-15)
    assert aligned.events[0].window == 0.01


def test_segment_time_pins_the_active_segment(scenario):
    schedule = compile_schedule(scenario)
    r = schedule.reference(0.010, segment_time=0.0099995)
    assert r.p_i == 0.0 and r.p_i_d1 == 0.0
    assert schedule.reference(0.010).p_i_d1 == pytest.approx(RATED / TAU)


def test_weak_grid_scenario_timeline():
    scenario = weak_grid_scenario()
    assert scenario.v_ref0 == 735.0
    assert scenario.event_times() == [0.010, 0.020, 0.070, 0.120, 0.160, 0.200, 0.220, 0.240]
    assert [e.target for e in scenario.events_of(GRID_MAGNITUDE)] == [0.8, 1.2, 1.0]
    assert scenario.events_of(INPUT_POWER)[0].target == pytest.approx(5656.85, abs=0.01)


def test_third_order_transition_starts_flat():
    value, d1, d2, d3 = exp_transition(0.01, 0.01, 100.0, 200.0, 0.002, order=3)
    assert value == 100.0
    assert (d1, d2) == (0.0, 0.0)
    assert d3 == pytest.approx(100.0 / 0.002 ** 3)


def test_third_order_derivatives_match_finite_differences():
    tau = 0.010 / settle_multiple(4.6, 3)
    h = 1e-7
    for t in (0.0105, 0.012, 0.016, 0.019):
        f = [exp_transition(t + k * h, 0.01, 735.0, 750.0, tau, order=3) for k in (-2, -1, 0, 1, 2)]
        _, d1, d2, d3 = f[2]
        fd1 = (f[0][0] - 8 * f[1][0] + 8 * f[3][0] - f[4][0]) / (12 * h)
        fd2 = (f[0][1] - 8 * f[1][1] + 8 * f[3][1] - f[4][1]) / (12 * h)
        fd3 = (f[0][2] - 8 * f[1][2] + 8 * f[3][2] - f[4][2]) / (12 * h)
        assert fd1 == pytest.approx(d1, rel=1e-6)
        assert fd2 == pytest.approx(d2, rel=1e-6, abs=1e-3)
        assert fd3 == pytest.approx(d3, rel=1e-6, abs=1.0)


def test_third_order_transition_is_monotone():
    tau = 0.010 / settle_multiple(4.6, 3)
    values = [exp_transition(k * 1e-4, 0.0, 750.0, 735.0, tau, order=3)[0] for k in range(300)]
    assert all(735.0 <= v <= 750.0 for v in values)
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_settle_multiple_keeps_the_residual_fraction():
    assert settle_multiple(4.6) == 4.6
    x = settle_multiple(4.6, 3)
    assert (1.0 + x + x * x / 2.0) * math.exp(-x) == pytest.approx(math.exp(-4.6), rel=1e-9)
    assert x == pytest.approx(8.40, abs=0.01)


@pytest.mark.parametrize('order', [1, 2, 3])
def test_transition_integral_derivative_is_value(order):
    h = 1e-7
    for elapsed in (0.0005, 0.002, 0.008):
        fd = (exp_transition_integral(elapsed + h, 10.0, 30.0, 0.002, order)
              - exp_transition_integral(elapsed - h, 10.0, 30.0, 0.002, order)) / (2 * h)
        assert fd == pytest.approx(exp_transition(elapsed, 0.0, 10.0, 30.0, 0.002, order)[0], rel=1e-6)
    assert exp_transition_integral(0.0, 10.0, 30.0, 0.002, order) == 0.0


def test_transition_rejects_bad_order():
    with pytest.raises(ValueError):
        exp_transition(0.0, 0.0, 0.0, 1.0, 0.001, order=0)


def test_dc_reference_slope_is_continuous_at_the_step(scenario):
    before = reference_at(0.020 - 1e-9, scenario)
    at = reference_at(0.020, scenario)
    assert DC_REF_SHAPE_ORDER == 3
    assert (at.v_ref, at.v_ref_d1, at.v_ref_d2) == (735.0, 0.0, 0.0)
    assert (before.v_ref_d1, before.v_ref_d2) == (0.0, 0.0)
    assert at.v_ref_d3 > 0.0
    assert reference_at(0.0201, scenario).v_ref_d1 == pytest.approx(at.v_ref_d3 * 0.0001 ** 2 / 2, rel=0.1)
