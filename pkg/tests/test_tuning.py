"""Pole placement for the tracking-error system."""
import itertools

import pytest

from flatgrid.errors import ConfigurationError
from flatgrid.models import ControllerGains, PoleSpec
from flatgrid.tuning import (PUBLISHED_GAINS, characteristic_polynomial, closed_loop_poles, gains_from_poles,
                             poles_from_spec, tune, verify_assignment)

FAST = PoleSpec(1e-3, 0.707)
SLOW = PoleSpec(10e-3, 0.707)


def test_repeated_unit_pole():
    gains = gains_from_poles([-1, -1, -1, -1])
    assert (gains.k3, gains.k2, gains.k1, gains.k0) == pytest.approx((4.0, 6.0, 4.0, 1.0))


def test_poles_from_settling_time():
    p, p_conj = poles_from_spec(FAST)
    assert p.real == pytest.approx(-4600.0)
    assert p.imag == pytest.approx(4601.4, abs=0.1)
    assert p_conj == p.conjugate()
    p, _ = poles_from_spec(SLOW)
    assert p.real == pytest.approx(-460.0)
    assert p.imag == pytest.approx(460.14, abs=0.01)


def test_settle_factor_scales_sigma():
    p, _ = poles_from_spec(FAST, settle_factor=4.0)
    assert p.real == pytest.approx(-4000.0)


def test_tuned_gains_match_published_design():
    gains, _, report = tune(FAST, SLOW)
    for name in ('k1', 'k2', 'k3', 'k0'):
        published = getattr(PUBLISHED_GAINS, name)
        assert getattr(gains, name) == pytest.approx(published, rel=0.015), name
    assert report.passed


def test_assignment_residuals_are_tiny(gains):
    _, pole_set, _ = tune(FAST, SLOW)
    report = verify_assignment(gains, pole_set)
    assert report.worst < 1e-9


def test_perturbed_gain_fails_assignment(gains):
    _, pole_set, _ = tune(FAST, SLOW)
    perturbed = ControllerGains(gains.k1, gains.k2, gains.k3, gains.k0 * 1.1)
    assert not verify_assignment(perturbed, pole_set).passed


def test_closed_loop_poles_recover_targets(gains):
    _, pole_set, _ = tune(FAST, SLOW)
    roots = sorted(closed_loop_poles(gains), key=lambda p: (p.real, p.imag))
    targets = sorted(pole_set.poles, key=lambda p: (p.real, p.imag))
    for root, target in zip(roots, targets):
        assert abs(root - target) < 1e-6 * abs(target)


def test_pole_order_does_not_matter():
    _, pole_set, _ = tune(FAST, SLOW)
    reference = gains_from_poles(pole_set.poles)
    for order in itertools.permutations(pole_set.poles):
        gains = gains_from_poles(order)
        assert (gains.k1, gains.k2, gains.k3, gains.k0) == pytest.approx(
            (reference.k1, reference.k2, reference.k3, reference.k0), rel=1e-12)


def test_zero_gains_are_not_hurwitz():
    gains = ControllerGains(0.0, 0.0, 0.0, 0.0)
    assert closed_loop_poles(gains) == [0j, 0j, 0j, 0j]
    assert not gains.validate()[0]


def test_unpaired_complex_pole_rejected():
    with pytest.raises(ConfigurationError, match='conjugate'):
        gains_from_poles([-1 + 1j, -1 + 1j, -2, -3])


def test_unstable_pole_rejected():
    with pytest.raises(ConfigurationError):
        gains_from_poles([1.0, -1.0, -2.0, -3.0])


def test_wrong_pole_count_rejected():
    with pytest.raises(ConfigurationError):
        gains_from_poles([-1.0, -2.0])


@pytest.mark.parametrize('zeta', [0.0, 1.0, 1.5, -0.3])
def test_damping_outside_open_interval_rejected(zeta):
    with pytest.raises(ConfigurationError):
        poles_from_spec(PoleSpec(1e-3, zeta))


def test_non_positive_settling_time_rejected():
    with pytest.raises(ConfigurationError):
        tune(PoleSpec(0.0, 0.707), SLOW)


def test_identical_pole_pairs_square_the_quadratic():
    spec = PoleSpec(4.6, 0.707)
    gains, pole_set, report = tune(spec, spec)
    a, b = 2.0, 1.0 / 0.707 ** 2
    assert (gains.k3, gains.k2, gains.k1, gains.k0) == pytest.approx((2 * a, a * a + 2 * b, 2 * a * b, b * b))
    assert report.passed


def test_characteristic_polynomial_orders_highest_power_first(gains):
    coefficients = characteristic_polynomial(gains)
    assert list(coefficients) == [1.0, gains.k3, gains.k2, gains.k1, gains.k0]


def test_zero_gains_leave_scaled_residual_of_one():
    zero = ControllerGains(0.0, 0.0, 0.0, 0.0)
    _, pole_set, _ = tune(FAST, SLOW)
    report = verify_assignment(zero, pole_set)
    assert report.residuals == pytest.approx((1.0, 1.0, 1.0, 1.0), rel=1e-9)
    assert not report.passed
    small = verify_assignment(zero, [-0.5 + 0.5j])
    assert small.residuals[0] == pytest.approx(abs(-0.5 + 0.5j) ** 4, rel=1e-12)
