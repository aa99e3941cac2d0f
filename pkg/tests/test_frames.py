"""Clarke transforms and balanced three-phase sets."""
import math

import numpy as np
import pytest

from flatgrid.frames import balanced_set, clarke_forward, clarke_inverse, phase_peak, space_vector
from flatgrid.models import ThreePhase

_RNG = np.random.default_rng(7)


def _zero_sum(scale=100.0):
    a, b = _RNG.uniform(-scale, scale, 2)
    return ThreePhase(a, b, -a - b)


def test_zero_sequence_cancels():
    assert clarke_forward(ThreePhase(1.0, 1.0, 1.0)) == pytest.approx(0j, abs=1e-15)


def test_forward_nominal_grid_voltage():
    x = clarke_forward(ThreePhase(326.6, -163.3, -163.3))
    assert x.real == pytest.approx(400.0, abs=0.01)
    assert x.imag == pytest.approx(0.0, abs=1e-12)


def test_forward_unit_phase_a():
    assert clarke_forward(ThreePhase(1.0, 0.0, 0.0)) == pytest.approx(math.sqrt(2.0 / 3.0))


def test_inverse_of_zero():
    assert tuple(clarke_inverse(0j)) == (0.0, 0.0, 0.0)


def test_inverse_nominal_grid_voltage():
    a, b, c = clarke_inverse(clarke_forward(ThreePhase(326.6, -163.3, -163.3)))
    assert (a, b, c) == pytest.approx((326.6, -163.3, -163.3), rel=1e-12)


def test_inverse_is_zero_sum():
    for _ in range(50):
        x = complex(*_RNG.uniform(-500, 500, 2))
        assert clarke_inverse(x).total() == pytest.approx(0.0, abs=1e-9)


def test_round_trip_on_zero_sum_triples():
    for _ in range(100):
        t = _zero_sum()
        back = clarke_inverse(clarke_forward(t))
        assert tuple(back) == pytest.approx(tuple(t), rel=1e-12, abs=1e-12)


def test_power_invariance():
    """v_a i_a + v_b i_b + v_c i_c equals Re{v i*} for zero-sum triples."""
    for _ in range(100):
        v, i = _zero_sum(400.0), _zero_sum(20.0)
        p_abc = v.a * i.a + v.b * i.b + v.c * i.c
        p_ab = (clarke_forward(v) * clarke_forward(i).conjugate()).real
        assert p_ab == pytest.approx(p_abc, rel=1e-12, abs=1e-9)


def test_linearity():
    x, y = _zero_sum(), _zero_sum()
    combined = ThreePhase(*(2.5 * p - 0.75 * q for p, q in zip(x, y)))
    assert clarke_forward(combined) == pytest.approx(2.5 * clarke_forward(x) - 0.75 * clarke_forward(y))


def test_balanced_set_at_zero_angle():
    assert tuple(balanced_set(1.0, 0.0)) == pytest.approx((1.0, -0.5, -0.5))


def test_balanced_set_zero_peak():
    assert tuple(balanced_set(0.0, 1.234)) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_balanced_set_rejects_negative_peak():
    with pytest.raises(ValueError):
        balanced_set(-1.0, 0.0)


def test_balanced_grid_maps_to_rotating_vector():
    omega = 2 * math.pi * 50
    for t in np.linspace(0.0, 0.02, 17):
        x = clarke_forward(balanced_set(326.6, omega * t))
        assert abs(x) == pytest.approx(400.0, abs=0.01)
        assert x == pytest.approx(space_vector(326.6, omega * t), rel=1e-12)


def test_phase_peak_of_nominal_current():
    assert phase_peak(20.0 + 0j) == pytest.approx(16.33, abs=0.01)
