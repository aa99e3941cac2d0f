"""Scenario timelines and exponentially shaped reference profiles.

Each profile (input power, DC-link voltage reference, reactive-power
reference, grid magnitude) is piecewise: a constant initial value followed by
one segment per event. A segment starts from the value the profile has at the
event instant and approaches the event target exponentially. Input power and
the reactive-power reference use a first-order exponential, so their slopes
may jump. The DC-link reference uses a critically damped third-order
exponential: value, slope and curvature are continuous, which keeps xi2_r and
xi3_r continuous and leaves the jump in xi3_r_dot alone.
"""
import bisect
import logging
import math
from functools import lru_cache

from scipy.optimize import brentq
from scipy.special import gammaincc

from flatgrid.errors import ConfigurationError
from flatgrid.models import (DC_REF, EVENT_KINDS, GRID_MAGNITUDE, INPUT_POWER, REACTIVE_REF,
                             ReferenceFrame, Scenario, ScenarioEvent)

logger = logging.getLogger(__name__)

# Window -> time constant: 99% completion inside the window
DEFAULT_WINDOW_SETTLE_FACTOR = 4.6

# Number of chained first-order lags per shaped profile
DC_REF_SHAPE_ORDER = 3
SHAPE_ORDER = 1

# Back-to-back transitions may touch after step alignment rounding
_TIME_EPS = 1e-12


def _validate_shape(tau, order):
    if not tau > 0:
        raise ValueError(f'Time constant must be strictly positive, got {tau}')
    if int(order) != order or order < 1:
        raise ValueError(f'Shape order must be a positive integer, got {order}')


def exp_transition(t, t0, from_value, to_value, tau, order=1):
    """Exponential transition and its first three derivatives.

    order = 1 is the plain first-order exponential. Higher orders chain that
    many identical first-order lags, so the first order - 1 derivatives start
    from zero and the transition stays monotone.

    Returns:
        tuple: (value, d1, d2, d3)
    """
    _validate_shape(tau, order)
    if t < t0:
        return from_value, 0.0, 0.0, 0.0
    x = (t - t0) / tau
    terms = [x ** k / math.factorial(k) for k in range(order)]

    def term(k):
        return terms[k] if k >= 0 else 0.0

    gap = (to_value - from_value) * math.exp(-x)
    n = order
    return (to_value - gap * sum(terms),
            gap * term(n - 1) / tau,
            gap * (term(n - 2) - term(n - 1)) / tau ** 2,
            gap * (term(n - 3) - 2.0 * term(n - 2) + term(n - 1)) / tau ** 3)


def exp_transition_integral(elapsed, from_value, to_value, tau, order=1):
    """Closed-form integral of exp_transition over [t0, t0 + elapsed]."""
    _validate_shape(tau, order)
    x = elapsed / tau
    decay = math.exp(-x)
    partial = 0.0
    shortfall = 0.0
    for k in range(order):
        partial += x ** k / math.factorial(k)
        shortfall += 1.0 - decay * partial
    return to_value * elapsed - (to_value - from_value) * tau * shortfall


@lru_cache(maxsize=16)
def settle_multiple(settle_factor, order=1):
    """Window length in time constants for an order-n transition.

    The remaining fraction at the end of the window is exp(-settle_factor),
    whatever the order; order 1 returns settle_factor itself.
    """
    if not settle_factor > 0:
        raise ValueError(f'Settle factor must be strictly positive, got {settle_factor}')
    if order == 1:
        return settle_factor
    residual = math.exp(-settle_factor)
    return brentq(lambda x: gammaincc(order, x) - residual, settle_factor, settle_factor + 20.0 * order,
                  xtol=1e-14)


class _Profile:
    """Compiled piecewise profile for one event kind."""

    def __init__(self, initial, events, settle_factor, order=SHAPE_ORDER):
        # Segment: (start, from_value, to_value, tau); tau == 0 is a constant/step
        self.order = order
        self.starts = [0.0]
        self.segments = [(0.0, initial, initial, 0.0)]
        self.integrals = [0.0]
        multiple = settle_multiple(settle_factor, order)
        previous = None
        for event in events:
            if previous is not None and event.time < previous.time + previous.window - _TIME_EPS:
                raise ConfigurationError(
                    f'{event.kind} transition at {event.time} s overlaps the one starting at '
                    f'{previous.time} s (window {previous.window} s)', field='scenario')
            if previous is not None and event.time == previous.time:
                raise ConfigurationError(
                    f'two {event.kind} events at {event.time} s', field='scenario')
            value_at_start = self.evaluate(event.time)[0]
            integral_at_start = self.integral(event.time)
            tau = event.window / multiple if event.window > 0 else 0.0
            if event.time == 0.0:
                # replaces the initial constant segment
                self.starts.pop()
                self.segments.pop()
                self.integrals.pop()
            self.starts.append(event.time)
            self.segments.append((event.time, value_at_start, event.target, tau))
            self.integrals.append(integral_at_start)
            previous = event

    def _index(self, t):
        return max(bisect.bisect_right(self.starts, t) - 1, 0)

    def evaluate(self, t, segment_time=None):
        """Value and three derivatives at t.

        segment_time selects the active segment (default: t itself); passing
        the start of an integration step keeps a whole step on one segment.
        """
        k = self._index(t if segment_time is None else segment_time)
        t0, from_value, to_value, tau = self.segments[k]
        if tau == 0.0:
            return to_value, 0.0, 0.0, 0.0
        return exp_transition(t, t0, from_value, to_value, tau, self.order)

    def integral(self, t, segment_time=None):
        """Closed-form integral of the profile from 0 to t."""
        k = self._index(t if segment_time is None else segment_time)
        t0, from_value, to_value, tau = self.segments[k]
        elapsed = t - t0
        if tau == 0.0:
            return self.integrals[k] + to_value * elapsed
        return self.integrals[k] + exp_transition_integral(elapsed, from_value, to_value, tau, self.order)


class ReferenceSchedule:
    """All profiles of a scenario, compiled once."""

    def __init__(self, scenario):
        validate_scenario(scenario)
        factor = scenario.window_settle_factor

        def ordered(kind):
            return sorted(scenario.events_of(kind), key=lambda e: e.time)

        self.p_i = _Profile(scenario.p_i0, ordered(INPUT_POWER), factor)
        self.v_ref = _Profile(scenario.v_ref0, ordered(DC_REF), factor, DC_REF_SHAPE_ORDER)
        self.q_ref = _Profile(scenario.q_ref0, ordered(REACTIVE_REF), factor)
        self.grid = _Profile(1.0, ordered(GRID_MAGNITUDE), factor)

    def reference(self, t, segment_time=None):
        v, v1, v2, v3 = self.v_ref.evaluate(t, segment_time)
        q, q1, q2, _ = self.q_ref.evaluate(t, segment_time)
        p, p1, p2, _ = self.p_i.evaluate(t, segment_time)
        q_int = self.q_ref.integral(t, segment_time)
        return ReferenceFrame(v, v1, v2, v3, q, q1, q2, q_int, p, p1, p2)

    def grid_magnitude(self, t):
        return self.grid.evaluate(t)[0]


def validate_scenario(scenario):
    """Raise ConfigurationError for ill-formed events."""
    if not scenario.window_settle_factor > 0:
        raise ConfigurationError('window settle factor must be strictly positive', field='scenario')
    if not scenario.v_ref0 > 0:
        raise ConfigurationError('initial DC-link reference must be strictly positive', field='scenario')
    for event in scenario.events:
        is_valid, message = event.validate()
        if not is_valid:
            raise ConfigurationError(message, field=f'event at {event.time} s')


@lru_cache(maxsize=32)
def compile_schedule(scenario):
    return ReferenceSchedule(scenario)


def reference_at(t, scenario):
    """Reference frame (references, derivatives, input power) at time t."""
    return compile_schedule(scenario).reference(t)


def grid_magnitude_at(t, scenario):
    """Grid-voltage magnitude as a fraction of nominal at time t."""
    return compile_schedule(scenario).grid_magnitude(t)


def make_scenario(events, v_ref0=735.0, p_i0=0.0, q_ref0=0.0,
                  window_settle_factor=DEFAULT_WINDOW_SETTLE_FACTOR):
    """Build a Scenario with events sorted by time."""
    ordered = tuple(sorted(events, key=lambda e: (e.time, EVENT_KINDS.index(e.kind))))
    return Scenario(v_ref0=v_ref0, p_i0=p_i0, q_ref0=q_ref0, events=ordered,
                    window_settle_factor=window_settle_factor)


def align_to_step(scenario, dt):
    """Round every event time to the nearest integration-step boundary."""
    aligned = []
    for event in scenario.events:
        time = round(event.time / dt) * dt
        if time != event.time:
            logger.debug('Event %s at %.9f s aligned to %.9f s', event.kind, event.time, time)
        aligned.append(ScenarioEvent(time, event.kind, event.target, event.window))
    return make_scenario(aligned, scenario.v_ref0, scenario.p_i0, scenario.q_ref0,
                         scenario.window_settle_factor)


def weak_grid_scenario(S_N=8000.0, window_settle_factor=DEFAULT_WINDOW_SETTLE_FACTOR):
    """The weak-grid test sequence: power ramps, reference steps and grid sags/swells."""
    rated = S_N / math.sqrt(2.0)
    events = [
        ScenarioEvent(0.010, INPUT_POWER, rated, 0.010),
        ScenarioEvent(0.020, DC_REF, 750.0, 0.010),
        ScenarioEvent(0.070, REACTIVE_REF, rated, 0.010),
        ScenarioEvent(0.120, GRID_MAGNITUDE, 0.8),
        ScenarioEvent(0.160, GRID_MAGNITUDE, 1.2),
        ScenarioEvent(0.200, GRID_MAGNITUDE, 1.0),
        ScenarioEvent(0.220, REACTIVE_REF, 0.0, 0.010),
        ScenarioEvent(0.240, INPUT_POWER, 0.0, 0.010),
    ]
    return make_scenario(events, v_ref0=735.0, window_settle_factor=window_settle_factor)
