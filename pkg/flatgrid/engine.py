"""Fixed-step closed-loop simulation of plant and controller.

The integrator advances one augmented state
    (v_C1, i_L, v_C2, i_g, q_int, y)
made of Python floats and complex numbers, so the controller integral y is
integrated by the same RK4 stages as the plant. Event times are aligned to
step boundaries; within a step the reference segments and the grid
magnitude are those active at the step start.
"""
import cmath
import logging
import math
import time as timer

import numpy as np

from flatgrid.controller import (auxiliary_input, control_step, flat_coordinates,
                                 grid_current_derivatives, modulation_index)
from flatgrid.errors import ConfigurationError, DcLinkCollapse, SimulationFault
from flatgrid.frames import clarke_forward, clarke_inverse, space_vector
from flatgrid.models import (GRID_MAGNITUDE, ControllerState, PlantState, SimConfig,
                             SummaryMetrics, ThreePhasePlantState, TimeSeriesRecord)
from flatgrid.plant import complex_rates, initial_state, three_phase_derivatives, to_three_phase
from flatgrid.trajectory import align_to_step, compile_schedule

logger = logging.getLogger(__name__)

AUGMENTED_FIELDS = ('v_C1', 'i_L', 'v_C2', 'i_g', 'q_int', 'y')

# Samples around an event instant left out of finite-difference checks
EVENT_GUARD_SAMPLES = 3


def _axpy(x, k, h):
    if isinstance(x, tuple):
        return tuple(a + h * b for a, b in zip(x, k))
    return x + h * k


def rk4_step(state, t, dt, f):
    """Classic four-stage Runge-Kutta step of x' = f(t, x).

    state may be a scalar or a tuple of scalars. A DcLinkCollapse raised by f
    is re-raised as SimulationFault carrying the stage time.
    """
    half = 0.5 * dt
    stage_t = t
    try:
        k1 = f(t, state)
        stage_t = t + half
        k2 = f(stage_t, _axpy(state, k1, half))
        k3 = f(stage_t, _axpy(state, k2, half))
        stage_t = t + dt
        k4 = f(stage_t, _axpy(state, k3, dt))
    except DcLinkCollapse as exc:
        raise SimulationFault(stage_t, str(exc), {'step start': t, 'v_C1 at stage': exc.v_C1}) from exc
    sixth = dt / 6.0
    if isinstance(state, tuple):
        return tuple(x + sixth * (a + 2.0 * b + 2.0 * c + d)
                     for x, a, b, c, d in zip(state, k1, k2, k3, k4))
    return state + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class ClosedLoop:
    """Derivative map of the augmented closed-loop system.

    step_time and step_magnitude must be set by the caller before each RK4
    step: they pin the reference segments and the grid magnitude.
    """

    def __init__(self, params, gains, schedule, cfg, state=None):
        self.params = params
        self.gains = gains
        self.schedule = schedule
        self.cfg = cfg
        self.state = state or ControllerState()
        self.step_time = 0.0
        self.step_magnitude = schedule.grid_magnitude(0.0)

    def grid_voltage(self, t, magnitude=None):
        if magnitude is None:
            magnitude = self.step_magnitude
        return magnitude * space_vector(self.params.vg_peak_phase, self.params.omega * t)

    def __call__(self, t, x):
        v_C1, i_L, v_C2, i_g, q_int, y = x
        r = self.schedule.reference(t, segment_time=self.step_time)
        s = PlantState(v_C1, i_L, v_C2, i_g, q_int)
        mu, flat = control_step(s, r, self.gains, self.state, self.params, self.cfg.guard, y=y)
        rates = complex_rates(v_C1, i_L, v_C2, i_g, mu, r.p_i, self.grid_voltage(t),
                              self.params, self.cfg.v_floor)
        return (*rates, flat.e1)

    def sample(self, t, x):
        """Logged quantities at a step boundary, leaving the controller state untouched."""
        v_C1, i_L, v_C2, i_g, q_int, y = x
        params = self.params
        r = self.schedule.reference(t)
        magnitude = self.schedule.grid_magnitude(t)
        s = PlantState(v_C1, i_L, v_C2, i_g, q_int)
        i_g_d1, i_g_d2 = grid_current_derivatives(i_g, params.omega)
        flat, xi3_r_dot = flat_coordinates(s, r, params, i_g_d1)
        w = auxiliary_input(flat.e1, flat.e2, flat.e3, y, self.gains, xi3_r_dot)
        mu, _ = modulation_index(w, r.p_i_d2, v_C2, i_g, i_g_d1, i_g_d2, i_L, v_C1,
                                 params.L, params.C2, self.cfg.guard, self.state)
        mu_abc = clarke_inverse(mu)
        v_g = self.grid_voltage(t, magnitude)
        s_pcc = v_C2 * i_g.conjugate()
        return {
            't': t,
            'v_C1': v_C1, 'v_C1_ref': r.v_ref,
            'i_L_alpha': i_L.real, 'i_L_beta': i_L.imag,
            'v_C2_alpha': v_C2.real, 'v_C2_beta': v_C2.imag,
            'i_g_alpha': i_g.real, 'i_g_beta': i_g.imag,
            'v_g_alpha': v_g.real, 'v_g_beta': v_g.imag,
            'mu_a': mu_abc.a, 'mu_b': mu_abc.b, 'mu_c': mu_abc.c,
            'p_i': r.p_i, 'p': s_pcc.real, 'q': s_pcc.imag, 'q_ref': r.q_ref,
            'xi1_re': flat.xi1.real, 'xi1_im': flat.xi1.imag,
            'xi2_re': flat.xi2.real, 'xi2_im': flat.xi2.imag,
            'xi3_re': flat.xi3.real, 'xi3_im': flat.xi3.imag,
            'w_re': w.real, 'w_im': w.imag,
            'e1_re': flat.e1.real, 'e1_im': flat.e1.imag,
            'e2_re': flat.e2.real, 'e2_im': flat.e2.imag,
            'e3_re': flat.e3.real, 'e3_im': flat.e3.imag,
            'y_re': complex(y).real, 'y_im': complex(y).imag,
            'guard_count': self.state.guard_count,
        }


def _snapshot(x):
    return dict(zip(AUGMENTED_FIELDS, x))


def _validate_run(params, gains, cfg):
    for name, item in (('plant', params), ('controller', gains), ('simulation', cfg)):
        is_valid, message = item.validate()
        if not is_valid:
            raise ConfigurationError(message, field=name)


def run_scenario(params, gains, scenario, cfg=None):
    """Integrate the closed loop over [0, t_end] and return the decimated record.

    A plant fault or a non-finite state stops the run; the record then holds
    every sample logged so far and the SimulationFault in record.fault.
    """
    cfg = cfg or SimConfig()
    _validate_run(params, gains, cfg)
    record = TimeSeriesRecord()

    is_adequate, message = cfg.check_step_size(gains)
    if not is_adequate:
        logger.warning(message)
        record.warnings.append(message)
    else:
        logger.debug(message)

    scenario = align_to_step(scenario, cfg.dt)
    schedule = compile_schedule(scenario)
    loop = ClosedLoop(params, gains, schedule, cfg)

    r0 = schedule.reference(0.0)
    state0 = initial_state(params, r0.v_ref, loop.grid_voltage(0.0), cfg.init)
    x = (*state0.as_tuple(), 0j)

    dt = cfg.dt
    n_steps = cfg.n_steps
    decimation = cfg.decimation
    logger.info('Running %d steps of %.3g s (%d events, log every %d steps)',
                n_steps, dt, len(scenario.events), decimation)
    started = timer.perf_counter()

    for k in range(n_steps + 1):
        t = k * dt
        if k % decimation == 0:
            record.append(loop.sample(t, x))
        if k == n_steps:
            break
        loop.step_time = t
        loop.step_magnitude = schedule.grid_magnitude(t)
        try:
            x = rk4_step(x, t, dt, loop)
        except SimulationFault as fault:
            fault.snapshot.update(_snapshot(x))
            record.fault = fault
            break
        if not all(cmath.isfinite(v) for v in x):
            record.fault = SimulationFault(t + dt, 'non-finite state', _snapshot(x))
            break

    record.guard_count = loop.state.guard_count
    elapsed = timer.perf_counter() - started
    if record.fault is not None:
        logger.error('Run aborted after %.2f s wall time: %s', elapsed, record.fault)
    else:
        logger.info('Run finished in %.2f s wall time (%d samples, %d guard activations)',
                    elapsed, len(record), record.guard_count)
    return record


def _segment_metrics(t, window_mask, start, end, record, steady):
    v_C1 = record.column('v_C1')[window_mask]
    v_ref = record.column('v_C1_ref')[window_mask]
    i_g = np.abs(record.complex_column('i_g', '_alpha', '_beta')[window_mask])
    v_C2 = np.abs(record.complex_column('v_C2', '_alpha', '_beta')[window_mask])
    p_error = np.abs(record.column('p')[window_mask] - record.column('p_i')[window_mask])
    return {
        'start': start, 'end': end, 'available': True, 'steady': steady,
        'dc_error': float(np.mean(np.abs(v_C1 - v_ref))),
        'i_g': float(np.mean(i_g)),
        'v_C2': float(np.mean(v_C2)),
        'p_error': float(np.max(p_error)),
    }


def extinction_time(t, magnitude, t_event, t_stop, fraction):
    """Time after t_event at which magnitude drops and stays below fraction of its peak.

    Only samples in [t_event, t_stop) are considered. Returns 0.0 when the
    magnitude never moves by more than that fraction of its peak (no
    transient to extinguish) and None when the last sample is still above
    the threshold.
    """
    mask = (t >= t_event) & (t < t_stop)
    times = t[mask]
    values = magnitude[mask]
    if values.size == 0:
        return None
    peak = float(np.max(values))
    if peak == 0.0 or np.ptp(values) <= fraction * peak:
        return 0.0
    above = np.nonzero(values >= fraction * peak)[0]
    last = int(above[-1])
    if last + 1 >= values.size:
        return None
    return float(times[last + 1] - t_event)


def summarize(record, scenario, cfg=None):
    """Steady-state, saturation and settling metrics of a record."""
    if len(record) == 0:
        raise ValueError('Cannot summarize an empty record')
    cfg = cfg or SimConfig()
    t = record.column('t')
    t_last = float(t[-1])

    active = [(e.time, e.time + e.window) for e in scenario.events]
    boundaries = sorted({0.0, t_last, *(time for time in scenario.event_times() if 0.0 < time < t_last)})

    segments = []
    for start, end in zip(boundaries[:-1], boundaries[1:]):
        window_start = end - cfg.steady_window_fraction * (end - start)
        mask = (t >= window_start) & (t <= end)
        if np.count_nonzero(mask) < 3:
            segments.append({'start': start, 'end': end, 'available': False, 'steady': False})
            continue
        steady = not any(a < end and window_start < b for a, b in active)
        segments.append(_segment_metrics(t, mask, start, end, record, steady))

    e1 = np.abs(record.complex_column('e1'))
    event_times = scenario.event_times()
    extinction = {}
    for i, t_event in enumerate(event_times):
        t_stop = event_times[i + 1] if i + 1 < len(event_times) else math.inf
        extinction[t_event] = extinction_time(t, e1, t_event, t_stop, cfg.extinction_fraction)

    mu = np.vstack([np.abs(record.column(k)) for k in ('mu_a', 'mu_b', 'mu_c')])
    p = record.column('p')
    q = record.column('q')
    return SummaryMetrics(
        segments=segments,
        max_phase_mu=float(np.max(mu)),
        extinction_times=extinction,
        max_p=float(np.max(p)), min_p=float(np.min(p)),
        max_q=float(np.max(q)), min_q=float(np.min(q)),
        guard_count=record.guard_count,
        fault=str(record.fault) if record.fault is not None else None,
    )


def simulate_open_loop(params, mu_of_t, p_i, v_g_of_t, state0, dt, t_end, model='complex',
                       v_floor=10.0):
    """Open-loop RK4 run of either plant formulation.

    mu_of_t and v_g_of_t return ThreePhase triples; the complex model sees
    their Clarke transforms. Both variants return the trajectory as complex
    alpha-beta values so they can be compared directly.

    Returns:
        tuple: (times, states) with states of shape (n + 1, 4):
        v_C1, i_L, v_C2, i_g
    """
    n_steps = int(round(t_end / dt))
    times = np.arange(n_steps + 1) * dt
    states = np.empty((n_steps + 1, 4), dtype=complex)

    if model == 'complex':
        def f(t, x):
            mu = clarke_forward(mu_of_t(t))
            v_g = clarke_forward(v_g_of_t(t))
            return complex_rates(x[0], x[1], x[2], x[3], mu, p_i, v_g, params, v_floor)[:4]

        x = state0.as_tuple()[:4]
        for k in range(n_steps + 1):
            states[k] = x
            if k < n_steps:
                x = rk4_step(x, k * dt, dt, f)
    elif model == 'three_phase':
        def f(t, x):
            s3 = ThreePhasePlantState.from_vector(x)
            return three_phase_derivatives(s3, mu_of_t(t), p_i, v_g_of_t(t), params, v_floor).as_vector()

        x = to_three_phase(state0).as_vector()
        for k in range(n_steps + 1):
            s3 = ThreePhasePlantState.from_vector(x)
            states[k] = (s3.v_C1, clarke_forward(s3.i_L), clarke_forward(s3.v_C2), clarke_forward(s3.i_g))
            if k < n_steps:
                x = rk4_step(x, k * dt, dt, f)
    else:
        raise ValueError(f"Unknown plant model '{model}'")
    return times, states


def central_difference(values, h):
    """Fourth-order central difference; the two samples at each end are NaN."""
    values = np.asarray(values)
    out = np.full(values.shape, np.nan, dtype=values.dtype if np.iscomplexobj(values) else float)
    out[2:-2] = (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1] - values[4:]) / (12.0 * h)
    return out


def _usable(t, event_times, h):
    mask = np.ones(t.shape, dtype=bool)
    mask[:2] = False
    mask[-2:] = False
    for t_event in event_times:
        mask &= np.abs(t - t_event) > (EVENT_GUARD_SAMPLES + 0.5) * h
    return mask


def _log_spacing(t):
    if t.size < 5:
        raise ValueError('At least five logged samples are needed for finite differences')
    return float(t[1] - t[0])


def energy_balance_residual(record, params, event_times=()):
    """d/dt(stored energy) - (p_i - p) on the log grid.

    Returns:
        tuple: (times, residual) restricted to samples away from event instants
    """
    t = record.column('t')
    h = _log_spacing(t)
    i_L = record.complex_column('i_L', '_alpha', '_beta')
    v_C2 = record.complex_column('v_C2', '_alpha', '_beta')
    energy = 0.5 * (params.C1 * record.column('v_C1') ** 2 + params.L * np.abs(i_L) ** 2
                    + params.C2 * np.abs(v_C2) ** 2)
    residual = central_difference(energy, h) - (record.column('p_i') - record.column('p'))
    mask = _usable(t, event_times, h)
    return t[mask], residual[mask]


def flat_chain_residuals(record, event_times=()):
    """Finite-difference checks of the flat-output chain.

    Returns:
        dict: times, 'xi2' = d(xi1)/dt - xi2 and 'w' = d(xi3)/dt - w, all
        restricted to samples away from event instants
    """
    t = record.column('t')
    h = _log_spacing(t)
    mask = _usable(t, event_times, h)
    d_xi1 = central_difference(record.complex_column('xi1'), h)
    d_xi3 = central_difference(record.complex_column('xi3'), h)
    return {
        't': t[mask],
        'xi2': (d_xi1 - record.complex_column('xi2'))[mask],
        'w': (d_xi3 - record.complex_column('w'))[mask],
    }


def grid_event_times(scenario):
    return [e.time for e in scenario.events if e.kind == GRID_MAGNITUDE]
