"""Domain types for FlatGrid."""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

# Complex alpha-beta quantities are plain Python complex numbers:
# .real is the alpha component, .imag the beta component.
ComplexSample = complex

# Scenario event kinds
INPUT_POWER = 'input_power'
DC_REF = 'dc_ref'
REACTIVE_REF = 'reactive_ref'
GRID_MAGNITUDE = 'grid_magnitude'
EVENT_KINDS = (INPUT_POWER, DC_REF, REACTIVE_REF, GRID_MAGNITUDE)

# Inductor-current initialization modes
INIT_ZERO = 'zero'
INIT_MATCHED = 'matched'


class ThreePhase(NamedTuple):
    """Instantaneous a, b, c values of a three-phase quantity."""
    a: float
    b: float
    c: float

    def total(self):
        """Sum across phases (zero for three-wire currents)."""
        return self.a + self.b + self.c


@dataclass(frozen=True)
class PlantParams:
    """Circuit constants of the inverter, LC filter and Thevenin grid."""
    C1: float = 2.7e-3              # F, DC-link capacitance
    L: float = 5.7e-3               # H, filter inductance
    C2: float = 9.9e-6              # F, filter capacitance
    Lg: float = 90e-3               # H, grid inductance
    Rg: float = 28.28               # ohm, grid resistance
    omega: float = 2 * math.pi * 50  # rad/s
    vg_peak_phase: float = 326.6    # V, nominal per-phase peak
    S_N: float = 8000.0             # VA, nominal apparent power

    @property
    def grid_impedance(self):
        """Grid impedance Rg + j*omega*Lg at the grid frequency."""
        return complex(self.Rg, self.omega * self.Lg)

    @property
    def vg_nominal(self):
        """Magnitude of the nominal grid-voltage space vector."""
        return math.sqrt(1.5) * self.vg_peak_phase

    def validate(self):
        """Check circuit constants.

        Returns:
            tuple: (is_valid, error_message)
        """
        for name in ('C1', 'L', 'C2', 'Lg'):
            if not getattr(self, name) > 0:
                return False, f'{name} must be strictly positive'
        if self.Rg < 0:
            return False, 'Rg must be non-negative'
        if not self.omega > 0:
            return False, 'omega must be strictly positive'
        if self.vg_peak_phase < 0:
            return False, 'vg_peak_phase must be non-negative'
        if not self.S_N > 0:
            return False, 'S_N must be strictly positive'
        return True, None


@dataclass(frozen=True)
class PlantState:
    """Dynamic state of the complex-valued plant model."""
    v_C1: float
    i_L: complex = 0j
    v_C2: complex = 0j
    i_g: complex = 0j
    q_int: float = 0.0    # running integral of the PCC reactive power

    def as_tuple(self):
        return (self.v_C1, self.i_L, self.v_C2, self.i_g, self.q_int)


@dataclass(frozen=True)
class ThreePhasePlantState:
    """Dynamic state of the three-phase plant model."""
    v_C1: float
    i_L: ThreePhase
    v_C2: ThreePhase
    i_g: ThreePhase

    def as_vector(self):
        """Flatten to (v_C1, i_La, i_Lb, i_Lc, v_C2a, ..., i_gc)."""
        return (self.v_C1, *self.i_L, *self.v_C2, *self.i_g)

    @classmethod
    def from_vector(cls, x):
        return cls(x[0], ThreePhase(*x[1:4]), ThreePhase(*x[4:7]), ThreePhase(*x[7:10]))


@dataclass(frozen=True)
class ScenarioEvent:
    """A timed transition of an input, a reference or the grid magnitude."""
    time: float           # s
    kind: str             # one of EVENT_KINDS
    target: float         # W, V, var or fraction of nominal grid voltage
    window: float = 0.0   # s, zero means step

    def validate(self):
        """Check the event on its own.

        Returns:
            tuple: (is_valid, error_message)
        """
        if self.kind not in EVENT_KINDS:
            return False, f"Unknown event kind '{self.kind}'"
        if self.time < 0:
            return False, f'Event time must be non-negative, got {self.time}'
        if self.window < 0:
            return False, f'Event window must be non-negative, got {self.window}'
        if self.kind == GRID_MAGNITUDE:
            if self.window != 0:
                return False, 'Grid-magnitude events must be steps (window = 0)'
            if self.target < 0:
                return False, 'Grid magnitude must be non-negative'
        return True, None


@dataclass(frozen=True)
class Scenario:
    """Initial reference values plus an ordered tuple of events."""
    v_ref0: float = 735.0     # V
    p_i0: float = 0.0         # W
    q_ref0: float = 0.0       # var
    events: tuple = ()
    window_settle_factor: float = 4.6

    def events_of(self, kind):
        return tuple(e for e in self.events if e.kind == kind)

    def event_times(self):
        return sorted({e.time for e in self.events})


@dataclass(slots=True)
class ReferenceFrame:
    """Instantaneous references, their derivatives and the input power."""
    v_ref: float
    v_ref_d1: float
    v_ref_d2: float
    v_ref_d3: float
    q_ref: float
    q_ref_d1: float
    q_ref_d2: float
    q_ref_int: float
    p_i: float
    p_i_d1: float
    p_i_d2: float


@dataclass(frozen=True)
class ControllerGains:
    """Real state-feedback gains of the integral-action control law."""
    k1: float
    k2: float
    k3: float
    k0: float

    def validate(self):
        """Necessary Hurwitz condition: every gain strictly positive.

        Returns:
            tuple: (is_valid, error_message)
        """
        for name in ('k1', 'k2', 'k3', 'k0'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                return False, f'{name} must be finite and strictly positive, got {value}'
        return True, None

    def scaled(self, factor):
        return ControllerGains(self.k1 * factor, self.k2 * factor, self.k3 * factor, self.k0 * factor)


@dataclass(frozen=True)
class GuardThresholds:
    """Thresholds below which the modulation-index law is not evaluated."""
    i_guard: float = 0.1   # A
    v_guard: float = 10.0  # V


@dataclass
class ControllerState:
    """Mutable state owned by one closed-loop run."""
    y: complex = 0j            # integral of e_xi1
    last_mu: complex = 0j      # held output for guard events
    guard_count: int = 0


@dataclass(slots=True)
class FlatCoordinates:
    """Flat-output chain and its tracking errors."""
    xi1: complex
    xi2: complex
    xi3: complex
    e1: complex
    e2: complex
    e3: complex


@dataclass(frozen=True)
class PoleSpec:
    """Settling time (1% band) and damping of one complex pole pair."""
    ts: float
    zeta: float

    def validate(self):
        """Returns:
            tuple: (is_valid, error_message)
        """
        if not (math.isfinite(self.ts) and self.ts > 0):
            return False, f'Settling time must be strictly positive, got {self.ts}'
        if not 0 < self.zeta < 1:
            return False, f'Damping ratio must lie in (0, 1), got {self.zeta}'
        return True, None


@dataclass(frozen=True)
class PoleSet:
    """Four closed-loop poles of the tracking-error system."""
    poles: tuple

    def validate(self, tol=1e-9):
        """Check conjugate closure and strict stability.

        Returns:
            tuple: (is_valid, error_message)
        """
        if len(self.poles) != 4:
            return False, f'Expected four poles, got {len(self.poles)}'
        remaining = [complex(p) for p in self.poles]
        while remaining:
            p = remaining.pop(0)
            scale = max(1.0, abs(p))
            if abs(p.imag) <= tol * scale:
                continue
            match = min(remaining, key=lambda q: abs(q - p.conjugate()), default=None)
            if match is None or abs(match - p.conjugate()) > tol * scale:
                return False, f'Pole {p} has no conjugate partner'
            remaining.remove(match)
        unstable = [p for p in self.poles if not complex(p).real < 0]
        if unstable:
            return False, f'Poles must have strictly negative real parts: {unstable}'
        return True, None


@dataclass(frozen=True)
class AssignmentReport:
    """Characteristic-polynomial residuals at each target pole."""
    poles: tuple
    residuals: tuple       # |det(sI - A)| / max(1, |s|^4)
    tolerance: float = 1e-9

    @property
    def passed(self):
        return all(r < self.tolerance for r in self.residuals)

    @property
    def worst(self):
        return max(self.residuals) if self.residuals else 0.0


@dataclass(frozen=True)
class InitialConditions:
    """Overrides for the plant initial state."""
    v_C1: Optional[float] = None          # V, None means v_C1^r(0)
    inductor_current: str = INIT_ZERO     # 'zero' or 'matched'
    i_g: Optional[complex] = None         # A, None means the steady-state grid current

    def validate(self):
        """Returns:
            tuple: (is_valid, error_message)
        """
        if self.inductor_current not in (INIT_ZERO, INIT_MATCHED):
            return False, f"inductor_current must be '{INIT_ZERO}' or '{INIT_MATCHED}'"
        if self.v_C1 is not None and not self.v_C1 > 0:
            return False, 'Initial DC-link voltage must be strictly positive'
        return True, None


@dataclass(frozen=True)
class SimConfig:
    """Settings of one closed-loop run."""
    dt: float = 1e-6
    t_end: float = 0.28
    decimation: int = 50
    guard: GuardThresholds = field(default_factory=GuardThresholds)
    v_floor: float = 10.0
    init: InitialConditions = field(default_factory=InitialConditions)
    extinction_fraction: float = 0.01
    steady_window_fraction: float = 0.2
    guard_storm_limit: int = 100

    @classmethod
    def from_config(cls, config_class, **overrides):
        """Build from a config.py profile, then apply keyword overrides."""
        values = dict(
            dt=config_class.DT,
            t_end=config_class.T_END,
            decimation=config_class.DECIMATION,
            guard=GuardThresholds(config_class.I_GUARD, config_class.V_GUARD),
            v_floor=config_class.V_FLOOR,
            extinction_fraction=config_class.EXTINCTION_FRACTION,
            steady_window_fraction=config_class.STEADY_WINDOW_FRACTION,
            guard_storm_limit=config_class.GUARD_STORM_LIMIT,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def validate(self):
        """Returns:
            tuple: (is_valid, error_message)
        """
        if not self.dt > 0:
            return False, f'dt must be strictly positive, got {self.dt}'
        if not self.t_end > 0:
            return False, f't_end must be strictly positive, got {self.t_end}'
        if self.t_end < self.dt:
            return False, 't_end must cover at least one integration step'
        if self.decimation < 1:
            return False, f'decimation must be a positive integer, got {self.decimation}'
        if self.v_floor < 0:
            return False, 'v_floor must be non-negative'
        if not 0 < self.extinction_fraction < 1:
            return False, 'extinction_fraction must lie in (0, 1)'
        if not 0 < self.steady_window_fraction <= 1:
            return False, 'steady_window_fraction must lie in (0, 1]'
        return self.init.validate()

    def check_step_size(self, gains):
        """Check dt against the fastest closed-loop time constant.

        Returns:
            tuple: (is_adequate, message)
        """
        from flatgrid.tuning import closed_loop_poles

        fastest = max(abs(p.real) for p in closed_loop_poles(gains))
        tau_min = 1.0 / fastest
        if self.dt > tau_min / 10:
            return False, (f'dt = {self.dt:.3g} s exceeds 1/10 of the fastest closed-loop '
                           f'time constant ({tau_min:.3g} s); results may be inaccurate or unstable')
        return True, f'{tau_min / self.dt:.0f} steps per fastest time constant'


# Logged columns: (key, unit)
RECORD_COLUMNS = (
    ('t', 's'),
    ('v_C1', 'V'), ('v_C1_ref', 'V'),
    ('i_L_alpha', 'A'), ('i_L_beta', 'A'),
    ('v_C2_alpha', 'V'), ('v_C2_beta', 'V'),
    ('i_g_alpha', 'A'), ('i_g_beta', 'A'),
    ('v_g_alpha', 'V'), ('v_g_beta', 'V'),
    ('mu_a', '1'), ('mu_b', '1'), ('mu_c', '1'),
    ('p_i', 'W'), ('p', 'W'), ('q', 'var'), ('q_ref', 'var'),
    ('xi1_re', 'J'), ('xi1_im', 'J'),
    ('xi2_re', 'W'), ('xi2_im', 'W'),
    ('xi3_re', 'W/s'), ('xi3_im', 'W/s'),
    ('w_re', 'W/s^2'), ('w_im', 'W/s^2'),
    ('e1_re', 'J'), ('e1_im', 'J'),
    ('e2_re', 'W'), ('e2_im', 'W'),
    ('e3_re', 'W/s'), ('e3_im', 'W/s'),
    ('y_re', 'J*s'), ('y_im', 'J*s'),
    ('guard_count', '1'),
)
RECORD_KEYS = tuple(key for key, _ in RECORD_COLUMNS)


@dataclass
class TimeSeriesRecord:
    """Decimated log of a closed-loop run."""
    data: dict = field(default_factory=lambda: {key: [] for key in RECORD_KEYS})
    fault: Optional[object] = None    # SimulationFault when the run aborted
    guard_count: int = 0
    warnings: list = field(default_factory=list)

    def append(self, row):
        for key in RECORD_KEYS:
            self.data[key].append(row[key])

    def __len__(self):
        return len(self.data['t'])

    def column(self, key):
        return np.asarray(self.data[key], dtype=float)

    def complex_column(self, prefix, re='_re', im='_im'):
        return self.column(prefix + re) + 1j * self.column(prefix + im)

    def to_frame(self):
        """Return the record as a DataFrame with united column headers."""
        return pd.DataFrame({f'{key} [{unit}]': self.data[key] for key, unit in RECORD_COLUMNS})


@dataclass
class SummaryMetrics:
    """Quantitative summary of a run; None marks an unavailable metric."""
    segments: list = field(default_factory=list)         # per-segment dicts
    max_phase_mu: float = 0.0
    extinction_times: dict = field(default_factory=dict)  # event time -> seconds or None
    max_p: float = 0.0
    max_q: float = 0.0
    min_p: float = 0.0
    min_q: float = 0.0
    guard_count: int = 0
    fault: Optional[str] = None

    def lines(self):
        """Printable summary block."""
        out = ['Summary']
        out.append(f'  max per-phase |mu|          : {self.max_phase_mu:.4f}')
        out.append(f'  p range [W]                 : {self.min_p:.1f} .. {self.max_p:.1f}')
        out.append(f'  q range [var]               : {self.min_q:.1f} .. {self.max_q:.1f}')
        out.append(f'  guard activations           : {self.guard_count}')
        if self.fault:
            out.append(f'  fault                       : {self.fault}')
        out.append('  segments (steady-state window = last part of each interval):')
        for seg in self.segments:
            if not seg['available']:
                out.append(f"    [{seg['start'] * 1e3:7.2f}, {seg['end'] * 1e3:7.2f}] ms  unavailable (segment too short)")
                continue
            out.append(
                f"    [{seg['start'] * 1e3:7.2f}, {seg['end'] * 1e3:7.2f}] ms  "
                f"|v_C1 - v_ref| = {seg['dc_error']:.3f} V  |i_g| = {seg['i_g']:.2f} A  "
                f"|v_C2| = {seg['v_C2']:.1f} V  |p - p_i| = {seg['p_error']:.2f} W"
                + ('' if seg['steady'] else '  (transition in window)')
            )
        out.append('  error-extinction times after events:')
        for t_event, t_ext in sorted(self.extinction_times.items()):
            text = 'not extinguished' if t_ext is None else f'{t_ext * 1e3:.3f} ms'
            out.append(f'    event at {t_event * 1e3:7.2f} ms : {text}')
        return out
