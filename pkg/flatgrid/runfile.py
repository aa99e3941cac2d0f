"""Run-file parsing and schema validation.

A run file is INI-style text:

    [plant]            circuit constants, keys suffixed with their SI unit
    [controller]       two pole pairs, or the four gains given explicitly
    [simulation]       dt, t_end, decimation, guards, summary settings
    [initialization]   plant initial-state overrides
    [scenario]         initial references and the window -> tau factor
    [event.<name>]     one section per timed transition or step

Missing simulation values fall back to the selected config.py profile.
"""
import configparser
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import config as config_profiles
from flatgrid.errors import ConfigurationError
from flatgrid.models import (EVENT_KINDS, GuardThresholds, InitialConditions, PlantParams, PoleSpec,
                             ControllerGains, ScenarioEvent, SimConfig)
from flatgrid.trajectory import make_scenario, validate_scenario, weak_grid_scenario
from flatgrid.tuning import tune

logger = logging.getLogger(__name__)

EVENT_PREFIX = 'event.'


class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid')


class PlantSection(_Section):
    C1_F: float = Field(2.7e-3, gt=0, description='DC-link capacitance')
    L_H: float = Field(5.7e-3, gt=0, description='Filter inductance')
    C2_F: float = Field(9.9e-6, gt=0, description='Filter capacitance')
    Lg_H: float = Field(90e-3, gt=0, description='Grid inductance')
    Rg_ohm: float = Field(28.28, ge=0, description='Grid resistance')
    f_Hz: float = Field(50.0, gt=0, description='Grid frequency')
    vg_peak_phase_V: float = Field(326.6, ge=0, description='Nominal per-phase peak grid voltage')
    S_N_VA: float = Field(8000.0, gt=0, description='Nominal apparent power')

    def to_params(self):
        return PlantParams(C1=self.C1_F, L=self.L_H, C2=self.C2_F, Lg=self.Lg_H, Rg=self.Rg_ohm,
                           omega=2.0 * math.pi * self.f_Hz, vg_peak_phase=self.vg_peak_phase_V,
                           S_N=self.S_N_VA)


class ControllerSection(_Section):
    fast_ts_s: float = Field(1e-3, gt=0, description='1% settling time of the fast pole pair')
    fast_zeta: float = Field(0.707, gt=0, lt=1, description='Damping of the fast pole pair')
    slow_ts_s: float = Field(10e-3, gt=0, description='1% settling time of the slow pole pair')
    slow_zeta: float = Field(0.707, gt=0, lt=1, description='Damping of the slow pole pair')
    settle_factor: float = Field(4.6, gt=0, description='sigma * ts; 4.6 for 1%, 4.0 for 2%')
    k1: Optional[float] = Field(None, gt=0)
    k2: Optional[float] = Field(None, gt=0)
    k3: Optional[float] = Field(None, gt=0)
    k0: Optional[float] = Field(None, gt=0)

    @model_validator(mode='after')
    def gains_all_or_none(self):
        given = [k for k in ('k1', 'k2', 'k3', 'k0') if getattr(self, k) is not None]
        if given and len(given) != 4:
            missing = sorted({'k1', 'k2', 'k3', 'k0'} - set(given))
            raise ValueError(f'explicit gains need all of k1, k2, k3, k0 (missing {", ".join(missing)})')
        return self

    @property
    def explicit_gains(self):
        return self.k1 is not None

    def to_gains(self):
        """Explicit gains, or gains tuned from the two pole pairs."""
        if self.explicit_gains:
            return ControllerGains(k1=self.k1, k2=self.k2, k3=self.k3, k0=self.k0)
        gains, _, report = tune(PoleSpec(self.fast_ts_s, self.fast_zeta),
                                PoleSpec(self.slow_ts_s, self.slow_zeta), self.settle_factor)
        if not report.passed:
            logger.warning('Pole assignment residual %.3g exceeds %.1g', report.worst, report.tolerance)
        return gains


class SimulationSection(_Section):
    dt_s: Optional[float] = Field(None, gt=0)
    t_end_s: Optional[float] = Field(None, gt=0)
    decimation: Optional[int] = Field(None, ge=1)
    i_guard_A: Optional[float] = Field(None, ge=0)
    v_guard_V: Optional[float] = Field(None, ge=0)
    v_floor_V: Optional[float] = Field(None, ge=0)
    extinction_fraction: Optional[float] = Field(None, gt=0, lt=1)
    steady_window_fraction: Optional[float] = Field(None, gt=0, le=1)
    guard_storm_limit: Optional[int] = Field(None, ge=0)


class InitializationSection(_Section):
    v_C1_V: Optional[float] = Field(None, gt=0, description='Initial DC-link voltage')
    inductor_current: Literal['zero', 'matched'] = 'zero'
    i_g_alpha_A: Optional[float] = None
    i_g_beta_A: Optional[float] = None

    @model_validator(mode='after')
    def grid_current_pair(self):
        if (self.i_g_alpha_A is None) != (self.i_g_beta_A is None):
            raise ValueError('i_g_alpha_A and i_g_beta_A must be given together')
        return self


class ScenarioSection(_Section):
    v_ref0_V: float = Field(735.0, gt=0, description='Initial DC-link voltage reference')
    p_i0_W: float = Field(0.0, description='Initial input power')
    q_ref0_var: float = Field(0.0, description='Initial reactive-power reference')
    window_settle_factor: float = Field(
        4.6, gt=0, description='-ln of the fraction left at the end of a window (window / tau at first order)')


class EventSection(_Section):
    time_s: float = Field(..., ge=0)
    kind: Literal[EVENT_KINDS]
    target: float = Field(..., description='W, V, var or fraction of nominal grid voltage, by kind')
    window_s: float = Field(0.0, ge=0)


@dataclass(frozen=True)
class RunConfig:
    """Everything a closed-loop run needs, resolved from a run file."""
    params: PlantParams
    gains: ControllerGains
    scenario: object
    sim: SimConfig


def _validated(model, section, values):
    try:
        return model(**values)
    except ValidationError as exc:
        error = exc.errors()[0]
        where = '.'.join(str(part) for part in error['loc'])
        field = f'[{section}] {where}' if where else f'[{section}]'
        raise ConfigurationError(error['msg'], field=field) from exc


def read_sections(path):
    """Parse an INI run file into {section: {key: value}} with key case preserved."""
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'), interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding='utf-8') as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigurationError(f'cannot read run file: {exc}', field=str(path)) from exc
    except configparser.Error as exc:
        raise ConfigurationError(str(exc).replace('\n', ' '), field=str(path)) from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def parse_sections(sections, config_name='default', **overrides):
    """Validate parsed sections and resolve them into a RunConfig.

    overrides (dt, t_end, decimation) take precedence over the file, which
    takes precedence over the config profile.
    """
    known = {'plant', 'controller', 'simulation', 'initialization', 'scenario'}
    for name in sections:
        if name not in known and not name.startswith(EVENT_PREFIX):
            raise ConfigurationError(f'unknown section [{name}]', field='run file')

    plant = _validated(PlantSection, 'plant', sections.get('plant', {}))
    controller = _validated(ControllerSection, 'controller', sections.get('controller', {}))
    simulation = _validated(SimulationSection, 'simulation', sections.get('simulation', {}))
    init = _validated(InitializationSection, 'initialization', sections.get('initialization', {}))
    scenario_section = _validated(ScenarioSection, 'scenario', sections.get('scenario', {}))

    events = []
    for name, values in sections.items():
        if name.startswith(EVENT_PREFIX):
            event = _validated(EventSection, name, values)
            events.append(ScenarioEvent(event.time_s, event.kind, event.target, event.window_s))

    scenario = make_scenario(events, v_ref0=scenario_section.v_ref0_V, p_i0=scenario_section.p_i0_W,
                             q_ref0=scenario_section.q_ref0_var,
                             window_settle_factor=scenario_section.window_settle_factor)
    validate_scenario(scenario)

    try:
        profile = config_profiles[config_name]
    except KeyError:
        raise ConfigurationError(f"unknown profile '{config_name}'", field='config') from None

    i_g0 = None
    if init.i_g_alpha_A is not None:
        i_g0 = complex(init.i_g_alpha_A, init.i_g_beta_A)
    guard = GuardThresholds(
        simulation.i_guard_A if simulation.i_guard_A is not None else profile.I_GUARD,
        simulation.v_guard_V if simulation.v_guard_V is not None else profile.V_GUARD,
    )
    values = dict(
        dt=simulation.dt_s, t_end=simulation.t_end_s, decimation=simulation.decimation,
        v_floor=simulation.v_floor_V, extinction_fraction=simulation.extinction_fraction,
        steady_window_fraction=simulation.steady_window_fraction,
        guard_storm_limit=simulation.guard_storm_limit,
    )
    values.update({k: v for k, v in overrides.items() if v is not None})
    sim = SimConfig.from_config(profile, guard=guard,
                                init=InitialConditions(init.v_C1_V, init.inductor_current, i_g0),
                                **values)
    is_valid, message = sim.validate()
    if not is_valid:
        raise ConfigurationError(message, field='[simulation]')

    params = plant.to_params()
    is_valid, message = params.validate()
    if not is_valid:
        raise ConfigurationError(message, field='[plant]')
    gains = controller.to_gains()
    return RunConfig(params=params, gains=gains, scenario=scenario, sim=sim)


def load_run_config(path, config_name='default', **overrides):
    """Read, validate and resolve a run file."""
    run = parse_sections(read_sections(path), config_name, **overrides)
    logger.info('Loaded %s: %d events, dt = %.3g s, t_end = %.3g s',
                path, len(run.scenario.events), run.sim.dt, run.sim.t_end)
    return run


def default_run_config(config_name='default', **overrides):
    """RunConfig equivalent to an empty run file plus the weak-grid test sequence."""
    run = parse_sections({}, config_name, **overrides)
    return RunConfig(params=run.params, gains=run.gains,
                     scenario=weak_grid_scenario(run.params.S_N), sim=run.sim)
