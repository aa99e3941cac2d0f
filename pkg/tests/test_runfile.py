"""Run-file parsing, schema validation and profile resolution."""
from pathlib import Path

import pytest

from config import QuickConfig
from flatgrid.errors import ConfigurationError
from flatgrid.models import INIT_MATCHED
from flatgrid.runfile import default_run_config, load_run_config, parse_sections, read_sections
from flatgrid.trajectory import weak_grid_scenario
from flatgrid.tuning import PUBLISHED_GAINS

WEAK_GRID_CFG = Path(__file__).resolve().parent.parent / 'weak_grid.cfg'


def _write(tmp_path, text, name='run.cfg'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def test_weak_grid_run_file_loads():
    run = load_run_config(WEAK_GRID_CFG)
    assert run.params.Lg == 90e-3
    assert run.params.Rg == 28.28
    assert run.scenario.events == weak_grid_scenario().events
    assert run.sim.dt == 1e-6
    assert run.sim.t_end == 0.28
    assert run.sim.decimation == 50
    assert run.gains.k1 == pytest.approx(PUBLISHED_GAINS.k1, rel=0.015)


def test_keys_keep_their_case():
    sections = read_sections(WEAK_GRID_CFG)
    assert 'C1_F' in sections['plant']
    assert 'event.grid_sag' in sections


def test_empty_run_file_uses_defaults():
    run = parse_sections({})
    assert run.scenario.events == ()
    assert run.params.C1 == 2.7e-3
    assert run.sim.guard.i_guard == 0.1


def test_default_run_config_carries_weak_grid_sequence():
    run = default_run_config()
    assert len(run.scenario.events) == 8


def test_unknown_key_rejected():
    with pytest.raises(ConfigurationError, match=r'\[plant\] C3_F'):
        parse_sections({'plant': {'C3_F': '1e-6'}})


def test_unknown_section_rejected():
    with pytest.raises(ConfigurationError, match='unknown section'):
        parse_sections({'observer': {'gain': '1'}})


def test_non_numeric_value_rejected():
    with pytest.raises(ConfigurationError, match=r'\[plant\] L_H'):
        parse_sections({'plant': {'L_H': 'five millihenry'}})


def test_unknown_event_kind_rejected():
    with pytest.raises(ConfigurationError, match='event.freq'):
        parse_sections({'event.freq': {'time_s': '0.1', 'kind': 'frequency', 'target': '49.5'}})


def test_grid_event_with_window_rejected():
    with pytest.raises(ConfigurationError, match='steps'):
        parse_sections({'event.sag': {'time_s': '0.1', 'kind': 'grid_magnitude', 'target': '0.8',
                                      'window_s': '0.001'}})


def test_partial_gains_rejected():
    with pytest.raises(ConfigurationError, match='k0'):
        parse_sections({'controller': {'k1': '4.28e10', 'k2': '5.12e7', 'k3': '1.01e4'}})


def test_explicit_gains_replace_tuning():
    run = parse_sections({'controller': {'k1': '4.28e10', 'k2': '5.12e7', 'k3': '1.01e4', 'k0': '1.79e13'}})
    assert run.gains == PUBLISHED_GAINS


def test_damping_outside_range_rejected():
    with pytest.raises(ConfigurationError, match='fast_zeta'):
        parse_sections({'controller': {'fast_zeta': '1.2'}})


def test_zero_t_end_rejected():
    with pytest.raises(ConfigurationError, match='t_end_s'):
        parse_sections({'simulation': {'t_end_s': '0'}})


def test_grid_current_needs_both_components():
    with pytest.raises(ConfigurationError, match='together'):
        parse_sections({'initialization': {'i_g_alpha_A': '1.0'}})


def test_initialization_section():
    run = parse_sections({'initialization': {'inductor_current': 'matched', 'v_C1_V': '700',
                                             'i_g_alpha_A': '1.5', 'i_g_beta_A': '-2'}})
    assert run.sim.init.inductor_current == INIT_MATCHED
    assert run.sim.init.v_C1 == 700.0
    assert run.sim.init.i_g == 1.5 - 2j


def test_profile_fills_missing_simulation_values():
    run = parse_sections({}, 'quick')
    assert run.sim.dt == QuickConfig.DT
    assert run.sim.decimation == QuickConfig.DECIMATION


def test_file_overrides_profile_and_flags_override_file():
    sections = {'simulation': {'dt_s': '1e-6', 't_end_s': '0.05'}}
    run = parse_sections(sections, 'quick')
    assert run.sim.dt == 1e-6
    run = parse_sections(sections, 'quick', dt=0.5e-6, t_end=None)
    assert run.sim.dt == 0.5e-6
    assert run.sim.t_end == 0.05


def test_unknown_profile_rejected():
    with pytest.raises(ConfigurationError, match='profile'):
        parse_sections({}, 'turbo')


def test_inline_comments_are_stripped(tmp_path):
    path = _write(tmp_path, '[simulation]\nt_end_s = 0.01   # short\ndecimation = 10 ; log often\n')
    run = load_run_config(path)
    assert run.sim.t_end == 0.01
    assert run.sim.decimation == 10


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match='cannot read'):
        load_run_config(tmp_path / 'absent.cfg')


def test_malformed_file_rejected(tmp_path):
    path = _write(tmp_path, 'C1_F = 2.7e-3\n')
    with pytest.raises(ConfigurationError):
        load_run_config(path)
