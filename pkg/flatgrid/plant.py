"""Average-model dynamics of the inverter, LC filter and Thevenin grid.

Two formulations are kept side by side: the per-phase state equations with
the neutral-point voltages eliminated, and the compact complex alpha-beta
model. Each serves as an oracle for the other.
"""
import math

from flatgrid.errors import DcLinkCollapse
from flatgrid.frames import clarke_forward, clarke_inverse
from flatgrid.models import INIT_MATCHED, PlantState, ThreePhase, ThreePhasePlantState

DEFAULT_V_FLOOR = 10.0


def complex_rates(v_C1, i_L, v_C2, i_g, mu, p_i, v_g, params, v_floor=DEFAULT_V_FLOOR):
    """Tuple form of complex_derivatives used by the integrator loop."""
    if v_C1 <= v_floor:
        raise DcLinkCollapse(v_C1, v_floor)
    s_pcc = v_C2 * i_g.conjugate()
    dv_C1 = (p_i / v_C1 - (mu.conjugate() * i_L).real) / params.C1
    di_L = (mu * v_C1 - v_C2) / params.L
    dv_C2 = (i_L - i_g) / params.C2
    di_g = (v_C2 - params.Rg * i_g - v_g) / params.Lg
    return dv_C1, di_L, dv_C2, di_g, s_pcc.imag


def complex_derivatives(s, mu, p_i, v_g, params, v_floor=DEFAULT_V_FLOOR):
    """Time derivative of a PlantState, returned as a PlantState of rates."""
    return PlantState(*complex_rates(s.v_C1, s.i_L, s.v_C2, s.i_g, mu, p_i, v_g, params, v_floor))


def three_phase_derivatives(s, mu, p_i, v_g, params, v_floor=DEFAULT_V_FLOOR):
    """Time derivative of a ThreePhasePlantState.

    The neutral-to-midpoint voltage v_NO and the midpoint-to-ground voltage
    v_OG follow from the zero-sum constraint on both current triples, which
    also cancels any common-mode modulation.
    """
    v_C1 = s.v_C1
    if v_C1 <= v_floor:
        raise DcLinkCollapse(v_C1, v_floor)
    v_NO = (s.v_C2.total() - v_g.total()) / 3.0
    v_OG = (mu.total() * v_C1 - s.v_C2.total()) / 3.0

    dc_current = mu.a * s.i_L.a + mu.b * s.i_L.b + mu.c * s.i_L.c
    dv_C1 = (p_i / v_C1 - dc_current) / params.C1
    di_L = ThreePhase(*((m * v_C1 - v - v_OG) / params.L for m, v in zip(mu, s.v_C2)))
    dv_C2 = ThreePhase(*((il - ig) / params.C2 for il, ig in zip(s.i_L, s.i_g)))
    di_g = ThreePhase(*((v - params.Rg * ig - vg - v_NO) / params.Lg
                        for v, ig, vg in zip(s.v_C2, s.i_g, v_g)))
    return ThreePhasePlantState(dv_C1, di_L, dv_C2, di_g)


def steady_grid_current(v_C2_phasor, v_g_phasor, params):
    """Sinusoidal steady-state grid current for given PCC and grid voltages."""
    return (v_C2_phasor - v_g_phasor) / params.grid_impedance


def pcc_powers(v_C2, i_g):
    """Active and reactive power injected at the PCC."""
    s = v_C2 * i_g.conjugate()
    return s.real, s.imag


def stored_energy(s, params):
    """Energy held by C1, L and C2."""
    return 0.5 * (params.C1 * s.v_C1 ** 2 + params.L * abs(s.i_L) ** 2 + params.C2 * abs(s.v_C2) ** 2)


def initial_state(params, v_ref0, v_g0, init):
    """Plant state at t = 0.

    'zero' mode: v_C2 = 0, i_L = 0, grid current set by grid voltage and
    impedance. 'matched' mode additionally sets i_L = i_g so v_C2 stays at
    zero, and lowers v_C1 until the filter energy is accounted for in the
    stored-energy reference.
    """
    i_g0 = init.i_g if init.i_g is not None else steady_grid_current(0j, v_g0, params)
    if init.inductor_current == INIT_MATCHED:
        i_L0 = i_g0
        v_C1 = init.v_C1
        if v_C1 is None:
            v_C1 = math.sqrt(v_ref0 ** 2 - params.L * abs(i_L0) ** 2 / params.C1)
    else:
        i_L0 = 0j
        v_C1 = init.v_C1 if init.v_C1 is not None else v_ref0
    return PlantState(v_C1=v_C1, i_L=i_L0, v_C2=0j, i_g=i_g0, q_int=0.0)


def line_voltage_rms(params):
    return math.sqrt(3.0) * params.vg_peak_phase / math.sqrt(2.0)


def short_circuit_ratio(params, S_N=None):
    """Grid short-circuit power over converter rating."""
    S_N = S_N or params.S_N
    return line_voltage_rms(params) ** 2 / (abs(params.grid_impedance) * S_N)


def xr_ratio(params):
    """Grid X/R ratio; infinite for a purely inductive grid."""
    if params.Rg == 0:
        return math.inf
    return params.omega * params.Lg / params.Rg


def to_three_phase(s):
    """Complex plant state -> three-phase plant state (q_int dropped)."""
    return ThreePhasePlantState(s.v_C1, clarke_inverse(s.i_L), clarke_inverse(s.v_C2), clarke_inverse(s.i_g))


def from_three_phase(s3, q_int=0.0):
    """Three-phase plant state -> complex plant state."""
    return PlantState(s3.v_C1, clarke_forward(s3.i_L), clarke_forward(s3.v_C2), clarke_forward(s3.i_g), q_int)
