"""Complex-valued flatness-based control law.

The flat output is the complex stored energy
    xi1 = 1/2 (C1 v_C1^2 + L |i_L|^2 + C2 |v_C2|^2) - j * integral(q),
whose first three derivatives form a chain of integrators driven by the
auxiliary input w. The modulation index is obtained by solving the xi3
derivative for mu. Real and imaginary parts (stored energy and integrated
reactive power) are decoupled because all gains are real.
"""
import logging

from flatgrid.models import FlatCoordinates

logger = logging.getLogger(__name__)


def flat_output(v_C1, i_L, v_C2, q_int, params):
    """Complex energy-based flat output xi1."""
    energy = 0.5 * (params.C1 * v_C1 * v_C1 + params.L * abs(i_L) ** 2 + params.C2 * abs(v_C2) ** 2)
    return complex(energy, -q_int)


def xi2(p_i, v_C2, i_g):
    """First derivative of xi1: p_i - p - jq."""
    return p_i - v_C2 * i_g.conjugate()


def xi3(p_i_d1, v_C2, i_g, i_g_d1, i_L, C2):
    """Second derivative of xi1, using the supplied grid-current derivative."""
    return p_i_d1 - v_C2 * i_g_d1.conjugate() + (i_g - i_L) / C2 * i_g.conjugate()


def grid_current_derivatives(i_g, omega):
    """Steady-state approximations of the first two grid-current derivatives.

    Exact when the grid current is a balanced positive-sequence sinusoid.
    """
    return 1j * omega * i_g, -omega * omega * i_g


def reference_targets(r, C1):
    """Flat-output references from v_C1^r, q^r and their derivatives.

    Filter energies are neglected, which leaves a small steady-state offset
    in v_C1 once the filter carries current.

    Returns:
        tuple: (xi1_r, xi2_r, xi3_r, xi3_r_dot)
    """
    v, v1, v2, v3 = r.v_ref, r.v_ref_d1, r.v_ref_d2, r.v_ref_d3
    xi1_r = complex(0.5 * C1 * v * v, -r.q_ref_int)
    xi2_r = complex(C1 * v * v1, -r.q_ref)
    xi3_r = complex(C1 * (v1 * v1 + v * v2), -r.q_ref_d1)
    xi3_r_dot = complex(C1 * (3.0 * v1 * v2 + v * v3), -r.q_ref_d2)
    return xi1_r, xi2_r, xi3_r, xi3_r_dot


def auxiliary_input(e1, e2, e3, y, gains, xi3_r_dot):
    """State feedback with integral action for the integrator chain."""
    return xi3_r_dot - gains.k3 * e3 - gains.k2 * e2 - gains.k1 * e1 - gains.k0 * y


def auxiliary_from_modulation(mu, p_i_d2, v_C2, i_g, i_g_d1, i_g_d2, i_L, v_C1, L, C2):
    """Rate of xi3 produced by a given modulation index (inverse of modulation_index)."""
    i_g_conj = i_g.conjugate()
    return (p_i_d2
            + 2.0 * (i_g - i_L) / C2 * i_g_d1.conjugate()
            + i_g_d1 * i_g_conj / C2
            - v_C2 * i_g_d2.conjugate()
            - (mu * v_C1 - v_C2) / (L * C2) * i_g_conj)


def modulation_index(w, p_i_d2, v_C2, i_g, i_g_d1, i_g_d2, i_L, v_C1, L, C2, guard, state):
    """Linearizing modulation index for auxiliary input w.

    The law divides by v_C1 * conj(i_g); below either guard threshold the
    previously applied index is held instead.

    Returns:
        tuple: (mu, guarded)
    """
    if abs(i_g) < guard.i_guard or v_C1 < guard.v_guard:
        return state.last_mu, True
    i_g_conj = i_g.conjugate()
    numerator = (L * C2 * (p_i_d2 - v_C2 * i_g_d2.conjugate() - w)
                 + 2.0 * L * (i_g - i_L) * i_g_d1.conjugate()
                 + (v_C2 + L * i_g_d1) * i_g_conj)
    return numerator / (v_C1 * i_g_conj), False


def flat_coordinates(s, r, params, i_g_d1):
    """Flat-output chain of a plant state and its errors against the references.

    Returns:
        tuple: (FlatCoordinates, xi3_r_dot)
    """
    x1 = flat_output(s.v_C1, s.i_L, s.v_C2, s.q_int, params)
    x2 = xi2(r.p_i, s.v_C2, s.i_g)
    x3 = xi3(r.p_i_d1, s.v_C2, s.i_g, i_g_d1, s.i_L, params.C2)
    xi1_r, xi2_r, xi3_r, xi3_r_dot = reference_targets(r, params.C1)
    return FlatCoordinates(x1, x2, x3, x1 - xi1_r, x2 - xi2_r, x3 - xi3_r), xi3_r_dot


def control_step(s, r, gains, state, params, guard, y=None, commit=True):
    """One evaluation of the complete control law.

    Computes the flat-output chain, the tracking errors, the auxiliary input
    and the modulation index. The integral state y is read, never advanced:
    integration belongs to the simulation engine, which passes the stage
    value of y explicitly. With commit=False the controller state is left
    untouched (used for logged samples).

    Returns:
        tuple: (mu, FlatCoordinates)
    """
    if y is None:
        y = state.y
    i_g_d1, i_g_d2 = grid_current_derivatives(s.i_g, params.omega)
    flat, xi3_r_dot = flat_coordinates(s, r, params, i_g_d1)
    w = auxiliary_input(flat.e1, flat.e2, flat.e3, y, gains, xi3_r_dot)
    mu, guarded = modulation_index(w, r.p_i_d2, s.v_C2, s.i_g, i_g_d1, i_g_d2, s.i_L,
                                   s.v_C1, params.L, params.C2, guard, state)
    if commit:
        if guarded:
            state.guard_count += 1
            level = logging.WARNING if state.guard_count == 1 else logging.DEBUG
            logger.log(level, 'Modulation guard active (|i_g| = %.4g A, v_C1 = %.4g V); holding mu = %s '
                       '(%d activations so far)', abs(s.i_g), s.v_C1, mu, state.guard_count)
        else:
            state.last_mu = mu
    return mu, flat
