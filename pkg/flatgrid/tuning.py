"""Eigenvalue assignment for the tracking-error system.

The error state (e1, e2, e3, y) evolves under a companion-like matrix whose
characteristic polynomial is s^4 + k3 s^3 + k2 s^2 + k1 s + k0, so placing
the four poles reduces to expanding the product of (s - p_i).
"""
import math

import numpy as np

from flatgrid.errors import ConfigurationError
from flatgrid.models import AssignmentReport, ControllerGains, PoleSet

# sigma = factor / ts: 4.6 for the 1% band, 4.0 for the 2% band
DEFAULT_SETTLE_FACTOR = 4.6
RESIDUAL_TOLERANCE = 1e-9


def poles_from_spec(spec, settle_factor=DEFAULT_SETTLE_FACTOR):
    """Complex-conjugate pole pair for a settling time and damping ratio.

    Returns:
        tuple: (p, conj(p)) with the upper-half-plane pole first
    """
    is_valid, message = spec.validate()
    if not is_valid:
        raise ConfigurationError(message, field='pole spec')
    sigma = settle_factor / spec.ts
    omega_d = sigma * math.sqrt(1.0 - spec.zeta ** 2) / spec.zeta
    return complex(-sigma, omega_d), complex(-sigma, -omega_d)


def gains_from_poles(poles):
    """Feedback gains placing the error-system poles at the given locations."""
    if not isinstance(poles, PoleSet):
        poles = PoleSet(tuple(complex(p) for p in poles))
    is_valid, message = poles.validate()
    if not is_valid:
        raise ConfigurationError(message, field='pole set')
    coeffs = np.poly(np.asarray(poles.poles, dtype=complex))
    imag = np.max(np.abs(np.imag(coeffs)))
    if imag > 1e-9 * np.max(np.abs(coeffs)):
        raise ConfigurationError('pole set yields complex polynomial coefficients', field='pole set')
    c3, c2, c1, c0 = (float(c) for c in np.real(coeffs[1:]))
    return ControllerGains(k1=c1, k2=c2, k3=c3, k0=c0)


def characteristic_polynomial(gains):
    """Coefficients (1, k3, k2, k1, k0), highest power first."""
    return np.array([1.0, gains.k3, gains.k2, gains.k1, gains.k0])


def closed_loop_poles(gains):
    """Roots of the error-system characteristic polynomial."""
    return [complex(p) for p in np.roots(characteristic_polynomial(gains))]


def error_system_matrix(gains):
    """State matrix of (e1, e2, e3, y): e1' = e2, e2' = e3, e3' = -K x, y' = e1."""
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [-gains.k1, -gains.k2, -gains.k3, -gains.k0],
        [1.0, 0.0, 0.0, 0.0],
    ])


def verify_assignment(gains, poles, tolerance=RESIDUAL_TOLERANCE):
    """Evaluate det(sI - A) at each target pole.

    Residuals are scaled by max(1, |s|^4) so fast and slow poles compare on
    the same footing.
    """
    if isinstance(poles, PoleSet):
        poles = poles.poles
    A = error_system_matrix(gains)
    identity = np.eye(4)
    residuals = []
    for s in poles:
        s = complex(s)
        det = np.linalg.det(s * identity - A)
        residuals.append(float(abs(det) / max(1.0, abs(s) ** 4)))
    return AssignmentReport(poles=tuple(complex(p) for p in poles), residuals=tuple(residuals),
                            tolerance=tolerance)


def tune(fast, slow, settle_factor=DEFAULT_SETTLE_FACTOR):
    """Gains for two pole pairs given as PoleSpecs.

    Returns:
        tuple: (ControllerGains, PoleSet, AssignmentReport)
    """
    pole_set = PoleSet(poles_from_spec(fast, settle_factor) + poles_from_spec(slow, settle_factor))
    gains = gains_from_poles(pole_set)
    return gains, pole_set, verify_assignment(gains, pole_set)


# Gains as printed for the 1 ms / 10 ms, 0.707 design (3 significant figures)
PUBLISHED_GAINS = ControllerGains(k1=4.28e10, k2=5.12e7, k3=1.01e4, k0=1.79e13)
