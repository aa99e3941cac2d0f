"""Power-invariant Clarke transforms between abc triples and complex alpha-beta values.

The formulas are elementwise, so the a, b, c fields may also be numpy arrays.
"""
import cmath
import math

from flatgrid.models import ThreePhase

SQRT_2_3 = math.sqrt(2.0 / 3.0)
SQRT3_2 = math.sqrt(3.0) / 2.0
TWO_PI_3 = 2.0 * math.pi / 3.0


def clarke_forward(x):
    """abc -> alpha + j*beta, discarding the zero-sequence component."""
    a, b, c = x
    alpha = SQRT_2_3 * (a - 0.5 * (b + c))
    beta = SQRT_2_3 * SQRT3_2 * (b - c)
    return alpha + 1j * beta


def clarke_inverse(x):
    """alpha + j*beta -> the unique zero-sum abc triple."""
    alpha, beta = x.real, x.imag
    a = SQRT_2_3 * alpha
    b = SQRT_2_3 * (-0.5 * alpha + SQRT3_2 * beta)
    c = SQRT_2_3 * (-0.5 * alpha - SQRT3_2 * beta)
    return ThreePhase(a, b, c)


def balanced_set(peak, angle):
    """Balanced positive-sequence triple with the given per-phase peak."""
    if peak < 0:
        raise ValueError(f'Peak amplitude must be non-negative, got {peak}')
    return ThreePhase(
        peak * math.cos(angle),
        peak * math.cos(angle - TWO_PI_3),
        peak * math.cos(angle + TWO_PI_3),
    )


def phase_peak(x):
    """Per-phase peak of the balanced set represented by x."""
    return SQRT_2_3 * abs(x)


def space_vector(peak, angle):
    """Complex value of balanced_set(peak, angle) without the abc round trip."""
    return math.sqrt(1.5) * peak * cmath.exp(1j * angle)
