"""Logarithmic amplitude and phase slopes of a frequency response.

s_a = omega * d ln|G| / d omega and s_p = omega * d arg G / d omega. The
finite-difference estimate is the ground truth; the Bode estimates read both
slopes off a single frequency-response sample plus the static gain. They are
only meaningful for stable minimum-phase rational parts, which is not checked.
"""

import math

from .logging_conf import configure_logging
from .lti import freq_response, static_gain
from .models import DeadTimePlant, RationalTf, SlopeEstimate, SlopeMethod

logger = configure_logging("bode-pid-tuner.slopes")

EXACT_STEP = 1e-5
_TWO_OVER_PI = 2.0 / math.pi


def slopes_exact(plant: DeadTimePlant, omega0: float, step: float = EXACT_STEP) -> SlopeEstimate:
    """Central differences in ln(omega) of ln|G| and of the unwrapped phase.

    Args:
        plant: The (delayed) plant
        omega0: Frequency in rad/s
        step: Relative step h; samples are taken at omega0*exp(+-h)

    Returns:
        SlopeEstimate: method = exact

    Raises:
        ValueError: If omega0 <= 0 or a sample falls on a pole
    """
    if not omega0 > 0.0:
        raise ValueError("omega0 must be positive")
    upper = freq_response(plant, omega0 * math.exp(step))
    lower = freq_response(plant, omega0 * math.exp(-step))
    if upper.magnitude == 0.0 or lower.magnitude == 0.0:
        raise ValueError("amplitude slope undefined at a zero of the plant")

    s_a = (math.log(upper.magnitude) - math.log(lower.magnitude)) / (2.0 * step)
    s_p = (upper.phase - lower.phase) / (2.0 * step)
    return SlopeEstimate(omega0=omega0, s_a=s_a, s_p=s_p, method=SlopeMethod.EXACT)


def _bode_estimate(plant: DeadTimePlant, omega0: float, method: SlopeMethod) -> SlopeEstimate:
    if not omega0 > 0.0:
        raise ValueError("omega0 must be positive")
    try:
        gain = static_gain(plant)
    except ValueError as exc:
        raise ValueError("Bode amplitude relation requires finite nonzero static gain") from exc
    if gain == 0.0:
        raise ValueError("Bode amplitude relation requires finite nonzero static gain")

    point = freq_response(plant, omega0)
    if point.magnitude == 0.0:
        raise ValueError("Bode phase relation undefined at a zero of the plant")

    s_a = _TWO_OVER_PI * (point.phase + plant.delay * omega0)
    s_p = point.phase + _TWO_OVER_PI * (math.log(abs(gain)) - math.log(point.magnitude))
    return SlopeEstimate(omega0=omega0, s_a=s_a, s_p=s_p, method=method)


def slopes_bode(tf: RationalTf, omega0: float) -> SlopeEstimate:
    """Bode-integral point estimates for a delay-free rational plant.

    s_a ~ (2/pi) arg G(j omega0)
    s_p ~ arg G(j omega0) + (2/pi) (ln|K_g| - ln|G(j omega0)|)

    Raises:
        ValueError: If the static gain is undefined or zero
    """
    return _bode_estimate(DeadTimePlant(tf=tf, delay=0.0), omega0, SlopeMethod.BODE)


def slopes_bode_delayed(plant: DeadTimePlant, omega0: float) -> SlopeEstimate:
    """Bode-integral estimates corrected for a pure delay.

    The delay's phase lag is added back before the amplitude-slope estimate;
    the phase-slope estimate uses the delayed phase as measured.

    Raises:
        ValueError: If the static gain of the rational part is undefined or zero
    """
    return _bode_estimate(plant, omega0, SlopeMethod.BODE_DELAYED)
