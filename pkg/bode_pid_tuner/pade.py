"""Diagonal Padé approximation of the dead-time term exp(-sL)."""

import math
from fractions import Fraction
from typing import List

import numpy as np

from .logging_conf import configure_logging
from .lti import polynomial_phase, series_rational
from .models import DeadTimePlant, Polynomial, RationalTf

logger = configure_logging("bode-pid-tuner.pade")

MAX_EXACT_ORDER = 10


def pade_coefficients(order: int) -> List[Fraction]:
    """(2r-k)!/(k!(r-k)!) for k = 0..r, in exact arithmetic."""
    return [
        Fraction(math.factorial(2 * order - k), math.factorial(k) * math.factorial(order - k))
        for k in range(order + 1)
    ]


def pade_tf(delay: float, order: int = 1, monic: bool = False) -> RationalTf:
    """Rational approximation N_r(sL)/D_r(sL) of exp(-sL).

    Coefficients are the factorial sums verbatim, not normalized, unless
    ``monic`` is set; then both polynomials are divided by the leading
    denominator coefficient, which turns the first-order factor into
    (-s + 2/L)/(s + 2/L).

    Args:
        delay: L in seconds, >= 0
        order: r, 0 <= r <= 10
        monic: Normalize to a monic denominator

    Returns:
        RationalTf: The all-pass approximant (1/1 when L = 0 or r = 0)

    Raises:
        ValueError: On a negative delay or an order outside [0, 10]
    """
    if not math.isfinite(delay) or delay < 0.0:
        raise ValueError("delay must be a finite number >= 0")
    if order < 0:
        raise ValueError("Padé order must be >= 0")
    if order > MAX_EXACT_ORDER:
        raise ValueError("order too large for exact factorial path")
    if delay == 0.0 or order == 0:
        return RationalTf.unity()

    factors = pade_coefficients(order)
    # index k holds the s^k coefficient; reversed below into descending powers
    den_ascending = [float(c) * delay**k for k, c in enumerate(factors)]
    num_ascending = [-value if k % 2 else value for k, value in enumerate(den_ascending)]

    num = num_ascending[::-1]
    den = den_ascending[::-1]
    if monic:
        lead = den[0]
        num = [c / lead for c in num]
        den = [c / lead for c in den]
    return RationalTf(num=Polynomial(coeffs=tuple(num)), den=Polynomial(coeffs=tuple(den)))


def rationalize(plant: DeadTimePlant, order: int = 1, monic: bool = True) -> RationalTf:
    """Delay-free surrogate of a delayed plant: G(s) * N_r(sL)/D_r(sL).

    Args:
        plant: The delayed plant
        order: Padé order r
        monic: Normalize the Padé factor before multiplying

    Returns:
        RationalTf: The rational approximation; its implied delay is 0
    """
    approximant = pade_tf(plant.delay, order, monic=monic)
    result = series_rational(plant.tf, approximant)
    logger.debug(
        "Rationalized delay %.6g s with order %d: degree %d/%d",
        plant.delay,
        order,
        result.num.degree,
        result.den.degree,
    )
    return result


def pade_delay_phase_error(delay: float, order: int, omega: float) -> float:
    """|arg pade_tf(L, r)(j omega) - (-omega L)|, the approximant's phase error."""
    approximant = pade_tf(delay, order)
    phase = polynomial_phase(approximant.num, omega) - polynomial_phase(approximant.den, omega)
    return float(abs(phase[0] + omega * delay))


def pade_magnitude(delay: float, order: int, omegas: np.ndarray) -> np.ndarray:
    """|N_r(j omega L)/D_r(j omega L)| over a frequency grid; 1 for an exact all-pass."""
    approximant = pade_tf(delay, order)
    s = 1j * np.asarray(omegas, dtype=float)
    return np.abs(np.polyval(approximant.num.as_array(), s) / np.polyval(approximant.den.as_array(), s))
