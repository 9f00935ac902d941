"""Polynomial and transfer-function algebra for delayed rational plants.

Frequency responses report an unwrapped phase. The branch is chosen by summing
the phase contributions of the polynomial roots, each of which is continuous
in omega, and then snapping the exact principal value onto that branch. A
numeric unwrap on a log grid from the same near-zero anchor is kept as the
fallback for roots sitting on the imaginary axis.
"""

import math
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .logging_conf import configure_logging
from .models import DeadTimePlant, FrequencyPoint, PidController, Polynomial, RationalTf

logger = configure_logging("bode-pid-tuner.lti")

CROSSOVER_SEARCH_RANGE: Tuple[float, float] = (1e-4, 1e4)
CROSSOVER_GRID_PER_DECADE = 100
CROSSOVER_RTOL = 1e-10
PHASE_ANCHOR = 1e-9
UNWRAP_GRID_PER_DECADE = 400

_POLE_TOLERANCE = 1e-14
_AXIS_ROOT_TOLERANCE = 1e-12

Omega = Union[float, np.ndarray]


def make_plant(num: Sequence[float], den: Sequence[float], delay: float = 0.0) -> DeadTimePlant:
    """Build a validated plant num(s)/den(s) * exp(-delay*s).

    Args:
        num: Numerator coefficients, descending powers of s
        den: Denominator coefficients, descending powers of s
        delay: Pure dead time in seconds

    Returns:
        DeadTimePlant: The plant with coefficients stored exactly as given

    Raises:
        ValueError: On a zero denominator, a negative delay or a zero leading coefficient
    """
    den_values = tuple(float(c) for c in den)
    if len(den_values) == 0 or all(c == 0.0 for c in den_values):
        raise ValueError("zero denominator")
    return DeadTimePlant(
        tf=RationalTf(
            num=Polynomial(coeffs=tuple(float(c) for c in num)),
            den=Polynomial(coeffs=den_values),
        ),
        delay=float(delay),
    )


def polymul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact coefficient convolution of two polynomials."""
    return Polynomial(coeffs=tuple(float(c) for c in np.convolve(a.as_array(), b.as_array())))


def series_rational(a: RationalTf, b: RationalTf) -> RationalTf:
    """Series connection a*b without any pole/zero cancellation."""
    return RationalTf(num=polymul(a.num, b.num), den=polymul(a.den, b.den))


def static_gain(system: Union[DeadTimePlant, RationalTf]) -> float:
    """num(0)/den(0); the delay does not change it.

    Raises:
        ValueError: If den(0) = 0 (integrating plant)
    """
    tf = system.tf if isinstance(system, DeadTimePlant) else system
    den0 = tf.den.coeffs[-1]
    if den0 == 0.0:
        raise ValueError("static gain undefined: Bode amplitude relation inapplicable")
    return tf.num.coeffs[-1] / den0


def _check_not_at_pole(den: np.ndarray, omegas: np.ndarray, values: np.ndarray) -> None:
    powers = np.arange(len(den) - 1, -1, -1)
    scale = (np.abs(den)[None, :] * omegas[:, None] ** powers[None, :]).sum(axis=1)
    if np.any(np.abs(values) <= _POLE_TOLERANCE * scale):
        raise ValueError("evaluation at pole")


def _root_phase_sum(coeffs: np.ndarray, omegas: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Continuous phase of a polynomial along j*omega, up to a constant.

    Returns the sum of arg(1 - j*omega/z) over nonzero roots plus pi/2 per
    root at the origin, and whether a root sits on the imaginary axis (where
    this sum jumps).
    """
    nonzero = np.flatnonzero(coeffs)
    last = nonzero[-1]
    origin_order = len(coeffs) - 1 - last
    roots = np.roots(coeffs[: last + 1])
    on_axis = bool(
        np.any(
            (np.abs(roots.real) <= _AXIS_ROOT_TOLERANCE * np.maximum(1.0, np.abs(roots)))
            & (roots.imag != 0.0)
        )
    )
    total = np.full(omegas.shape, origin_order * math.pi / 2.0)
    if roots.size:
        total = total + np.angle(1.0 - 1j * omegas[:, None] / roots[None, :]).sum(axis=1)
    return total, on_axis


def polynomial_phase_numeric(poly: Polynomial, omega: float, anchor: float = PHASE_ANCHOR) -> float:
    """Unwrapped phase of poly(j*omega) by numeric unwrapping from a near-zero anchor."""
    coeffs = poly.as_array()
    if poly.is_zero:
        return 0.0
    anchor = min(anchor, omega / 10.0)
    decades = math.log10(omega / anchor)
    count = max(2, int(math.ceil(decades * UNWRAP_GRID_PER_DECADE)) + 1)
    grid = np.geomspace(anchor, omega, count)
    phases = np.unwrap(np.angle(np.polyval(coeffs, 1j * grid)))
    return float(phases[-1])


def polynomial_phase(poly: Polynomial, omegas: Omega, anchor: float = PHASE_ANCHOR) -> np.ndarray:
    """Unwrapped phase of poly(j*omega), continuous from the principal value at the anchor."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if poly.is_zero:
        return np.zeros(w.shape)
    coeffs = poly.as_array()
    anchor = min(anchor, float(w.min()) / 10.0)

    branch, on_axis = _root_phase_sum(coeffs, np.concatenate(([anchor], w)))
    if on_axis:
        logger.debug("Root on the imaginary axis; unwrapping phase numerically")
        return np.array([polynomial_phase_numeric(poly, float(omega), anchor) for omega in w])

    base = float(np.angle(np.polyval(coeffs, 1j * anchor)))
    target = base + branch[1:] - branch[0]
    principal = np.angle(np.polyval(coeffs, 1j * w))
    return principal + 2.0 * math.pi * np.round((target - principal) / (2.0 * math.pi))


def rational_response(tf: RationalTf, omegas: Omega) -> Tuple[np.ndarray, np.ndarray]:
    """Complex value and unwrapped phase of tf(j*omega) over a frequency array.

    Raises:
        ValueError: If omega <= 0 or tf has a pole at j*omega
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(w <= 0.0):
        raise ValueError("omega must be positive")
    den = tf.den.as_array()
    den_values = np.polyval(den, 1j * w)
    _check_not_at_pole(den, w, den_values)
    values = np.polyval(tf.num.as_array(), 1j * w) / den_values
    phase = polynomial_phase(tf.num, w) - polynomial_phase(tf.den, w)
    return values, phase


def freq_response(plant: DeadTimePlant, omega: float) -> FrequencyPoint:
    """Magnitude and unwrapped phase of the delayed plant at one frequency.

    Args:
        plant: The plant to evaluate
        omega: Frequency in rad/s, > 0

    Returns:
        FrequencyPoint: |G(j omega)| and arg G(j omega) - delay*omega
    """
    values, phase = rational_response(plant.tf, omega)
    return FrequencyPoint(
        omega=float(omega),
        magnitude=float(abs(values[0])),
        phase=float(phase[0]) - plant.delay * float(omega),
    )


def bode_curve(plant: DeadTimePlant, omegas: Sequence[float]) -> List[FrequencyPoint]:
    """Frequency response over a grid, phase continuous along the grid."""
    w = np.asarray(omegas, dtype=float)
    values, phase = rational_response(plant.tf, w)
    phase = phase - plant.delay * w
    return [
        FrequencyPoint(omega=float(omega), magnitude=float(abs(value)), phase=float(angle))
        for omega, value, angle in zip(w, values, phase)
    ]


def controller_response(controller: PidController, omegas: Omega) -> np.ndarray:
    """K(j omega) = Kp (1 + 1/(j omega Ti) + j omega Td)."""
    w = np.asarray(omegas, dtype=float)
    return controller.kp * (1.0 + 1.0 / (1j * w * controller.ti) + 1j * w * controller.td)


def loop_response(plant: DeadTimePlant, controller: PidController, omegas: Omega) -> np.ndarray:
    """L(j omega) = G(j omega) exp(-j omega delay) K(j omega) as complex values."""
    w = np.asarray(omegas, dtype=float)
    num = plant.tf.num.as_array()
    den = plant.tf.den.as_array()
    plant_values = np.polyval(num, 1j * w) / np.polyval(den, 1j * w)
    return plant_values * np.exp(-1j * w * plant.delay) * controller_response(controller, w)


def crossover_frequency(
    plant: DeadTimePlant,
    controller: PidController,
    search_range: Tuple[float, float] = CROSSOVER_SEARCH_RANGE,
) -> float:
    """Lowest frequency where |L(j omega)| = 1.

    The range is scanned on a log grid for the first sign change of
    ln|L|, which is then refined by bisection on ln(omega).

    Raises:
        ValueError: If |L| - 1 does not change sign on the range
    """
    low, high = (math.log(bound) for bound in search_range)
    decades = (high - low) / math.log(10.0)
    log_grid = np.linspace(low, high, int(math.ceil(decades * CROSSOVER_GRID_PER_DECADE)) + 1)

    def log_gain(log_omega: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return float(np.log(np.abs(loop_response(plant, controller, math.exp(log_omega)))))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gains = np.log(np.abs(loop_response(plant, controller, np.exp(log_grid))))

    exact = np.flatnonzero(gains == 0.0)
    changes = np.flatnonzero(np.sign(gains[:-1]) * np.sign(gains[1:]) < 0.0)
    first_change = int(changes[0]) if changes.size else None
    if exact.size and (first_change is None or exact[0] <= first_change):
        return float(math.exp(log_grid[exact[0]]))
    if first_change is None:
        raise ValueError("no gain crossover found")

    root = optimize.bisect(
        log_gain, log_grid[first_change], log_grid[first_change + 1], xtol=CROSSOVER_RTOL
    )
    omega_c = math.exp(root)
    logger.debug("Gain crossover at %.10g rad/s", omega_c)
    return omega_c


def wrap_angle(angle: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def phase_margin(plant: DeadTimePlant, controller: PidController) -> Tuple[float, float]:
    """Phase margin (radians) at the lowest gain crossover, and that crossover.

    Returns:
        Tuple[float, float]: (pi + arg L(j omega_c) wrapped into (-pi, pi], omega_c)
    """
    omega_c = crossover_frequency(plant, controller)
    loop = complex(loop_response(plant, controller, omega_c))
    return wrap_angle(math.pi + math.atan2(loop.imag, loop.real)), omega_c
