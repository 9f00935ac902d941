"""PID synthesis for a desired crossover, phase margin and Nyquist slope.

The proportional gain and integral time place L(j omega_c) on the unit circle
at the requested margin whatever slope estimates are supplied; only the
derivative time, and therefore the achieved Nyquist slope, depends on them.
All formulas use tan of angle differences, which is pi-periodic, so the
synthesis is independent of the phase branch.
"""

import math
from typing import Optional

import numpy as np

from .logging_conf import configure_logging
from .lti import loop_response, phase_margin, wrap_angle
from .models import DeadTimePlant, DesignReport, DesignSpec, PidController, SlopeEstimate

logger = configure_logging("bode-pid-tuner.synthesis")

SLOPE_STEP = 1e-4
_DEGENERATE_COS = 1e-12
_DEGENERATE_DENOMINATOR = 1e-12
_STATIONARY = 1e-14


def synthesize_pid(phi_c: float, mag_c: float, slopes: SlopeEstimate, spec: DesignSpec) -> PidController:
    """Solve for (Kp, Ti, Td) from the plant's phase and gain at omega_c.

    Args:
        phi_c: Measured plant phase at omega_c, radians
        mag_c: Measured plant gain |G(j omega_c)|
        slopes: s_a, s_p at omega_c
        spec: Desired crossover, margin and slope

    Returns:
        PidController: Kp = |cos(Phi_d - phi_c)|/|G|,
        Td = [(s_a - s_p t1) t2 + (1 - s_a) t1 - s_p] / (2 omega_c),
        Ti = 1/(omega_c (Td omega_c - t1)), with t1 = tan(Phi_d - phi_c)
        and t2 = tan(psi_d - phi_c)

    Raises:
        ValueError: On a degenerate spec angle or when the formulas give Ti <= 0 or Td < 0
    """
    if not mag_c > 0.0:
        raise ValueError("plant gain at crossover must be positive")
    if not math.isclose(slopes.omega0, spec.omega_c, rel_tol=1e-9):
        raise ValueError(
            f"slopes were estimated at {slopes.omega0} rad/s, spec crossover is {spec.omega_c} rad/s"
        )

    margin_angle = spec.phi_d - phi_c
    slope_angle = spec.psi_d - phi_c
    if abs(math.cos(margin_angle)) < _DEGENERATE_COS or abs(math.cos(slope_angle)) < _DEGENERATE_COS:
        raise ValueError("degenerate spec angle")

    wc = spec.omega_c
    s_a, s_p = slopes.s_a, slopes.s_p
    t1 = math.tan(margin_angle)
    t2 = math.tan(slope_angle)

    kp = abs(math.cos(margin_angle)) / mag_c
    td = ((s_a - s_p * t1) * t2 + (1.0 - s_a) * t1 - s_p) / (2.0 * wc)
    integral_term = td * wc - t1
    if td < 0.0 or integral_term <= 0.0:
        raise ValueError("spec infeasible for PID structure at this frequency")
    ti = 1.0 / (wc * integral_term)

    logger.debug("Synthesized Kp=%.6g Ti=%.6g Td=%.6g at %.6g rad/s", kp, ti, td, wc)
    return PidController(kp=kp, ti=ti, td=td)


def nyquist_slope_psi(ti: float, td: float, omega0: float, phi0: float, slopes: SlopeEstimate) -> float:
    """Tangent direction of the loop's Nyquist curve at omega0, predicted from slope estimates.

    Returns phi0 + atan2(num, den); the result is not reduced.

    Raises:
        ValueError: If ti <= 0 or both atan2 arguments vanish
    """
    if not ti > 0.0:
        raise ValueError("ti must be positive")
    s_a, s_p = slopes.s_a, slopes.s_p
    product = td * ti * omega0**2
    numerator = (product + 1.0) + (product - 1.0) * s_a + s_p * ti * omega0
    denominator = s_a * ti * omega0 - (product - 1.0) * s_p
    if numerator == 0.0 and denominator == 0.0:
        raise ValueError("slope undefined")
    return phi0 + math.atan2(numerator, denominator)


def td_from_ti(ti: float, omega0: float, phi0: float, psi: float, slopes: SlopeEstimate) -> float:
    """Derivative time giving Nyquist slope psi at omega0 for a given integral time.

    Raises:
        ValueError: If the relation is degenerate or needs Td < 0
    """
    if not ti > 0.0:
        raise ValueError("ti must be positive")
    angle = psi - phi0
    if abs(math.cos(angle)) < _DEGENERATE_COS:
        raise ValueError("degenerate slope angle")
    s_a, s_p = slopes.s_a, slopes.s_p
    tangent = math.tan(angle)

    denominator = omega0**2 * ti * (1.0 + s_a + s_p * tangent)
    if abs(denominator) < _DEGENERATE_DENOMINATOR:
        raise ValueError("degenerate")
    numerator = s_a - 1.0 + s_p * tangent - ti * omega0 * (s_p - s_a * tangent)
    td = numerator / denominator
    if td < 0.0:
        raise ValueError("infeasible slope for PI(D) at this frequency")
    return td


def reduce_half_turn(angle: float, center: float) -> float:
    """Shift angle by a multiple of pi into (center - pi/2, center + pi/2]."""
    offset = angle - center
    return center + offset - math.pi * math.ceil((offset - math.pi / 2.0) / math.pi)


def measure_loop_slope(
    plant: DeadTimePlant,
    controller: PidController,
    omega_c: float,
    psi_d: Optional[float] = None,
    step: float = SLOPE_STEP,
) -> float:
    """Phase of dL/d omega at omega_c, by a central difference with relative step.

    Args:
        plant: The true plant
        controller: The controller in the loop
        omega_c: Frequency at which to measure
        psi_d: Desired slope; when given the result is reduced modulo pi
            into the half-turn centred on it
        step: Relative finite-difference step

    Returns:
        float: Slope angle in radians, principal value in (-pi, pi] when psi_d is None

    Raises:
        ValueError: If the derivative vanishes
    """
    points = np.array([omega_c * (1.0 + step), omega_c * (1.0 - step)])
    upper, lower = loop_response(plant, controller, points)
    derivative = complex((upper - lower) / (2.0 * omega_c * step))
    if abs(derivative) < _STATIONARY:
        raise ValueError("stationary point")
    angle = math.atan2(derivative.imag, derivative.real)
    if psi_d is None:
        return wrap_angle(angle)
    return reduce_half_turn(angle, psi_d)


def slope_error(achieved_psi: float, psi_d: float) -> float:
    """|psi - psi_d| / |psi_d| after reducing psi into psi_d's half-turn."""
    if psi_d == 0.0:
        raise ValueError("slope error undefined for a zero desired slope")
    return abs(reduce_half_turn(achieved_psi, psi_d) - psi_d) / abs(psi_d)


def verify_design(plant: DeadTimePlant, controller: PidController, spec: DesignSpec) -> DesignReport:
    """Measure crossover, margin and Nyquist slope the controller achieves on a plant.

    The slope is measured at the achieved (lowest) gain crossover.

    Raises:
        ValueError: If the loop has no gain crossover or is stationary there
    """
    margin, omega_c = phase_margin(plant, controller)
    psi = measure_loop_slope(plant, controller, omega_c, spec.psi_d)
    report = DesignReport(
        achieved_pm=margin,
        achieved_crossover=omega_c,
        achieved_psi=psi,
        slope_error_fraction=slope_error(psi, spec.psi_d),
    )
    logger.debug(
        "Verified design: crossover %.6g rad/s, margin %.3f deg, slope %.3f deg",
        omega_c,
        math.degrees(margin),
        math.degrees(psi),
    )
    return report
