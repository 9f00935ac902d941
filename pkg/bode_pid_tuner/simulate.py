"""Fixed-step time-domain simulation of the unity-feedback loop with dead time.

The rational part of the plant is realized in controller canonical form, the
PID acts on the error with a filtered derivative Td s/(1 + Td s/N), and the
dead time is a ring buffer of whole steps on the plant input. Each step is a
classical RK4 step with the delayed input held constant; for this linear
system RK4 reduces to a fixed matrix polynomial, which is precomputed once per
controller so a whole batch of controllers advances with one array operation
per step. Without dead time the control law is folded into the state
equations instead of being held over the step.
"""

import math
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, signal

from .logging_conf import configure_logging
from .models import DeadTimePlant, Metrics, PidController, SimConfig, StepResult

logger = configure_logging("bode-pid-tuner.simulate")

DIVERGENCE_LIMIT = 1e6
SETTLING_BAND = 0.02
FINAL_VALUE_FRACTION = 0.05
# RK4's stability interval on the negative real axis
_RK4_REAL_AXIS_LIMIT = 2.78


class BatchTrajectories(NamedTuple):
    """Outputs of a batch run: y[i, k] for controller i at t[k]."""

    t: np.ndarray
    y: np.ndarray
    diverged_at: np.ndarray
    dt: float


def effective_step(delay: float, dt: float) -> Tuple[float, int]:
    """Time step and delay length in whole steps.

    The requested step is kept when it divides the delay, otherwise it is
    reduced to delay/ceil(delay/dt).
    """
    if delay == 0.0:
        return dt, 0
    ratio = delay / dt
    nearest = round(ratio)
    if nearest >= 1 and abs(ratio - nearest) <= 1e-9 * ratio:
        return dt, int(nearest)
    steps = math.ceil(ratio)
    reduced = delay / steps
    logger.info("Reduced time step from %.6g s to %.6g s to fit the %.6g s delay", dt, reduced, delay)
    return reduced, steps


def _plant_state_space(plant: DeadTimePlant) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    if not plant.tf.is_proper:
        raise ValueError("improper rational part cannot be simulated")
    a, b, c, d = signal.tf2ss(plant.tf.num.as_array(), plant.tf.den.as_array())
    return np.atleast_2d(a), np.ravel(b), np.ravel(c), float(np.ravel(d)[0])


def _rk4_propagators(matrices: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """x+ = phi x + gamma b for x' = M x + b with b constant over the step."""
    size = matrices.shape[-1]
    eye = np.broadcast_to(np.eye(size), matrices.shape)
    hm = h * matrices
    hm2 = hm @ hm
    hm3 = hm2 @ hm
    hm4 = hm3 @ hm
    phi = eye + hm + hm2 / 2.0 + hm3 / 6.0 + hm4 / 24.0
    gamma = h * (eye + hm / 2.0 + hm2 / 6.0 + hm3 / 24.0)
    return phi, gamma


def _warn_if_stiff(matrices: np.ndarray, h: float) -> None:
    radius = np.abs(np.linalg.eigvals(h * matrices)).max()
    if radius > _RK4_REAL_AXIS_LIMIT:
        logger.warning(
            "dt=%.3g s is outside RK4's stability region for this loop (|h*lambda| = %.3g); "
            "expect a divergent result",
            h,
            radius,
        )


def _march(
    phi: np.ndarray,
    gain_u: np.ndarray,
    gain_r: np.ndarray,
    out_x: np.ndarray,
    feedthrough: float,
    ctrl_x: np.ndarray,
    ctrl_u: np.ndarray,
    ctrl_r: np.ndarray,
    delay_steps: int,
    samples: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Advance the batch; u = ctrl_x.X + ctrl_u*u_delayed + ctrl_r, y = out_x.X + feedthrough*u_delayed."""
    batch, size = gain_u.shape
    state = np.zeros((batch, size))
    ring = np.zeros((batch, max(delay_steps, 1)))
    outputs = np.zeros((batch, samples))
    diverged_at = np.full(batch, -1)
    alive = np.ones(batch, dtype=bool)

    loop_gain = 1.0 - ctrl_u

    for k in range(samples):
        if delay_steps:
            slot = k % delay_steps
            delayed = ring[:, slot].copy()
            ring[:, slot] = (ctrl_x * state).sum(axis=1) + ctrl_u * delayed + ctrl_r
        else:
            delayed = ((ctrl_x * state).sum(axis=1) + ctrl_r) / loop_gain

        output = (state * out_x).sum(axis=1) + feedthrough * delayed
        blown = alive & ~(np.abs(output) <= DIVERGENCE_LIMIT)
        if blown.any():
            diverged_at[blown] = k
            alive &= ~blown
            state[blown] = 0.0
            ring[blown] = 0.0
        outputs[:, k] = output

        if k + 1 < samples:
            state = (phi * state[:, None, :]).sum(axis=2) + gain_u * delayed[:, None] + gain_r
            state[~alive] = 0.0

    return outputs, diverged_at


def _time_grid(plant: DeadTimePlant, config: SimConfig) -> Tuple[np.ndarray, float, int]:
    dt, delay_steps = effective_step(plant.delay, config.dt)
    samples = int(round(config.horizon / dt)) + 1
    return np.arange(samples) * dt, dt, delay_steps


def simulate_batch(
    plant: DeadTimePlant, controllers: Sequence[PidController], config: Optional[SimConfig] = None
) -> BatchTrajectories:
    """Unit-step responses of one plant under many controllers, advanced together.

    Args:
        plant: The delayed plant
        controllers: Controllers to simulate, one trajectory each, in order
        config: Step size, horizon and derivative filter coefficient

    Returns:
        BatchTrajectories: y has one row per controller; diverged_at holds the
        first sample with |y| > 1e6 or -1

    Raises:
        ValueError: If the plant's rational part is improper
    """
    config = config or SimConfig()
    a, b, c, d = _plant_state_space(plant)
    t, dt, delay_steps = _time_grid(plant, config)

    kp = np.array([ctrl.kp for ctrl in controllers], dtype=float)
    ti = np.array([ctrl.ti for ctrl in controllers], dtype=float)
    td = np.array([ctrl.td for ctrl in controllers], dtype=float)
    batch = len(controllers)
    n = a.shape[0]
    size = n + 2

    has_derivative = td > 0.0
    filter_rate = np.where(has_derivative, config.deriv_filter_n / np.where(has_derivative, td, 1.0), 0.0)
    filter_gain = np.where(has_derivative, config.deriv_filter_n, 0.0)
    error_gain = kp * (1.0 + filter_gain)

    # states: plant x (n), error integral z, derivative filter state f
    matrices = np.zeros((batch, size, size))
    matrices[:, :n, :n] = a
    matrices[:, n, :n] = -c
    matrices[:, n + 1, :n] = -filter_rate[:, None] * c[None, :]
    matrices[:, n + 1, n + 1] = -filter_rate

    input_u = np.zeros((batch, size))
    input_u[:, :n] = b
    input_u[:, n] = -d
    input_u[:, n + 1] = -filter_rate * d
    input_r = np.zeros((batch, size))
    input_r[:, n] = 1.0
    input_r[:, n + 1] = filter_rate

    ctrl_x = np.zeros((batch, size))
    ctrl_x[:, :n] = -error_gain[:, None] * c[None, :]
    ctrl_x[:, n] = kp / ti
    ctrl_x[:, n + 1] = -kp * filter_gain

    ctrl_u = -error_gain * d
    if delay_steps == 0:
        loop_gain = 1.0 - ctrl_u
        if np.any(loop_gain == 0.0):
            raise ValueError("algebraic loop: plant feedthrough cancels the controller")
        # without dead time u is an algebraic function of the state and is folded into the dynamics
        matrices = matrices + input_u[:, :, None] * (ctrl_x / loop_gain[:, None])[:, None, :]
        input_r = input_r + input_u * (error_gain / loop_gain)[:, None]
        input_u = np.zeros_like(input_u)

    _warn_if_stiff(matrices, dt)
    phi, gamma = _rk4_propagators(matrices, dt)
    out_x = np.zeros(size)
    out_x[:n] = c

    outputs, diverged_at = _march(
        phi,
        np.einsum("pij,pj->pi", gamma, input_u),
        np.einsum("pij,pj->pi", gamma, input_r),
        out_x,
        d,
        ctrl_x,
        ctrl_u,
        error_gain,
        delay_steps,
        len(t),
    )
    return BatchTrajectories(t=t, y=outputs, diverged_at=diverged_at, dt=dt)


def itae_batch(trajectories: BatchTrajectories) -> np.ndarray:
    """ITAE of every trajectory in a batch; inf for diverged runs."""
    errors = np.abs(1.0 - trajectories.y)
    values = integrate.trapezoid(trajectories.t[None, :] * errors, trajectories.t, axis=1)
    return np.where(trajectories.diverged_at >= 0, np.inf, values)


def _to_step_result(t: np.ndarray, y: np.ndarray, diverged_at: int) -> StepResult:
    if diverged_at >= 0:
        cut = diverged_at + 1
        return StepResult(
            t=t[:cut], y=y[:cut], e=1.0 - y[:cut], metrics=Metrics.divergent(), diverged=True
        )
    partial = StepResult(t=t, y=y, e=1.0 - y)
    return partial.model_copy(update={"metrics": compute_metrics(partial)})


def step_closed_loop(
    plant: DeadTimePlant, controller: PidController, config: Optional[SimConfig] = None
) -> StepResult:
    """Closed-loop unit-step response of plant under controller.

    A run whose output exceeds 1e6 in magnitude is returned truncated and
    flagged ``diverged`` with infinite metrics instead of raising.

    Raises:
        ValueError: If the plant's rational part is improper
    """
    batch = simulate_batch(plant, [controller], config)
    result = _to_step_result(batch.t, batch.y[0], int(batch.diverged_at[0]))
    if result.diverged:
        logger.warning("Closed loop diverged at t=%.4g s", result.t[-1])
    return result


def step_open_loop(plant: DeadTimePlant, config: Optional[SimConfig] = None) -> StepResult:
    """Open-loop response of the plant to a unit step input; metrics are left empty."""
    config = config or SimConfig()
    a, b, c, d = _plant_state_space(plant)
    t, dt, delay_steps = _time_grid(plant, config)
    phi, gamma = _rk4_propagators(a[None, :, :], dt)
    size = a.shape[0]

    outputs, diverged_at = _march(
        phi,
        np.einsum("pij,j->pi", gamma, b),
        np.zeros((1, size)),
        c,
        d,
        np.zeros((1, size)),
        np.zeros(1),
        np.ones(1),
        delay_steps,
        len(t),
    )
    cut = int(diverged_at[0]) + 1 if diverged_at[0] >= 0 else len(t)
    return StepResult(t=t[:cut], y=outputs[0, :cut], e=1.0 - outputs[0, :cut], diverged=cut < len(t))


def compute_metrics(result: StepResult) -> Metrics:
    """ITAE, overshoot, 2 % settling time and steady-state error of a unit-step response.

    The final value is the mean of the last 5 % of samples. Settling time is
    the first sample after the last one outside the +-2 % band around it.

    Raises:
        ValueError: If the final value is zero, which leaves overshoot undefined
    """
    t, y, e = result.t, result.y, result.e
    tail = max(1, int(math.ceil(FINAL_VALUE_FRACTION * len(y))))
    y_final = float(np.mean(y[-tail:]))
    if abs(y_final) < 1e-9:
        raise ValueError("overshoot undefined: final value is zero")

    abs_error = np.abs(e)
    itae = float(integrate.trapezoid(t * abs_error, t)) if len(t) > 1 else 0.0
    iae = float(integrate.trapezoid(abs_error, t)) if len(t) > 1 else 0.0
    ise = float(integrate.trapezoid(e**2, t)) if len(t) > 1 else 0.0
    overshoot = max(0.0, (float(np.max(y)) - y_final) / y_final)

    outside = np.flatnonzero(np.abs(y - y_final) > SETTLING_BAND * abs(y_final))
    if outside.size == 0:
        settling = 0.0
    else:
        last = int(outside[-1])
        settling = float(t[last + 1]) if last + 1 < len(t) else float(t[-1])

    rise_time = None
    low = np.flatnonzero(y >= 0.1 * y_final)
    high = np.flatnonzero(y >= 0.9 * y_final)
    if y_final > 0.0 and low.size and high.size:
        rise_time = float(t[high[0]] - t[low[0]])

    return Metrics(
        itae=itae,
        overshoot=overshoot,
        settling_time_2pct=settling,
        steady_state_error=abs(1.0 - y_final),
        rise_time=rise_time,
        iae=iae,
        ise=ise,
    )
