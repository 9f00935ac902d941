"""Real-coded genetic search for parallel PID gains minimizing ITAE.

Candidates are (Kp, Ki, Kd) rows of a population array. A candidate whose
loop misses the Nyquist-slope cap, has no gain crossover, or diverges in
simulation gets infinite fitness. Fitness is evaluated for the whole
population at once and consumed strictly in row order, so results depend only
on the seed.
"""

import math
from typing import Dict, Iterable, Tuple

import numpy as np

from .logging_conf import configure_logging
from .models import Candidate, DeadTimePlant, DesignSpec, GaConfig, GainBounds, GaResult, PidController, SimConfig
from .simulate import itae_batch, simulate_batch
from .synthesis import verify_design

logger = configure_logging("bode-pid-tuner.ga")

Genes = Tuple[float, float, float]


def candidate_from_controller(controller: PidController) -> Candidate:
    """Parallel gains (Kp, Kp/Ti, Kp*Td) of a series-form controller.

    Raises:
        ValueError: If the controller has no integral or derivative action
    """
    return Candidate(kp=controller.kp, ki=controller.ki, kd=controller.kd)


def derive_bounds(reference: PidController, spread: float = 0.4) -> GainBounds:
    """Box [g(1 - spread), g(1 + spread)] around each parallel gain of reference.

    Raises:
        ValueError: If spread is outside (0, 1) or a reference gain is zero
    """
    if not 0.0 < spread < 1.0:
        raise ValueError("spread must lie in (0, 1)")
    gains = candidate_from_controller(reference)
    return GainBounds(
        kp=(gains.kp * (1.0 - spread), gains.kp * (1.0 + spread)),
        ki=(gains.ki * (1.0 - spread), gains.ki * (1.0 + spread)),
        kd=(gains.kd * (1.0 - spread), gains.kd * (1.0 + spread)),
    )


class FitnessEvaluator:
    """Memoized ITAE fitness under the slope-error death penalty."""

    def __init__(self, plant: DeadTimePlant, spec: DesignSpec, sim: SimConfig, slope_error_cap: float):
        self.plant = plant
        self.spec = spec
        self.sim = sim
        self.slope_error_cap = slope_error_cap
        self._fitness: Dict[Genes, float] = {}
        self._slope_error: Dict[Genes, float] = {}

    @property
    def evaluations(self) -> int:
        return len(self._fitness)

    def slope_error(self, genes: Iterable[float]) -> float:
        return self._slope_error.get(tuple(float(g) for g in genes), math.inf)

    def _slope_feasible(self, key: Genes) -> bool:
        controller = Candidate(kp=key[0], ki=key[1], kd=key[2]).to_controller()
        try:
            report = verify_design(self.plant, controller, self.spec)
        except ValueError as exc:
            logger.debug("Candidate %s rejected: %s", key, exc)
            self._slope_error[key] = math.inf
            return False
        self._slope_error[key] = report.slope_error_fraction
        return report.slope_error_fraction <= self.slope_error_cap

    def __call__(self, population: np.ndarray) -> np.ndarray:
        keys = [tuple(float(g) for g in row) for row in population]
        pending = []
        for key in keys:
            if key in self._fitness or key in pending:
                continue
            if self._slope_feasible(key):
                pending.append(key)
            else:
                self._fitness[key] = math.inf

        if pending:
            controllers = [Candidate(kp=k[0], ki=k[1], kd=k[2]).to_controller() for k in pending]
            values = itae_batch(simulate_batch(self.plant, controllers, self.sim))
            for key, value in zip(pending, values):
                self._fitness[key] = float(value)

        return np.array([self._fitness[key] for key in keys])


def _initial_population(
    rng: np.random.Generator, config: GaConfig, lows: np.ndarray, highs: np.ndarray
) -> np.ndarray:
    seeded = np.array([seed.as_array() for seed in config.seeds[: config.population]]).reshape(-1, 3)
    clipped = np.clip(seeded, lows, highs)
    if not np.array_equal(clipped, seeded):
        logger.info("Clipped %d seed candidate(s) into the gain bounds", int(np.any(clipped != seeded, axis=1).sum()))
    random_rows = rng.uniform(lows, highs, size=(config.population - len(clipped), 3))
    return np.vstack([clipped, random_rows])


def _tournament(rng: np.random.Generator, fitness: np.ndarray, count: int, size: int) -> np.ndarray:
    entrants = rng.integers(0, len(fitness), size=(count, size))
    # argmin keeps the first entrant on ties
    return entrants[np.arange(count), np.argmin(fitness[entrants], axis=1)]


def _offspring(
    rng: np.random.Generator,
    population: np.ndarray,
    fitness: np.ndarray,
    config: GaConfig,
    lows: np.ndarray,
    highs: np.ndarray,
) -> np.ndarray:
    count = config.population - config.elite_count
    first = population[_tournament(rng, fitness, count, config.tournament_size)]
    second = population[_tournament(rng, fitness, count, config.tournament_size)]

    spread = config.blend_alpha * np.abs(first - second)
    blended = rng.uniform(np.minimum(first, second) - spread, np.maximum(first, second) + spread)
    crossed = rng.random(count) < config.crossover_fraction
    children = np.where(crossed[:, None], blended, first)

    mutated = rng.random(children.shape) < config.mutation_fraction
    noise = rng.normal(0.0, config.mutation_scale * (highs - lows), size=children.shape)
    return np.clip(children + mutated * noise, lows, highs)


def evolve(plant: DeadTimePlant, spec: DesignSpec, sim: SimConfig, config: GaConfig) -> GaResult:
    """Minimize ITAE over (Kp, Ki, Kd) inside config.bounds under the slope-error cap.

    Args:
        plant: The true delayed plant used for both slope checks and simulation
        spec: Design targets; only psi_d enters the constraint
        sim: Simulation settings for the ITAE objective
        config: GA settings; bounds must be set

    Returns:
        GaResult: Best candidate, its ITAE and slope error, and the best-so-far
        fitness after initialization and after every generation

    Raises:
        ValueError: If bounds are missing or no feasible initial population is found
    """
    if config.bounds is None:
        raise ValueError("GA requires gain bounds")
    rng = np.random.default_rng(config.seed)
    lows, highs = config.bounds.lows(), config.bounds.highs()
    evaluate = FitnessEvaluator(plant, spec, sim, config.slope_error_cap)

    for attempt in range(max(1, config.max_resample)):
        population = _initial_population(rng, config, lows, highs)
        fitness = evaluate(population)
        if np.isfinite(fitness).any():
            break
        logger.info("Initial population fully infeasible, resampling (attempt %d)", attempt + 1)
    else:
        raise ValueError("bounds inconsistent with slope cap")

    best_row = population[int(np.argmin(fitness))].copy()
    best_itae = float(fitness.min())
    history = [best_itae]
    for generation in range(config.generations):
        elites = population[np.argsort(fitness, kind="stable")[: config.elite_count]]
        population = np.vstack([elites, _offspring(rng, population, fitness, config, lows, highs)])
        fitness = evaluate(population)
        # strict comparison keeps the earliest of equally fit candidates
        if fitness.min() < best_itae:
            best_row = population[int(np.argmin(fitness))].copy()
            best_itae = float(fitness.min())
        history.append(best_itae)
        logger.debug("Generation %d: best ITAE %.6g", generation + 1, best_itae)

    best = Candidate(kp=float(best_row[0]), ki=float(best_row[1]), kd=float(best_row[2]))
    result = GaResult(
        best=best,
        best_itae=best_itae,
        best_slope_error=evaluate.slope_error(best_row),
        history=tuple(history),
        evaluations=evaluate.evaluations,
        reproducible=config.seed is not None,
    )
    logger.info(
        "GA finished after %d generations and %d evaluations: ITAE %.6g, slope error %.3f",
        config.generations,
        result.evaluations,
        result.best_itae,
        result.best_slope_error,
    )
    return result
