import math
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .ga import candidate_from_controller, derive_bounds, evolve
from .logging_conf import configure_logging
from .lti import bode_curve, freq_response, static_gain
from .models import (
    DeadTimePlant,
    DesignSpec,
    GaConfig,
    PidController,
    SimConfig,
    StepResult,
    TuneMethod,
    TuneReport,
)
from .pade import pade_delay_phase_error, pade_magnitude, rationalize
from .simulate import step_closed_loop
from .slopes import slopes_bode, slopes_bode_delayed, slopes_exact
from .synthesis import synthesize_pid, verify_design

logger = configure_logging("bode-pid-tuner.pipelines")

DELAY_IGNORED_NOTE = "delay ignored (order 0)"
# one decade either side of the analysis frequency, which sits at the middle point
BAND_DECADES = 1.0
BAND_POINTS = 21


class TuneOutcome(NamedTuple):
    """A tuning report together with the step response it summarizes."""

    report: TuneReport
    step: StepResult


class TuningPipeline:
    """Analysis, tuning and comparison pipelines shared by the CLI and the tool server."""

    @staticmethod
    def analyze(plant: DeadTimePlant, omega_c: float, pade_order: int = 1) -> Dict[str, Any]:
        """Frequency point, static gain and the three slope estimates at omega_c.

        Also reports the Bode curve one decade either side of omega_c and how far
        the Padé surrogate's gain strays from 1 over that band.

        The plain Bode estimate is taken on the Padé-rationalized plant, the
        delayed estimate on the true plant. An estimate that does not apply
        (integrating plant) is reported as None with a note.

        Args:
            plant: The delayed plant
            omega_c: Analysis frequency in rad/s
            pade_order: Order of the rational delay surrogate

        Returns:
            Dict[str, Any]: JSON-ready analysis document
        """
        point = freq_response(plant, omega_c)
        notes: List[str] = []
        try:
            gain: Optional[float] = static_gain(plant)
        except ValueError as exc:
            gain = None
            notes.append(str(exc))

        rational = DeadTimePlant(tf=rationalize(plant, pade_order), delay=0.0)
        estimates = {
            "exact": lambda: slopes_exact(plant, omega_c),
            "bode": lambda: slopes_bode(rational.tf, omega_c),
            "bode_delayed": lambda: slopes_bode_delayed(plant, omega_c),
        }
        slopes: Dict[str, Optional[Dict[str, Any]]] = {}
        for name, estimate in estimates.items():
            try:
                slopes[name] = estimate().to_dict()
            except ValueError as exc:
                slopes[name] = None
                notes.append(f"{name}: {exc}")

        band = omega_c * np.logspace(-BAND_DECADES, BAND_DECADES, BAND_POINTS)
        pade_gain_error = np.abs(pade_magnitude(plant.delay, pade_order, band) - 1.0)

        return {
            "omega": omega_c,
            "frequency_point": point.to_dict(),
            "bode": [p.to_dict() for p in bode_curve(plant, band)],
            "static_gain": gain,
            "slopes": slopes,
            "pade_order": pade_order,
            "pade_phase_error_deg": math.degrees(pade_delay_phase_error(plant.delay, pade_order, omega_c)),
            "pade_magnitude_error": float(pade_gain_error.max()),
            "notes": notes,
        }

    @staticmethod
    def bode_delay_controller(plant: DeadTimePlant, spec: DesignSpec) -> PidController:
        """Synthesis on the true plant with delay-corrected Bode slope estimates."""
        point = freq_response(plant, spec.omega_c)
        slopes = slopes_bode_delayed(plant, spec.omega_c)
        return synthesize_pid(point.phase, point.magnitude, slopes, spec)

    @staticmethod
    def pade_controller(plant: DeadTimePlant, spec: DesignSpec, pade_order: int = 1) -> PidController:
        """Synthesis on the Padé-rationalized plant with plain Bode slope estimates."""
        rational = DeadTimePlant(tf=rationalize(plant, pade_order), delay=0.0)
        point = freq_response(rational, spec.omega_c)
        slopes = slopes_bode(rational.tf, spec.omega_c)
        return synthesize_pid(point.phase, point.magnitude, slopes, spec)

    @staticmethod
    def ga_controller(
        plant: DeadTimePlant,
        spec: DesignSpec,
        sim: SimConfig,
        pade_order: int = 1,
        ga_config: Optional[GaConfig] = None,
    ) -> Tuple[PidController, GaConfig, Any]:
        """GA search around the Padé reference controller.

        Bounds default to a box of ``bound_spread`` around the reference, and
        the reference is always injected as the first seed.

        Returns:
            Tuple: (best controller, the GA config actually used, GaResult)
        """
        config = ga_config or GaConfig()
        reference = TuningPipeline.pade_controller(plant, spec, pade_order)
        bounds = config.bounds or derive_bounds(reference, config.bound_spread)
        seeds = ((candidate_from_controller(reference),) + tuple(config.seeds))[: config.population]
        config = config.model_copy(update={"bounds": bounds, "seeds": seeds})
        result = evolve(plant, spec, sim, config)
        return result.best.to_controller(), config, result

    @staticmethod
    def tune(
        method: TuneMethod,
        plant: DeadTimePlant,
        spec: DesignSpec,
        sim: Optional[SimConfig] = None,
        pade_order: int = 1,
        ga_config: Optional[GaConfig] = None,
    ) -> TuneOutcome:
        """Run one tuning pipeline, then verify and simulate on the true delayed plant.

        Args:
            method: Which pipeline to run
            plant: The true delayed plant
            spec: Design targets
            sim: Simulation settings
            pade_order: Padé order for the pade pipeline and the GA reference
            ga_config: GA settings for the ga pipeline

        Returns:
            TuneOutcome: Report and closed-loop step response

        Raises:
            ValueError: If synthesis, verification or the GA fails
        """
        sim = sim or SimConfig()
        logger.info("Tuning with method %s at %.6g rad/s", method.value, spec.omega_c)
        notes: List[str] = []
        ga_used: Optional[GaConfig] = None
        ga_result = None

        if method == TuneMethod.BODE_DELAY:
            controller = TuningPipeline.bode_delay_controller(plant, spec)
        elif method == TuneMethod.PADE:
            controller = TuningPipeline.pade_controller(plant, spec, pade_order)
        else:
            controller, ga_used, ga_result = TuningPipeline.ga_controller(plant, spec, sim, pade_order, ga_config)
            if not ga_result.reproducible:
                notes.append("non-reproducible (no seed)")

        if method != TuneMethod.BODE_DELAY and pade_order == 0 and plant.delay > 0.0:
            notes.append(DELAY_IGNORED_NOTE)

        design = verify_design(plant, controller, spec)
        step = step_closed_loop(plant, controller, sim)
        if step.diverged:
            notes.append("closed-loop step response diverged")

        report = TuneReport(
            method=method,
            controller=controller,
            design=design,
            metrics=step.metrics,
            plant=plant,
            spec=spec,
            sim=sim,
            pade_order=pade_order,
            ga_config=ga_used,
            ga_result=ga_result,
            diverged=step.diverged,
            notes=notes,
        )
        logger.info(
            "Method %s: Kp=%.5g Ti=%.5g Td=%.5g, slope error %.3f, ITAE %.5g",
            method.value,
            controller.kp,
            controller.ti,
            controller.td,
            design.slope_error_fraction,
            step.metrics.itae,
        )
        return TuneOutcome(report=report, step=step)

    @staticmethod
    def simulate(plant: DeadTimePlant, controller: PidController, sim: Optional[SimConfig] = None) -> StepResult:
        """Closed-loop step of an existing controller on the plant."""
        return step_closed_loop(plant, controller, sim or SimConfig())

    @staticmethod
    def compare(
        plant: DeadTimePlant,
        spec: DesignSpec,
        sim: Optional[SimConfig] = None,
        pade_order: int = 1,
        ga_config: Optional[GaConfig] = None,
    ) -> Dict[TuneMethod, TuneOutcome]:
        """Run every tuning method on the same plant, spec and simulation settings."""
        return {
            method: TuningPipeline.tune(method, plant, spec, sim, pade_order, ga_config)
            for method in TuneMethod
        }

    @staticmethod
    def comparison_document(outcomes: Dict[TuneMethod, TuneOutcome]) -> Dict[str, Any]:
        """Side-by-side JSON document of a comparison, methods ranked by ITAE."""
        ranking = sorted(outcomes, key=lambda method: outcomes[method].report.metrics.itae)
        return {
            "methods": {method.value: outcome.report.to_dict() for method, outcome in outcomes.items()},
            "ranking_by_itae": [method.value for method in ranking],
        }
