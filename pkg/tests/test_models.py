import math
import unittest

import numpy as np

from bode_pid_tuner.models import (
    Candidate,
    DeadTimePlant,
    DesignReport,
    DesignSpec,
    GaConfig,
    GainBounds,
    GaResult,
    Metrics,
    PidController,
    Polynomial,
    RationalTf,
    SimConfig,
    StepResult,
    TuneMethod,
)


class TestPolynomial(unittest.TestCase):
    """Test cases for the Polynomial and RationalTf models."""

    def test_leading_zero_rejected(self):
        """Test rejecting a leading zero coefficient."""
        with self.assertRaises(ValueError):
            Polynomial(coeffs=(0.0, 1.0))

    def test_zero_polynomial_allowed(self):
        """The zero polynomial is a valid degree-0 polynomial."""
        poly = Polynomial(coeffs=(0.0,))
        self.assertTrue(poly.is_zero)
        self.assertEqual(poly.degree, 0)

    def test_non_finite_rejected(self):
        """Test rejecting a NaN coefficient."""
        with self.assertRaises(ValueError):
            Polynomial(coeffs=(1.0, math.nan))

    def test_zero_denominator_rejected(self):
        """Test rejecting a zero denominator."""
        with self.assertRaisesRegex(ValueError, "zero denominator"):
            RationalTf(num=Polynomial(coeffs=(1.0,)), den=Polynomial(coeffs=(0.0, 0.0)))

    def test_properness(self):
        """Test detecting proper and improper transfer functions."""
        proper = RationalTf(num=Polynomial(coeffs=(1.0, 2.0)), den=Polynomial(coeffs=(1.0, 3.0)))
        improper = RationalTf(num=Polynomial(coeffs=(1.0, 0.0, 0.0)), den=Polynomial(coeffs=(1.0, 1.0)))
        self.assertTrue(proper.is_proper)
        self.assertFalse(improper.is_proper)


class TestDeadTimePlant(unittest.TestCase):
    """Test cases for plant documents."""

    def test_negative_delay_rejected(self):
        """Test rejecting a negative delay."""
        with self.assertRaises(ValueError):
            DeadTimePlant(tf=RationalTf.unity(), delay=-0.1)

    def test_from_dict_to_dict(self):
        """Test converting a plant to and from a dictionary."""
        data = {"num": [1], "den": [1, 5, 10, 10, 5, 1], "delay": 0.1}
        plant = DeadTimePlant.from_dict(data)
        self.assertEqual(plant.tf.den.degree, 5)
        self.assertEqual(plant.to_dict(), {"num": [1.0], "den": [1.0, 5.0, 10.0, 10.0, 5.0, 1.0], "delay": 0.1})

    def test_delay_defaults_to_zero(self):
        """A plant without a delay key has no dead time."""
        plant = DeadTimePlant.from_dict({"num": [2], "den": [1, 1]})
        self.assertEqual(plant.delay, 0.0)

    def test_missing_keys_rejected(self):
        """Test rejecting a plant without a denominator."""
        with self.assertRaisesRegex(ValueError, "den"):
            DeadTimePlant.from_dict({"num": [1]})


class TestDesignSpec(unittest.TestCase):
    """Test cases for the design targets."""

    def test_degrees_at_the_boundary(self):
        """Angles are given in degrees at the file boundary."""
        spec = DesignSpec.from_dict({"wc": 0.4, "pm_deg": 50, "psi_deg": 65})
        self.assertAlmostEqual(spec.phi_d, math.radians(50))
        self.assertAlmostEqual(spec.psi_d, math.radians(65))
        self.assertAlmostEqual(spec.to_dict()["pm_deg"], 50.0)

    def test_margin_range(self):
        """Phase margins outside (0, 180) degrees are rejected."""
        for pm_deg in (0.0, 180.0, -10.0):
            with self.assertRaises(ValueError):
                DesignSpec.from_degrees(0.4, pm_deg, 65)

    def test_crossover_positive(self):
        """Test rejecting a zero crossover frequency."""
        with self.assertRaises(ValueError):
            DesignSpec.from_degrees(0.0, 50, 65)


class TestPidController(unittest.TestCase):
    """Test cases for the series-form controller."""

    def test_parallel_gains(self):
        """Test the parallel gains of a series controller."""
        controller = PidController(kp=2.0, ti=4.0, td=0.5)
        self.assertAlmostEqual(controller.ki, 0.5)
        self.assertAlmostEqual(controller.kd, 1.0)

    def test_invalid_values(self):
        """Test rejecting invalid controller parameters."""
        for kwargs in ({"kp": 0.0, "ti": 1.0}, {"kp": 1.0, "ti": 0.0}, {"kp": 1.0, "ti": 1.0, "td": -0.1}):
            with self.assertRaises(ValueError):
                PidController(**kwargs)

    def test_disabled_integral_serializes_as_null(self):
        """An infinite integral time is written as null."""
        controller = PidController(kp=1.0, ti=math.inf)
        data = controller.to_dict()
        self.assertIsNone(data["ti"])
        self.assertEqual(data["ki"], 0.0)
        self.assertEqual(PidController.from_dict(data).ti, math.inf)

    def test_from_parallel_gains(self):
        """Test building a controller from parallel gains."""
        controller = PidController.from_dict({"kp": 1.3473, "ki": 0.3758, "kd": 1.875})
        self.assertAlmostEqual(controller.ti, 1.3473 / 0.3758)
        self.assertAlmostEqual(controller.td, 1.875 / 1.3473)

    def test_from_tune_report(self):
        """A whole tune report can be read as a controller."""
        report = {"method": "pade", "controller": {"kp": 1.0, "ti": 2.0, "td": 0.5, "ki": 0.5, "kd": 0.5}}
        self.assertEqual(PidController.from_dict(report), PidController(kp=1.0, ti=2.0, td=0.5))

    def test_missing_gain(self):
        """Test rejecting a controller without a proportional gain."""
        with self.assertRaises(ValueError):
            PidController.from_dict({"ti": 1.0})


class TestDesignReport(unittest.TestCase):
    def test_non_finite_rejected(self):
        """Test rejecting a non-finite measured slope."""
        with self.assertRaises(ValueError):
            DesignReport(achieved_pm=1.0, achieved_crossover=0.4, achieved_psi=math.inf, slope_error_fraction=0.1)


class TestSimConfig(unittest.TestCase):
    """Test cases for simulation settings."""

    def test_defaults(self):
        """Test the default simulation settings."""
        config = SimConfig()
        self.assertEqual((config.dt, config.horizon, config.deriv_filter_n), (0.01, 60.0, 100.0))

    def test_horizon_must_cover_ten_steps(self):
        """Test rejecting a horizon shorter than ten steps."""
        with self.assertRaises(ValueError):
            SimConfig(dt=0.1, horizon=0.5)

    def test_from_dict_partial(self):
        """Missing settings fall back to defaults."""
        self.assertEqual(SimConfig.from_dict({"dt": 0.005}).dt, 0.005)


class TestMetricsAndStepResult(unittest.TestCase):
    """Test cases for metrics and trajectories."""

    def test_divergent_metrics_serialize_as_null(self):
        """Infinite metrics of a diverged run are written as null."""
        data = Metrics.divergent().to_dict()
        self.assertIsNone(data["itae"])
        self.assertIsNone(data["overshoot"])

    def test_negative_itae_rejected(self):
        """Test rejecting a negative ITAE."""
        with self.assertRaises(ValueError):
            Metrics(itae=-1.0, overshoot=0.0, settling_time_2pct=0.0, steady_state_error=0.0)

    def test_step_result_grid_checks(self):
        """Test validating the time grid of a step result."""
        t = np.array([0.0, 0.1, 0.2])
        StepResult(t=t, y=np.zeros(3), e=np.ones(3))
        with self.assertRaises(ValueError):
            StepResult(t=t, y=np.zeros(2), e=np.ones(3))
        with self.assertRaises(ValueError):
            StepResult(t=np.array([0.0, 0.1, 0.3]), y=np.zeros(3), e=np.ones(3))
        with self.assertRaises(ValueError):
            StepResult(t=np.array([]), y=np.array([]), e=np.array([]))

    def test_step_result_dt(self):
        """Test the step size of a step result."""
        t = np.arange(11) * 0.01
        self.assertAlmostEqual(StepResult(t=t, y=t, e=1 - t).dt, 0.01)


class TestGaModels(unittest.TestCase):
    """Test cases for GA settings, candidates and results."""

    def test_bounds_must_be_ordered(self):
        """Test rejecting empty or reversed gain ranges."""
        with self.assertRaises(ValueError):
            GainBounds(kp=(1.0, 1.0), ki=(0.1, 0.2), kd=(0.1, 0.2))
        with self.assertRaises(ValueError):
            GainBounds(kp=(0.0, 1.0), ki=(0.1, 0.2), kd=(0.1, 0.2))

    def test_candidate_to_controller(self):
        """Test converting a candidate to series form."""
        controller = Candidate(kp=2.0, ki=0.5, kd=3.0).to_controller()
        self.assertAlmostEqual(controller.ti, 4.0)
        self.assertAlmostEqual(controller.td, 1.5)

    def test_candidate_gains_positive(self):
        """Test rejecting a zero gain in a candidate."""
        with self.assertRaises(ValueError):
            Candidate(kp=1.0, ki=0.0, kd=1.0)

    def test_config_defaults(self):
        """Test the default GA settings."""
        config = GaConfig()
        self.assertEqual(config.population, 50)
        self.assertEqual(config.crossover_fraction, 0.9)
        self.assertEqual(config.mutation_fraction, 0.3)
        self.assertEqual(config.generations, 100)
        self.assertEqual(config.slope_error_cap, 0.2)

    def test_config_validation(self):
        """Test rejecting invalid GA settings."""
        for kwargs in (
            {"population": 1},
            {"crossover_fraction": 1.5},
            {"mutation_fraction": -0.1},
            {"slope_error_cap": 0.0},
            {"elite_count": 50},
        ):
            with self.assertRaises(ValueError):
                GaConfig(**kwargs)

    def test_config_from_dict(self):
        """Test reading GA settings with bounds and seeds."""
        config = GaConfig.from_dict(
            {"seed": 3, "bounds": {"kp": [1, 2], "ki": [0.1, 0.5], "kd": [1, 3]}, "seeds": [{"kp": 1.5, "ki": 0.3, "kd": 2}]}
        )
        self.assertEqual(config.seed, 3)
        self.assertEqual(config.bounds.kp, (1.0, 2.0))
        self.assertEqual(config.seeds[0].kd, 2.0)
        self.assertEqual(GaConfig.from_dict(config.to_dict()), config)

    def test_config_unknown_key(self):
        """Unknown GA settings are named in the error."""
        with self.assertRaisesRegex(ValueError, "popsize"):
            GaConfig.from_dict({"popsize": 10})

    def test_result_history_non_increasing(self):
        """The best-so-far history never increases."""
        best = Candidate(kp=1.0, ki=1.0, kd=1.0)
        GaResult(best=best, best_itae=1.0, best_slope_error=0.1, history=(3.0, 2.0, 2.0, 1.0))
        with self.assertRaises(ValueError):
            GaResult(best=best, best_itae=1.0, best_slope_error=0.1, history=(1.0, 2.0))

    def test_result_best_ends_history(self):
        """The reported best fitness is the last best-so-far entry."""
        best = Candidate(kp=1.0, ki=1.0, kd=1.0)
        with self.assertRaisesRegex(ValueError, "last history entry"):
            GaResult(best=best, best_itae=1.5, best_slope_error=0.1, history=(2.0, 1.0))


class TestTuneMethod(unittest.TestCase):
    def test_from_string(self):
        """Test converting method names and aliases to TuneMethod values."""
        self.assertEqual(TuneMethod.from_string("pade"), TuneMethod.PADE)
        self.assertEqual(TuneMethod.from_string(" Genetic "), TuneMethod.GA)
        self.assertEqual(TuneMethod.from_string("bode_delay"), TuneMethod.BODE_DELAY)
        with self.assertRaisesRegex(ValueError, "Valid methods"):
            TuneMethod.from_string("pso")


if __name__ == "__main__":
    unittest.main()
