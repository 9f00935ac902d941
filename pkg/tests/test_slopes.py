import math
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from bode_pid_tuner.lti import make_plant
from bode_pid_tuner.models import DeadTimePlant, SlopeMethod
from bode_pid_tuner.pade import rationalize
from bode_pid_tuner.slopes import slopes_bode, slopes_bode_delayed, slopes_exact

OMEGA = 0.4
FIFTH_ORDER_PHASE = -5 * math.atan(OMEGA)
FIFTH_ORDER_LOG_GAIN = -2.5 * math.log(1 + OMEGA**2)


def fifth_order_plant(delay=0.1):
    return make_plant([1], [1, 5, 10, 10, 5, 1], delay)


class TestSlopesExact(unittest.TestCase):
    """Finite-difference slopes against analytic derivatives."""

    def test_fifth_order_delayed_plant(self):
        """Test slopes of the delayed fifth-order plant."""
        estimate = slopes_exact(fifth_order_plant(), OMEGA)
        self.assertEqual(estimate.method, SlopeMethod.EXACT)
        self.assertAlmostEqual(estimate.s_a, -5 * OMEGA**2 / (1 + OMEGA**2), delta=1e-7)
        self.assertAlmostEqual(estimate.s_p, -5 * OMEGA / (1 + OMEGA**2) - 0.1 * OMEGA, delta=1e-7)
        self.assertAlmostEqual(estimate.s_a, -0.68966, delta=1e-3)
        self.assertAlmostEqual(estimate.s_p, -1.76414, delta=1e-3)

    def test_first_order_plant(self):
        """Test slopes of 1/(s+1) at its corner frequency."""
        estimate = slopes_exact(make_plant([1], [1, 1]), 1.0)
        self.assertAlmostEqual(estimate.s_a, -0.5, delta=1e-8)
        self.assertAlmostEqual(estimate.s_p, -0.5, delta=1e-8)

    def test_integrator(self):
        """An integrator has amplitude slope -1 and a flat phase."""
        estimate = slopes_exact(make_plant([1], [1, 0]), 2.0)
        self.assertAlmostEqual(estimate.s_a, -1.0, delta=1e-8)
        self.assertAlmostEqual(estimate.s_p, 0.0, delta=1e-8)

    def test_unity_plant(self):
        """A unity plant has zero slopes."""
        estimate = slopes_exact(make_plant([1], [1]), 3.0)
        self.assertEqual((estimate.s_a, estimate.s_p), (0.0, 0.0))

    def test_omega_must_be_positive(self):
        """Test rejecting a negative frequency."""
        with self.assertRaises(ValueError):
            slopes_exact(fifth_order_plant(), -1.0)

    def test_second_order_convergence(self):
        """Halving the step quarters the central-difference error."""
        exact_s_a = -5 * OMEGA**2 / (1 + OMEGA**2)
        exact_s_p = -5 * OMEGA / (1 + OMEGA**2) - 0.1 * OMEGA
        coarse = slopes_exact(fifth_order_plant(), OMEGA, step=0.02)
        fine = slopes_exact(fifth_order_plant(), OMEGA, step=0.01)
        self.assertAlmostEqual((coarse.s_a - exact_s_a) / (fine.s_a - exact_s_a), 4.0, delta=0.01)
        self.assertAlmostEqual((coarse.s_p - exact_s_p) / (fine.s_p - exact_s_p), 4.0, delta=0.01)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0.0, max_value=2.0), st.floats(min_value=0.05, max_value=5.0))
    def test_delay_only_shifts_phase_slope(self, delay, omega):
        """Dead time shifts the phase slope by -tau*omega only."""
        delayed = slopes_exact(fifth_order_plant(delay), omega)
        rational = slopes_exact(fifth_order_plant(0.0), omega)
        self.assertAlmostEqual(delayed.s_a, rational.s_a, delta=1e-9)
        self.assertAlmostEqual(delayed.s_p - rational.s_p, -delay * omega, delta=1e-8)


class TestSlopesBode(unittest.TestCase):
    """Bode-integral point estimates."""

    def test_delay_corrected_estimate(self):
        """Test the delay-corrected estimate on the delayed fifth-order plant."""
        estimate = slopes_bode_delayed(fifth_order_plant(), OMEGA)
        self.assertEqual(estimate.method, SlopeMethod.BODE_DELAYED)
        self.assertAlmostEqual(estimate.s_a, 2 / math.pi * FIFTH_ORDER_PHASE, delta=1e-10)
        self.assertAlmostEqual(
            estimate.s_p, FIFTH_ORDER_PHASE - 0.1 * OMEGA - 2 / math.pi * FIFTH_ORDER_LOG_GAIN, delta=1e-10
        )
        self.assertAlmostEqual(estimate.s_a, -1.21125, delta=1e-3)
        self.assertAlmostEqual(estimate.s_p, -1.70619, delta=1e-3)

    def test_rationalized_plant_estimate(self):
        """Test the plain estimate on the rationalized plant."""
        rational = rationalize(fifth_order_plant(), 1)
        estimate = slopes_bode(rational, OMEGA)
        phase = FIFTH_ORDER_PHASE - 2 * math.atan(OMEGA / 20)
        self.assertEqual(estimate.method, SlopeMethod.BODE)
        self.assertAlmostEqual(estimate.s_a, 2 / math.pi * phase, delta=1e-10)
        self.assertAlmostEqual(estimate.s_p, phase - 2 / math.pi * FIFTH_ORDER_LOG_GAIN, delta=1e-10)
        self.assertAlmostEqual(estimate.s_a, -1.2367, delta=1e-3)

    def test_delay_correction_matches_rational_part(self):
        """The delay correction adds exactly -tau*omega to the phase slope."""
        plant = fifth_order_plant(0.7)
        delayed = slopes_bode_delayed(plant, 1.3)
        rational = slopes_bode(plant.tf, 1.3)
        self.assertAlmostEqual(delayed.s_a, rational.s_a, places=12)
        self.assertAlmostEqual(delayed.s_p, rational.s_p - 0.7 * 1.3, places=12)

    def test_first_order_plant(self):
        """1/(s+1) at its corner frequency."""
        estimate = slopes_bode(make_plant([1], [1, 1]).tf, 1.0)
        self.assertAlmostEqual(estimate.s_a, -0.5, delta=1e-12)
        self.assertAlmostEqual(estimate.s_p, -math.pi / 4 + math.log(2) / math.pi, delta=1e-12)
        self.assertAlmostEqual(estimate.s_p, -0.56476, delta=1e-5)

    def test_pure_delay_is_exact(self):
        """A bare dead time has a flat magnitude and a phase slope of -tau*omega."""
        estimate = slopes_bode_delayed(make_plant([1], [1], 1.0), 1.0)
        self.assertAlmostEqual(estimate.s_a, 0.0, places=12)
        self.assertAlmostEqual(estimate.s_p, -1.0, places=12)

    def test_zero_delay_matches_rational_estimate(self):
        """Without dead time the delayed estimate is the plain one, bit for bit."""
        plant = fifth_order_plant(0.0)
        for omega in (0.05, 0.4, 2.5):
            delayed = slopes_bode_delayed(plant, omega)
            rational = slopes_bode(plant.tf, omega)
            self.assertEqual((delayed.s_a, delayed.s_p), (rational.s_a, rational.s_p))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(min_value=0.01, max_value=100.0), st.floats(min_value=0.05, max_value=5.0))
    def test_gain_scaling_leaves_slopes_unchanged(self, gain, omega):
        """Slopes of kG equal those of G for any positive k."""
        base = fifth_order_plant()
        scaled = make_plant([gain], [1, 5, 10, 10, 5, 1], 0.1)
        for estimator in (slopes_exact, slopes_bode_delayed):
            reference = estimator(base, omega)
            estimate = estimator(scaled, omega)
            self.assertAlmostEqual(estimate.s_a, reference.s_a, delta=1e-9)
            self.assertAlmostEqual(estimate.s_p, reference.s_p, delta=1e-9)

    def test_unity_plant(self):
        """A unity plant has zero estimated slopes."""
        estimate = slopes_bode_delayed(make_plant([1], [1]), 2.0)
        self.assertEqual((estimate.s_a, estimate.s_p), (0.0, 0.0))

    def test_integrating_plant_rejected(self):
        """Test rejecting an integrating plant."""
        with self.assertRaisesRegex(ValueError, "finite nonzero static gain"):
            slopes_bode(make_plant([1], [1, 1, 0]).tf, 0.5)

    def test_zero_static_gain_rejected(self):
        """Test rejecting a plant with zero static gain."""
        with self.assertRaisesRegex(ValueError, "finite nonzero static gain"):
            slopes_bode_delayed(DeadTimePlant(tf=make_plant([1, 0], [1, 2, 1]).tf, delay=0.2), 0.5)


if __name__ == "__main__":
    unittest.main()
