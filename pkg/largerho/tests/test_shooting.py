import numpy as np
from django.test import SimpleTestCase, tag

from largerho.exceptions import LabError
from largerho.melnikov import Stability, floquet_prediction, solve_asym_branch, solve_sym_branch
from largerho.odesim import System, integrate, vector_field
from largerho.params import Params
from largerho.shooting import (
    Direction,
    OrbitSymmetry,
    PeriodicOrbit,
    Section,
    compare_with_melnikov,
    default_section,
    orbit_transport,
    refine_orbit,
    return_map,
    section_crossings,
    seed_from_branch,
)
from largerho.transport import h_transport

BETA = 8.0 / 3.0


def symmetric_point(lam=1.5):
    return solve_sym_branch(Params.from_lambda(lam, BETA))


class SectionTests(SimpleTestCase):
    def test_normalized(self):
        sec = Section((0.0, 2.0, 0.0))
        self.assertEqual(sec.normal, (0.0, 1.0, 0.0))
        self.assertEqual(sec.value(np.array([5.0, -3.0, 1.0])), -3.0)
        np.testing.assert_array_equal(sec.project(np.array([5.0, -3.0, 1.0])), [5.0, 0.0, 1.0])

    def test_zero_normal(self):
        with self.assertRaises(LabError):
            Section((0.0, 0.0, 0.0))

    def test_default_section(self):
        sec = default_section(4)
        self.assertEqual(sec.normal, (0.0, 1.0, 0.0, 0.0))
        self.assertIs(sec.direction, Direction.NEGATIVE)
        self.assertEqual(Direction.BOTH.sign, 0)


class UnperturbedFlowTests(SimpleTestCase):
    """At epsilon = 0 every closed-form orbit is periodic with the closed-form period."""

    def setUp(self):
        self.point = symmetric_point()
        self.params = self.point.params
        self.vf = vector_field(System.RESCALED, self.params, epsilon=0.0)
        self.seed, self.period = seed_from_branch(self.point)

    def test_seed_on_section(self):
        self.assertEqual(self.seed.eta, 0.0)
        self.assertGreater(self.seed.xi, 0.0)

    def test_return_map(self):
        y, t = return_map(self.seed.as_array(), self.vf, default_section(), self.period)
        self.assertAlmostEqual(t, self.period, delta=1e-8 * self.period)
        np.testing.assert_allclose(y, self.seed.as_array(), atol=1e-8)

    def test_section_crossings(self):
        traj = integrate(self.vf, self.seed, (0.0, 3.25 * self.period), 1e-12, 1e-12, dense_output=True)
        crossings = section_crossings(traj, default_section())
        self.assertEqual(len(crossings), 3)
        for n, (t, state) in enumerate(crossings, start=1):
            self.assertAlmostEqual(t, n * self.period, delta=1e-7 * self.period)
            self.assertAlmostEqual(state.xi, self.seed.xi, delta=1e-7)
        both = Section.coordinate(1, 0.0, Direction.BOTH)
        self.assertEqual(len(section_crossings(traj, both)), 6)

    def test_crossings_need_dense_output(self):
        traj = integrate(self.vf, self.seed, (0.0, self.period))
        with self.assertRaises(LabError):
            section_crossings(traj, default_section())

    def test_refine_returns_symmetric_orbit(self):
        orbit = refine_orbit(self.seed, self.period, self.params, epsilon=0.0, tol=1e-8)
        self.assertEqual(orbit.iterations, 1)
        self.assertIs(orbit.symmetry, OrbitSymmetry.SYMMETRIC)
        self.assertAlmostEqual(abs(orbit.trivial_multiplier - 1.0), 0.0, delta=1e-4)
        for nu in orbit.multipliers:
            self.assertAlmostEqual(abs(nu - 1.0), 0.0, delta=1e-4)


class MelnikovComparisonTests(SimpleTestCase):
    def orbit_with(self, multipliers):
        seed, period = seed_from_branch(symmetric_point())
        return PeriodicOrbit(seed, period, tuple(multipliers), OrbitSymmetry.SYMMETRIC, 0.0, 1)

    def test_exact_prediction_agrees(self):
        point = symmetric_point()
        predicted = floquet_prediction(point.trDM, point.detDM, 1e-3)
        comparison = compare_with_melnikov(self.orbit_with(predicted), point, 1e-3)
        self.assertEqual(comparison.max_abs_error, 0.0)
        self.assertTrue(comparison.agrees)
        self.assertIs(comparison.predicted_stability, Stability.STABLE)

    def test_asymmetric_multipliers_squared(self):
        point = solve_asym_branch(Params.from_lambda(0.9, BETA))
        predicted = floquet_prediction(point.trDM, point.detDM, 1e-3)
        one_loop = [np.sqrt(complex(nu)) for nu in predicted]
        comparison = compare_with_melnikov(self.orbit_with(one_loop), point, 1e-3)
        self.assertLess(comparison.max_abs_error, 1e-12)
        self.assertIs(comparison.shooting_stability, Stability.SADDLE)

    def test_mismatch_detected(self):
        point = symmetric_point()
        comparison = compare_with_melnikov(self.orbit_with([1.01, 1.02]), point, 1e-3)
        self.assertFalse(comparison.agrees)
        self.assertIs(comparison.shooting_stability, Stability.UNSTABLE)

    def test_tolerance_is_second_order_in_deviation(self):
        point = symmetric_point()
        predicted = floquet_prediction(point.trDM, point.detDM, 1e-3)
        comparison = compare_with_melnikov(self.orbit_with(predicted), point, 1e-3)
        deviation = max(abs(nu - 1.0) for nu in predicted)
        self.assertEqual(comparison.deviation, deviation)
        self.assertAlmostEqual(comparison.tolerance, 4.0 * deviation ** 2, delta=1e-15)
        self.assertTrue(comparison.informative)

    def test_shift_inside_and_outside_tolerance(self):
        point = symmetric_point()
        predicted = floquet_prediction(point.trDM, point.detDM, 1e-3)
        tolerance = compare_with_melnikov(self.orbit_with(predicted), point, 1e-3).tolerance
        near = compare_with_melnikov(self.orbit_with([nu + 0.5 * tolerance for nu in predicted]), point, 1e-3)
        far = compare_with_melnikov(self.orbit_with([nu + 2.0 * tolerance for nu in predicted]), point, 1e-3)
        self.assertTrue(near.agrees)
        self.assertAlmostEqual(far.max_abs_error, 2.0 * tolerance, delta=1e-12)
        self.assertFalse(far.agrees)

    def test_large_epsilon_is_not_informative(self):
        point = symmetric_point()
        predicted = floquet_prediction(point.trDM, point.detDM, 0.05)
        comparison = compare_with_melnikov(self.orbit_with(predicted), point, 0.05)
        self.assertEqual(comparison.max_abs_error, 0.0)
        self.assertFalse(comparison.informative)
        self.assertFalse(comparison.agrees)


@tag("slow")
class ShootingAtLargeRhoTests(SimpleTestCase):
    def test_symmetric_orbit_stable_and_predicted(self):
        params = Params.from_lambda(1.5, BETA, 1e6)
        point = solve_sym_branch(params)
        seed, period = seed_from_branch(point)
        orbit = refine_orbit(seed, period, params)
        self.assertLessEqual(orbit.converged_residual, 1e-10)
        self.assertIs(orbit.symmetry, OrbitSymmetry.SYMMETRIC)
        self.assertIs(orbit.stability, Stability.STABLE)
        comparison = compare_with_melnikov(orbit, point, params.epsilon)
        self.assertTrue(comparison.informative)
        self.assertTrue(comparison.agrees)
        # first order leaves a few 1e-3 at epsilon = 1e-3
        self.assertLess(comparison.max_abs_error, 5e-3)
        transport = orbit_transport(orbit, params)
        expected = h_transport(point).h1
        self.assertAlmostEqual(transport.h_beta_z / expected, 1.0, delta=0.01)
        self.assertAlmostEqual(transport.h_xy / transport.h_beta_z, 1.0, delta=1e-4)

    def test_asymmetric_orbit_is_saddle(self):
        params = Params.from_lambda(0.9, BETA, 1e6)
        point = solve_asym_branch(params)
        seed, period = seed_from_branch(point)
        orbit = refine_orbit(seed, period, params)
        self.assertIs(orbit.symmetry, OrbitSymmetry.ASYMMETRIC_PLUS)
        self.assertIs(compare_with_melnikov(orbit, point, params.epsilon).shooting_stability, Stability.SADDLE)


@tag("slow")
class FloquetConvergenceTests(SimpleTestCase):
    """The first-order Floquet error falls as epsilon**2: a factor 100 from rho = 1e4 to 1e6."""

    def floquet_error(self, lam, rho):
        params = Params.from_lambda(lam, BETA, rho)
        point = solve_sym_branch(params)
        seed, period = seed_from_branch(point)
        orbit = refine_orbit(seed, period, params)
        return compare_with_melnikov(orbit, point, params.epsilon).max_abs_error

    def test_error_scales_with_epsilon_squared(self):
        for lam in (0.8, 1.5, 2.36):
            with self.subTest(lam=lam):
                ratio = self.floquet_error(lam, 1e4) / self.floquet_error(lam, 1e6)
                self.assertGreater(ratio, 100.0 / 3.0)
                self.assertLess(ratio, 300.0)
