import math

import numpy as np
from django.test import SimpleTestCase

from largerho.elliptic import EllipticModulus, find_kstar
from largerho.exceptions import LabError, NoBranchError
from largerho.melnikov import (
    RESIDUAL_TOL,
    Branch,
    BranchPoint,
    Stability,
    closed_trace,
    det_identity_asym,
    equal_jump_sigma,
    floquet_prediction,
    homoclinic_jump_quadrature,
    homoclinic_jumps,
    melnikov_closed_asym,
    melnikov_closed_sym,
    melnikov_quadrature,
    negative_polynomial,
    rhs_asym,
    rhs_sym,
    solve_asym_branch,
    solve_branch,
    solve_sym_branch,
    stability_verdict,
    stenflo_melnikov,
    sweep_branches,
    trace_fd,
)
from largerho.orbits import OrbitFamily, period_action_frequency
from largerho.params import Params

from .oracles import newton_branch

BETA = 8.0 / 3.0


def params_at(lam, rho=None):
    return Params.from_lambda(lam, BETA, rho)


class ZeroConditionTests(SimpleTestCase):
    def test_rhs_sym_monotone(self):
        s_lo = -math.log1p(-find_kstar() ** 2) + 0.01
        values = [rhs_sym(EllipticModulus.from_log_complement(s)) for s in np.linspace(s_lo, 30.0, 400)]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_rhs_asym_monotone(self):
        values = [rhs_asym(k) for k in np.linspace(0.01, 0.999, 400)]
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_endpoint_limits(self):
        self.assertAlmostEqual(rhs_sym(EllipticModulus.from_log_complement(2000.0)), 1.0 / 3.0, delta=1e-3)
        self.assertAlmostEqual(rhs_asym(1e-3), 1.0, delta=1e-3)
        self.assertEqual(rhs_asym(0.0), 1.0)
        self.assertEqual(rhs_sym(1.0), 1.0 / 3.0)

    def test_negative_polynomial(self):
        for k in np.linspace(0.05, 0.99, 60):
            self.assertLess(negative_polynomial(k), 0.0, msg=f"k={k}")


class SymmetricBranchTests(SimpleTestCase):
    def test_grid_is_stable(self):
        points = sweep_branches([params_at(lam) for lam in np.linspace(0.7, 3.0, 100)], Branch.SYMMETRIC)
        for point in points:
            self.assertIsInstance(point, BranchPoint)
            self.assertLessEqual(max(point.residuals), RESIDUAL_TOL)
            self.assertGreater(point.k, find_kstar())
            self.assertLess(point.trDM, 0.0)
            self.assertGreater(point.detDM, 0.0)

    def test_closed_forms_vanish(self):
        point = solve_sym_branch(params_at(1.5))
        M1, M3 = melnikov_closed_sym(point.modulus, point.B, point.params)
        scale = point.B + point.sigma
        self.assertLess(abs(M1), 1e-9 * scale * 100)
        self.assertLess(abs(M3), 1e-9 * scale * 100)

    def test_quadrature_agrees(self):
        for lam in (0.8, 1.2, 2.0, 2.8):
            point = solve_sym_branch(params_at(lam), stability=False)
            family = point.family()
            T = period_action_frequency(family).T
            M1, M3 = melnikov_quadrature(family, point.params)
            scale = T * BETA * (point.B + point.sigma)
            self.assertLess(abs(M1), 1e-6 * scale, msg=f"lambda={lam}")
            self.assertLess(abs(M3), 1e-6 * scale, msg=f"lambda={lam}")

    def test_quadrature_off_branch(self):
        params = params_at(1.3)
        for k, B in ((0.93, 0.8), (0.99, 2.5)):
            family = OrbitFamily.symmetric(EllipticModulus.from_k(k), B)
            closed = melnikov_closed_sym(k, B, params)
            quad = melnikov_quadrature(family, params)
            for a, b in zip(closed, quad):
                self.assertAlmostEqual(a, b, delta=1e-8 * max(1.0, abs(a)))

    def test_trace_closed_matches_finite_differences(self):
        for lam in (0.75, 1.0, 1.8, 2.5):
            params = params_at(lam)
            point = solve_sym_branch(params)
            self.assertAlmostEqual(trace_fd(point, params) / closed_trace(point), 1.0, delta=1e-5)

    def test_newton_oracle(self):
        params = params_at(1.5)
        point = solve_sym_branch(params, stability=False)
        k, B, ok = newton_branch(True, point.k * (1.0 - 1e-5), point.B * (1.0 + 1e-4), params)
        self.assertTrue(ok)
        self.assertAlmostEqual(k, point.k, delta=1e-9)
        self.assertAlmostEqual(B / point.B, 1.0, delta=1e-8)

    def test_no_branch_below_two_thirds(self):
        with self.assertRaises(NoBranchError):
            solve_sym_branch(params_at(0.5))

    def test_sweep_keeps_failures_in_place(self):
        results = sweep_branches([params_at(0.5), params_at(1.5)], Branch.SYMMETRIC)
        self.assertIsInstance(results[0], NoBranchError)
        self.assertIsInstance(results[1], BranchPoint)


class AsymmetricBranchTests(SimpleTestCase):
    def test_grid_is_saddle(self):
        points = sweep_branches([params_at(lam) for lam in np.linspace(0.68, 0.99, 100)], Branch.ASYMMETRIC)
        for point in points:
            self.assertIsInstance(point, BranchPoint)
            self.assertLessEqual(max(point.residuals), RESIDUAL_TOL)
            self.assertLess(point.trDM, 0.0)
            self.assertLess(point.detDM, 0.0)

    def test_determinant_identity(self):
        for lam in (0.7, 0.8, 0.9):
            params = params_at(lam)
            point = solve_asym_branch(params)
            self.assertAlmostEqual(det_identity_asym(point, params) / point.detDM, 1.0, delta=1e-5)

    def test_trace_closed_matches_finite_differences(self):
        for lam in (0.7, 0.85, 0.95):
            params = params_at(lam)
            point = solve_asym_branch(params)
            self.assertAlmostEqual(trace_fd(point, params) / closed_trace(point), 1.0, delta=1e-5)

    def test_quadrature_agrees(self):
        for lam in (0.72, 0.9):
            point = solve_asym_branch(params_at(lam), stability=False)
            family = point.family()
            T = period_action_frequency(family).T
            M1, M3 = melnikov_quadrature(family, point.params)
            scale = T * BETA * (point.B + point.sigma)
            self.assertLess(abs(M1), 1e-6 * scale)
            self.assertLess(abs(M3), 1e-6 * scale)

    def test_newton_oracle(self):
        params = params_at(0.8)
        point = solve_asym_branch(params, stability=False)
        k, B, ok = newton_branch(False, point.k * (1.0 + 1e-5), point.B * (1.0 - 1e-4), params)
        self.assertTrue(ok)
        self.assertAlmostEqual(k, point.k, delta=1e-9)
        self.assertAlmostEqual(B / point.B, 1.0, delta=1e-8)
        closed = melnikov_closed_asym(k, B, params)
        self.assertLess(max(abs(v) for v in closed), 1e-8 * (B + params.sigma) * 100)

    def test_outside_interval(self):
        for lam in (0.6, 1.0, 1.4):
            with self.assertRaises(NoBranchError):
                solve_branch(params_at(lam), Branch.ASYMMETRIC)

    def test_identity_rejects_symmetric(self):
        params = params_at(1.5)
        with self.assertRaises(LabError):
            det_identity_asym(solve_sym_branch(params), params)


class FloquetTests(SimpleTestCase):
    def test_prediction(self):
        plus, minus = floquet_prediction(-2.0, 1.0, 0.1)
        self.assertAlmostEqual(plus, 0.9)
        self.assertAlmostEqual(minus, 0.9)
        plus, minus = floquet_prediction(-1.0, -2.0, 0.01)
        self.assertAlmostEqual(plus.real, 1.01)
        self.assertAlmostEqual(minus.real, 0.98)

    def test_verdicts(self):
        self.assertIs(stability_verdict([0.9, 0.5j]), Stability.STABLE)
        self.assertIs(stability_verdict([1.1, 0.5]), Stability.SADDLE)
        self.assertIs(stability_verdict([1.1, -2.0]), Stability.UNSTABLE)

    def test_branch_verdicts(self):
        eps = 1e-3
        sym = solve_sym_branch(params_at(1.5))
        self.assertIs(stability_verdict(floquet_prediction(sym.trDM, sym.detDM, eps)), Stability.STABLE)
        asym = solve_asym_branch(params_at(0.9))
        self.assertIs(stability_verdict(floquet_prediction(asym.trDM, asym.detDM, eps)), Stability.SADDLE)


class HomoclinicTests(SimpleTestCase):
    def test_quadrature_matches_closed_form(self):
        for sigma in (2.0, 10.0):
            params = Params(sigma=sigma, beta=BETA, rho=1e4)
            jumps = homoclinic_jumps(params)
            dB2, dA2 = homoclinic_jump_quadrature(params)
            self.assertAlmostEqual(dB2 / jumps.deltaB2, 1.0, delta=1e-6)
            self.assertAlmostEqual(dA2 / jumps.deltaA2, 1.0, delta=1e-6)

    def test_equal_jumps(self):
        for beta in (1.0, BETA, 5.0):
            self.assertAlmostEqual(equal_jump_sigma(beta), (1.0 + 2.0 * beta) / 3.0, delta=1e-10)
        sigma = (1.0 + 2.0 * BETA) / 3.0
        jumps = homoclinic_jumps(Params(sigma=sigma, beta=BETA), epsilon=1e-2)
        self.assertTrue(jumps.jumps_equal)
        self.assertAlmostEqual(Params(sigma=sigma, beta=BETA).lam, 2.0 / 3.0, places=14)
        self.assertFalse(homoclinic_jumps(Params(sigma=10.0, beta=BETA), epsilon=1e-2).jumps_equal)


class StenfloMelnikovTests(SimpleTestCase):
    def test_fourth_function_and_determinant(self):
        params = Params(sigma=10.0, beta=BETA, rho=1e6)
        point = solve_sym_branch(params)
        zero = stenflo_melnikov(point, 0.0, params)
        shifted = stenflo_melnikov(point, 0.1, params)
        self.assertEqual(zero.M4, 0.0)
        self.assertNotEqual(shifted.M4, 0.0)
        self.assertEqual((zero.M1tilde, zero.M3), melnikov_closed_sym(point.modulus, point.B, params))
        self.assertLess(zero.detDM * point.detDM, 0.0)

    def test_symmetric_only(self):
        params = params_at(0.8)
        with self.assertRaises(LabError):
            stenflo_melnikov(solve_asym_branch(params), 0.0, params)
