import math
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from largerho.elliptic import ellip_KE
from largerho.exceptions import NoBranchError
from largerho.melnikov import solve_asym_branch, solve_sym_branch
from largerho.params import Params
from largerho.transport import (
    R_sym,
    averages_fixed_point,
    averages_sym,
    fixed_point_transport,
    h_transport,
    invert_R1,
    monotone_h1_scan,
    nusselt,
    period_average_zeta,
    proportionality_check,
    sigma_for_scaling,
    transport_curve,
    z3_inner_factor,
    z3_sign_threshold,
)

BETA = 8.0 / 3.0


class FixedPointTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(fixed_point_transport(1.0, BETA), (0.0, True))
        self.assertEqual(fixed_point_transport(0.5, BETA).H, 0.0)
        self.assertAlmostEqual(fixed_point_transport(28.0, BETA).H, 72.0, places=12)
        self.assertAlmostEqual(fixed_point_transport(1000.0, BETA).H, 2664.0, places=9)

    def test_nusselt(self):
        self.assertEqual(nusselt(0.0, 1000.0, BETA), 1.0)
        self.assertAlmostEqual(nusselt(2664.0, 1000.0, BETA), 2.998, places=12)
        self.assertAlmostEqual(nusselt(BETA * (1e12 - 1.0), 1e12, BETA), 3.0, places=10)

    def test_equilibrium_identities_exact(self):
        rho = 1000.0
        c = math.sqrt(BETA * (rho - 1.0))
        times = np.linspace(0.0, 10.0, 11)
        states = np.tile([c, c, rho - 1.0], (times.size, 1))
        report = proportionality_check(SimpleNamespace(times=times, states=states), BETA)
        self.assertLess(report.worst, 1e-12)
        self.assertTrue(report.passed)
        averages = averages_fixed_point(Params(sigma=10.0, beta=BETA, rho=rho))
        self.assertEqual(averages.order_remainder, ("exact", "exact", "exact"))


class AveragesTests(SimpleTestCase):
    def test_mean_z_below_fixed_point(self):
        for lam in (0.8, 1.5, 3.0):
            point = solve_sym_branch(Params.from_lambda(lam, BETA), stability=False)
            c1, c2, c3 = averages_sym(point).coefficients
            self.assertLess(c1, 1.0)
            self.assertAlmostEqual(c1, 1.0 - R_sym(point), places=14)

    def test_period_average_of_zeta(self):
        point = solve_sym_branch(Params.from_lambda(1.5, BETA), stability=False)
        K, E = ellip_KE(point.modulus)
        self.assertAlmostEqual(period_average_zeta(point), -point.B * (1.0 - 2.0 * E / K), delta=1e-8)

    def test_scaled_by_rho(self):
        point = solve_sym_branch(Params.from_lambda(1.5, BETA), stability=False)
        unit = averages_sym(point)
        scaled = averages_sym(point, Params.from_lambda(1.5, BETA, 1e4))
        self.assertAlmostEqual(scaled.z2 / unit.z2, 1e8)

    def test_asymmetric_rejected(self):
        point = solve_asym_branch(Params.from_lambda(0.8, BETA), stability=False)
        with self.assertRaises(NoBranchError):
            averages_sym(point)

    def test_z3_threshold(self):
        lam = z3_sign_threshold()
        self.assertAlmostEqual(lam, 2.5611, delta=1e-3)
        signs = []
        for side in (lam - 0.05, lam + 0.05):
            signs.append(math.copysign(1.0, z3_inner_factor(solve_sym_branch(Params.from_lambda(side, BETA), stability=False))))
        self.assertEqual(signs[0], -signs[1])

    def test_z3_threshold_independent_of_beta(self):
        lam = z3_sign_threshold()
        for beta in (10.0, 100.0, 1000.0):
            below = solve_sym_branch(Params.from_lambda(lam - 0.05, beta), stability=False)
            above = solve_sym_branch(Params.from_lambda(lam + 0.05, beta), stability=False)
            self.assertLess(z3_inner_factor(below) * z3_inner_factor(above), 0.0)


class TransportCurveTests(SimpleTestCase):
    def test_monotone_and_bounded(self):
        rows = monotone_h1_scan([0.7, 1.0, 2.0, 5.0, 20.0], BETA)
        values = [row.h1 for row in rows]
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))
        self.assertLess(max(values), BETA)
        self.assertGreater(values[-1], 0.95 * BETA)
        self.assertGreater(values[0], 0.0)

    def test_scan_needs_branch_domain(self):
        with self.assertRaises(NoBranchError):
            monotone_h1_scan([0.5, 1.0], BETA)

    def test_transport_in_open_interval(self):
        for row in transport_curve(np.linspace(0.7, 3.0, 40), BETA, rho=1000.0):
            self.assertTrue(0.0 < row.h1 < BETA)
            self.assertTrue(0.0 <= row.R1 <= 1.0)
            self.assertGreater(row.gap, 0.0)
            if row.lam < 1.0:
                self.assertTrue(0.0 < row.h2 < BETA)
                self.assertTrue(0.0 <= row.R2 <= 1.0)
            else:
                self.assertIsNone(row.h2)

    def test_endpoint_limits(self):
        near_two_thirds = solve_sym_branch(Params.from_lambda(2.0 / 3.0 + 1e-4, BETA), stability=False)
        self.assertAlmostEqual(h_transport(near_two_thirds).R1, 1.0, delta=2e-3)
        near_one = solve_asym_branch(Params.from_lambda(1.0 - 1e-4, BETA), stability=False)
        tp = h_transport(near_one)
        self.assertAlmostEqual(tp.R2, 0.0, delta=1e-3)
        self.assertAlmostEqual(tp.h2, BETA, delta=1e-3 * BETA)

    def test_asymmetric_outside_interval(self):
        point = solve_asym_branch(Params.from_lambda(0.8, BETA), stability=False)
        with self.assertRaises(NoBranchError):
            h_transport(replace(point, lam=1.2))

    def test_curve_row_format(self):
        row = transport_curve([0.8], BETA)[0]
        self.assertEqual(len(row.as_row()), 6)
        self.assertIsNotNone(row.h2)


class ScalingTests(SimpleTestCase):
    def test_invert_R1(self):
        lam, sigma = invert_R1(0.3, BETA)
        point = solve_sym_branch(Params.from_lambda(lam, BETA), stability=False)
        self.assertAlmostEqual(R_sym(point), 0.3, delta=1e-8)
        self.assertAlmostEqual(sigma, lam * (BETA + 2.0) - 1.0, places=12)

    def test_sigma_for_scaling(self):
        rho, gamma = 1e4, 0.5
        sigma = sigma_for_scaling(rho, gamma, BETA)
        point = solve_sym_branch(Params(sigma=sigma, beta=BETA), stability=False)
        self.assertAlmostEqual(R_sym(point), 1.0 - rho ** (gamma - 1.0), delta=1e-8)

    def test_targets_out_of_range(self):
        for target in (0.0, 1.0, 1.5):
            with self.assertRaises(NoBranchError):
                invert_R1(target, BETA)
