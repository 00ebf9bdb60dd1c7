import math

import numpy as np
from django.test import SimpleTestCase

from largerho.elliptic import (
    EllipticModulus,
    ellip_E,
    ellip_K,
    ellip_KE,
    find_kstar,
    jacobi,
    ke_combination,
)
from largerho.exceptions import DivergenceError, ModulusDomainError

from .oracles import jacobi_by_inversion, quad_KE

MODULI = np.linspace(0.01, 0.99, 50)


class CompleteIntegralTests(SimpleTestCase):
    def test_k_zero(self):
        K, E = ellip_KE(0.0)
        self.assertAlmostEqual(K, 0.5 * math.pi, delta=1e-13)
        self.assertAlmostEqual(E, 0.5 * math.pi, delta=1e-13)

    def test_legendre_relation(self):
        for k in MODULI:
            K, E = ellip_KE(k)
            Kc, Ec = ellip_KE(math.sqrt(1.0 - k * k))
            self.assertLess(abs(K * Ec + E * Kc - K * Kc - 0.5 * math.pi), 1e-11, msg=f"k={k}")

    def test_against_quadrature(self):
        for k in MODULI:
            K, E = ellip_KE(k)
            qK, qE = quad_KE(float(k))
            self.assertLess(abs(K - qK), 1e-10, msg=f"K at k={k}")
            self.assertLess(abs(E - qE), 1e-10, msg=f"E at k={k}")

    def test_k_one(self):
        self.assertEqual(ellip_E(1.0), 1.0)
        with self.assertRaises(DivergenceError):
            ellip_K(1.0)

    def test_outside_unit_interval(self):
        for bad in (-0.1, 1.2, float("nan")):
            with self.assertRaises(ModulusDomainError):
                ellip_KE(bad)

    def test_log_complement_beyond_float_range(self):
        mod = EllipticModulus.from_log_complement(900.0)
        K, E = ellip_KE(mod)
        self.assertAlmostEqual(K, 450.0 + math.log(4.0), places=12)
        self.assertEqual(E, 1.0)

    def test_complement_matches_k(self):
        k = 0.7
        a = ellip_KE(EllipticModulus.from_complement(1.0 - k * k))
        b = ellip_KE(k)
        self.assertAlmostEqual(a[0], b[0], places=13)
        self.assertAlmostEqual(a[1], b[1], places=13)


class KstarTests(SimpleTestCase):
    def test_value_and_residual(self):
        kstar = find_kstar()
        self.assertAlmostEqual(kstar, 0.908909, delta=1e-5)
        K, E = ellip_KE(kstar)
        self.assertLess(abs(K - 2.0 * E), 1e-11)


class KECombinationTests(SimpleTestCase):
    def test_matches_direct_evaluation(self):
        for k in (0.1, 0.3, 0.45, 0.6, 0.9):
            K, E = ellip_KE(k)
            m = k * k
            direct = (2.0 - m) * K - 2.0 * E
            self.assertAlmostEqual(ke_combination(k, (2.0, -1.0), (-2.0,)), direct, delta=1e-13 * max(1.0, abs(K)))

    def test_cancelling_orders_keep_relative_accuracy(self):
        # (2 - m)K - 2E = (pi/16) m**2 + O(m**3)
        k = 1e-4
        value = ke_combination(k, (2.0, -1.0), (-2.0,))
        self.assertAlmostEqual(value / (math.pi / 16.0 * k ** 4), 1.0, places=6)


class JacobiTests(SimpleTestCase):
    def test_against_amplitude_inversion(self):
        for k in (0.2, 0.7, 0.95):
            K = ellip_K(k)
            for u in np.linspace(0.05, 0.95, 7) * K:
                sn, cn, dn = jacobi(float(u), k)
                osn, ocn, odn = jacobi_by_inversion(float(u), k)
                self.assertAlmostEqual(sn, osn, delta=1e-10)
                self.assertAlmostEqual(cn, ocn, delta=1e-10)
                self.assertAlmostEqual(dn, odn, delta=1e-10)

    def test_identities_on_arrays(self):
        u = np.linspace(-20.0, 20.0, 401)
        for k in (0.0, 0.5, 0.999):
            sn, cn, dn = jacobi(u, k)
            self.assertLess(np.max(np.abs(sn ** 2 + cn ** 2 - 1.0)), 1e-13)
            self.assertLess(np.max(np.abs(dn ** 2 + k * k * sn ** 2 - 1.0)), 1e-12)

    def test_unit_modulus_is_hyperbolic(self):
        sn, cn, dn = jacobi(0.8, 1.0)
        self.assertAlmostEqual(sn, math.tanh(0.8), places=14)
        self.assertAlmostEqual(cn, 1.0 / math.cosh(0.8), places=14)
        self.assertAlmostEqual(dn, cn, places=15)

    def test_quarter_period(self):
        k = 0.6
        sn, cn, dn = jacobi(ellip_K(k), k)
        self.assertAlmostEqual(sn, 1.0, places=12)
        self.assertAlmostEqual(dn, math.sqrt(1.0 - k * k), places=12)
