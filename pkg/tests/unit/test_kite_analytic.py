import math
import os
import sys
import unittest

import numpy as np

# Add the repository root to the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from kiteratio.errors import DomainError
from kiteratio.graph_core import KiteSpec, kite
from kiteratio.kite_analytic import (_reduced_secular, best_kite, is_strict_local_max, kite_lambda1, kite_log_gamma,
                                     kite_sweep, log_phi_sequence, secular_function, solve_kite)
from kiteratio.spectral import log_phi, perron
from tests.utils.test_helpers import paw_lambda1


class TestKiteRoots(unittest.TestCase):
    """Tests for the analytic spectral radius of kites"""

    def test_paw_against_cubic(self):
        lam = kite_lambda1(KiteSpec(2, 3))
        self.assertLess(abs(lam - paw_lambda1()), 1e-9)
        self.assertLess(abs(kite_log_gamma(KiteSpec(2, 3)) - math.log(lam)), 1e-9)

    def test_degenerate_kites(self):
        self.assertEqual(kite_lambda1(KiteSpec(1, 9)), 8.0)
        self.assertEqual(kite_log_gamma(KiteSpec(1, 9)), 0.0)
        self.assertAlmostEqual(kite_lambda1(KiteSpec(3, 2)), 2 * math.cos(math.pi / 5), places=14)

    def test_path_kite_has_no_log_gamma(self):
        with self.assertRaises(DomainError):
            kite_log_gamma(KiteSpec(3, 2))

    def test_bad_tolerance(self):
        with self.assertRaises(DomainError):
            kite_lambda1(KiteSpec(4, 5), tol=0)

    def test_root_in_bracket(self):
        for r, s in [(2, 3), (10, 4), (40, 12), (3, 100)]:
            lam = kite_lambda1(KiteSpec(r, s))
            self.assertGreater(lam, s - 1)
            self.assertLess(lam, s)

    def test_matches_power_iteration(self):
        for r in range(2, 13):
            for s in range(3, 13):
                with self.subTest(r=r, s=s):
                    spec = KiteSpec(r, s)
                    pd = perron(kite(spec))
                    self.assertLess(abs(kite_lambda1(spec) - pd.lambda1), 1e-9)
                    self.assertLess(abs(kite_log_gamma(spec) - pd.log_gamma) / pd.log_gamma, 1e-8)


class TestSecularFunction(unittest.TestCase):
    """Tests for the secular equation in recurrence and closed form"""

    def test_sign_agreement(self):
        for r, s in [(4, 5), (60, 7), (120, 30)]:
            for lam in np.linspace(s - 1 + 1e-6, s - 1e-6, 9):
                with self.subTest(r=r, s=s, lam=lam):
                    recurrence = secular_function(KiteSpec(r, s), lam)
                    closed = _reduced_secular(lam, r, s)
                    self.assertEqual(np.sign(recurrence), np.sign(closed))

    def test_root_is_zero(self):
        spec = KiteSpec(6, 5)
        lam = kite_lambda1(spec)
        self.assertLess(abs(_reduced_secular(lam, spec.r, spec.s)), 1e-9)

    def test_log_phi_sequence(self):
        for lam in (2.5, 3.0, 40.0):
            logs = log_phi_sequence(lam, 120)
            expected = log_phi(lam, np.arange(1, 121))
            self.assertTrue(np.allclose(logs, expected, rtol=1e-10, atol=1e-10))


class TestKiteSolutions(unittest.TestCase):
    """Tests for full kite solutions and best-kite sweeps"""

    def test_path_profile(self):
        sol = solve_kite(KiteSpec(5, 6))
        profile = sol.path_profile
        self.assertEqual(len(profile), 5)
        self.assertAlmostEqual(profile[-1], 1.0, places=14)
        self.assertAlmostEqual(profile[0], math.exp(-sol.log_gamma), places=12)
        self.assertTrue(all(a < b for a, b in zip(profile, profile[1:])))

    def test_profile_matches_eigenvector(self):
        spec = KiteSpec(5, 6)
        pd = perron(kite(spec))
        profile = solve_kite(spec).path_profile
        self.assertTrue(np.allclose(pd.x[:5], profile, atol=1e-9))

    def test_gamma_exposure(self):
        self.assertIsNotNone(solve_kite(KiteSpec(5, 6)).gamma)
        big = solve_kite(KiteSpec(300, 200), with_profile=False)
        self.assertGreater(big.log_gamma, 700)
        self.assertIsNone(big.gamma)
        self.assertIsNone(big.path_profile)

    def test_sweep_shape(self):
        r, lambdas, log_gammas = kite_sweep(10)
        self.assertEqual(r.tolist(), list(range(2, 9)))
        self.assertEqual(len(lambdas), 7)
        for ri, lg in zip(r, log_gammas):
            self.assertAlmostEqual(lg, kite_log_gamma(KiteSpec(int(ri), 11 - int(ri))), places=9)

    def test_sweep_needs_four_vertices(self):
        with self.assertRaises(DomainError):
            kite_sweep(3)

    def test_best_kite_small(self):
        self.assertEqual(best_kite(4).spec, KiteSpec(2, 3))
        sol = best_kite(50)
        r, _, log_gammas = kite_sweep(50)
        self.assertAlmostEqual(sol.log_gamma, log_gammas.max(), places=9)
        self.assertTrue(is_strict_local_max(50, sol.spec.r))
        self.assertFalse(is_strict_local_max(50, 2))

    def test_best_kite_5000_in_window(self):
        sol = best_kite(5000)
        self.assertGreater(sol.spec.r, 4191.7)
        self.assertLess(sol.spec.r, 4481.9)
        self.assertEqual(sol.spec.n, 5000)

    def test_ratio_increasing_in_clique_order(self):
        for r in range(2, 13):
            values = [kite_log_gamma(KiteSpec(r, s)) for s in range(3, 41)]
            with self.subTest(r=r):
                self.assertTrue(all(a < b for a, b in zip(values, values[1:])))

    def test_ratio_between_powers_of_lambda(self):
        # (lambda - 1) phi_j <= phi_{j+1} <= lambda phi_j along the path
        for r in range(2, 13):
            for s in range(3, 13):
                with self.subTest(r=r, s=s):
                    spec = KiteSpec(r, s)
                    lam = kite_lambda1(spec)
                    value = kite_log_gamma(spec)
                    slack = 1e-12 * max(1.0, value)
                    self.assertLessEqual((r - 1) * math.log(lam - 1.0), value + slack)
                    self.assertLessEqual(value, (r - 1) * math.log(lam) + slack)

    def test_ratio_increasing_in_lambda(self):
        # phi_k(sigma) grows with lambda for fixed k
        for j in (3, 10, 40):
            values = [log_phi(lam, j) for lam in (2.1, 2.5, 3.0, 10.0, 100.0)]
            self.assertTrue(all(a < b for a, b in zip(values, values[1:])))


if __name__ == '__main__':
    unittest.main()
