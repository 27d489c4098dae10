import math
import os
import sys
import unittest

import mpmath

# Add the repository root to the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from kiteratio.certifier import (FAILS, FLOAT, HOLDS, INDETERMINATE, MPBackend, _certify, _offsets,
                                 check_appendix_A, check_appendix_A_minimum, check_appendix_B, check_appendix_C,
                                 check_f_monotonicity, check_h_decreasing, check_increasing, check_inequality5,
                                 check_lemma23, g, h, log_f, log_spaced, sweep, window_j_values)
from kiteratio.errors import CertifierError


class TestBackends(unittest.TestCase):
    """Tests for the float and extended-precision backends"""

    def test_mp_backend_is_private(self):
        before = mpmath.mp.prec
        backend = MPBackend(200)
        self.assertEqual(backend.ctx.prec, 200)
        backend.log(backend.num(3))
        check_lemma23(1000, bits=150)
        self.assertEqual(mpmath.mp.prec, before)

    def test_backends_agree(self):
        m = MPBackend(113)
        self.assertAlmostEqual(float(h(5000, m)), h(5000, FLOAT), places=14)
        self.assertAlmostEqual(float(g(5000, 4300, m)), g(5000, 4300, FLOAT), places=12)

    def test_log_f(self):
        self.assertAlmostEqual(log_f(10, 3), 3 * math.log(7), places=14)


class TestCertify(unittest.TestCase):
    """Tests for verdict assignment"""

    def test_clear_margins(self):
        self.assertEqual(_certify("t", 1, lambda m: m.num(1)).verdict, HOLDS)
        self.assertEqual(_certify("t", 1, lambda m: m.num(-1)).verdict, FAILS)

    def test_zero_margin_is_indeterminate(self):
        with self.assertLogs('kiteratio.certifier', level='WARNING'):
            cert = _certify("t", 1, lambda m: m.num(0))
        self.assertEqual(cert.verdict, INDETERMINATE)

    def test_precision_disagreement_is_indeterminate(self):
        with self.assertLogs('kiteratio.certifier', level='WARNING'):
            cert = _certify("t", 1, lambda m: m.num('1e-20') + 1 - 1)
        self.assertEqual(cert.verdict, INDETERMINATE)
        self.assertEqual(cert.margin_lo, 0.0)
        self.assertGreater(cert.margin_hi, 0.0)

    def test_certificate_serialisation(self):
        cert = _certify("t", 7, lambda m: m.num(2), x=1.5)
        self.assertEqual(list(cert.to_dict()), ["target", "n", "x", "verdict", "margin_lo", "margin_hi"])
        self.assertTrue(cert.holds)
        self.assertEqual(cert.bits_lo, 53)
        self.assertNotIn("x", _certify("t", 7, lambda m: m.num(2)).to_dict())


class TestLemma23(unittest.TestCase):
    """Tests for the sign change of g between the two window ends"""

    def test_small_n_lower_end_fails(self):
        certs = {c.target: c for c in check_lemma23(16)}
        self.assertEqual(certs["lemma23.g_positive"].verdict, HOLDS)
        self.assertEqual(certs["lemma23.g_negative"].verdict, FAILS)

    def test_large_n_holds(self):
        certs = check_lemma23(10 ** 8)
        self.assertEqual(len(certs), 5)
        self.assertTrue(all(c.holds for c in certs))

    def test_decreasing_spot_checks(self):
        spots = [c for c in check_lemma23(100) if c.target == "lemma23.g_decreasing"]
        self.assertEqual(len(spots), 3)
        self.assertTrue(all(c.holds for c in spots))
        self.assertTrue(all(c.x is not None for c in spots))

    def test_rejects_small_n(self):
        with self.assertRaises(CertifierError):
            check_lemma23(15)
        with self.assertRaises(CertifierError):
            check_lemma23(100.5)


class TestAppendixChecks(unittest.TestCase):
    """Tests for the auxiliary-function certificates at the smallest admissible n"""

    def test_minimum(self):
        certs = check_appendix_A_minimum()
        self.assertEqual(len(certs), 3)
        self.assertTrue(all(c.holds for c in certs))
        self.assertAlmostEqual(certs[0].margin_hi, 3 - math.log(16), places=12)

    def test_appendix_a(self):
        certs = check_appendix_A(5000)
        self.assertTrue(all(c.holds for c in certs))
        loglog = [c for c in certs if c.target == "appendixA.loglog"][0]
        self.assertAlmostEqual(loglog.margin_hi, 0.0171, delta=0.001)

    def test_appendix_b(self):
        certs = check_appendix_B(5000)
        self.assertEqual(len(certs), 3 + 9 + 1)
        for cert in certs:
            self.assertEqual(cert.verdict, HOLDS, cert.target)

    def test_appendix_c(self):
        certs = {c.target: c for c in check_appendix_C(5000)}
        self.assertEqual(len(certs), 5)
        for cert in certs.values():
            self.assertEqual(cert.verdict, HOLDS, cert.target)
        self.assertAlmostEqual(certs["appendixC.tail_bound"].margin_hi, 0.026, delta=0.002)

    def test_appendix_needs_5000(self):
        for check in (check_appendix_A, check_appendix_B, check_appendix_C):
            with self.assertRaises(CertifierError):
                check(4999)


class TestComparisons(unittest.TestCase):
    """Tests for the window comparison and monotonicity checks"""

    def test_offsets_order(self):
        c0, c1, c2, c3 = _offsets(FLOAT, 5000)
        self.assertLess(c2, c3)
        self.assertLess(c3, c0)
        self.assertLess(c0, c1)

    def test_window_j_values(self):
        self.assertEqual(window_j_values(5000), (4210, 4345))

    def test_inequality5(self):
        self.assertEqual(check_inequality5(5000, 4333, 4210).verdict, HOLDS)
        self.assertEqual(check_inequality5(5000, 4600, 4345).verdict, FAILS)

    def test_inequality5_range(self):
        with self.assertRaises(CertifierError):
            check_inequality5(100, 1, 50)
        with self.assertRaises(CertifierError):
            check_inequality5(100, 50, 99)

    def test_f_monotonicity(self):
        for region in ("increasing", "decreasing"):
            certs = check_f_monotonicity(5000, region)
            self.assertEqual(len(certs), 5)
            self.assertTrue(all(c.holds for c in certs), region)
        with self.assertRaises(CertifierError):
            check_f_monotonicity(5000, "sideways")

    def test_h_decreasing(self):
        self.assertTrue(all(c.holds for c in check_h_decreasing([5000, 10 ** 6, 10 ** 8])))
        with self.assertRaises(CertifierError):
            check_h_decreasing([1000])

    def test_p_and_q_increasing(self):
        for fn in ("p", "q"):
            certs = check_increasing(fn, [5000, 10 ** 6])
            self.assertTrue(all(c.holds for c in certs), fn)
        with self.assertRaises(CertifierError):
            check_increasing("r", [5000])
        with self.assertRaises(CertifierError):
            check_increasing("p", [4000])


class TestSweep(unittest.TestCase):
    """Tests for threaded sweeps and summaries"""

    def test_log_spaced(self):
        values = log_spaced(5000, 10 ** 8, 100)
        self.assertEqual(len(values), 100)
        self.assertEqual(values[0], 5000)
        self.assertEqual(values[-1], 10 ** 8)
        self.assertEqual(log_spaced(1, 3, 10), [1, 2, 3])
        with self.assertRaises(CertifierError):
            log_spaced(10, 5, 3)

    def test_lemma23_summary(self):
        certs, summary = sweep("lemma23", [100, 5000, 10 ** 6], threads=2)
        self.assertEqual(summary.certificates, 15)
        self.assertEqual(summary.n_values, 3)
        self.assertEqual(summary.holds, 14)
        self.assertEqual(summary.fails, 1)
        self.assertFalse(summary.all_hold)
        self.assertEqual([c.n for c in certs[:5]], [100] * 5)
        self.assertTrue(summary.to_dict()["summary"])

    def test_sweep_order_independent_of_threads(self):
        one, _ = sweep("appendixA", [5000, 20000, 10 ** 6], threads=1)
        four, _ = sweep("appendixA", [5000, 20000, 10 ** 6], threads=4)
        self.assertEqual([c.to_dict() for c in one], [c.to_dict() for c in four])

    def test_sweep_errors(self):
        with self.assertRaises(CertifierError):
            sweep("nope", [5000])
        with self.assertRaises(CertifierError):
            sweep("appendixB", [])
        with self.assertRaises(CertifierError):
            sweep("appendixC", [100])


if __name__ == '__main__':
    unittest.main()
