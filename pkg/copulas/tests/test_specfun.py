import math

import mpmath
import numpy as np
from django.test import SimpleTestCase

from copulas import specfun
from copulas.specfun import SignedLog
from core.exceptions import DomainError


class SignedLogTests(SimpleTestCase):
    def test_arithmetic(self):
        two, five = SignedLog.from_float(2.0), SignedLog.from_float(5.0)
        self.assertAlmostEqual((two - five).value, -3.0)
        self.assertAlmostEqual((two * -five).value, -10.0)
        self.assertAlmostEqual((five / two).value, 2.5)
        self.assertAlmostEqual(float(two + five), 7.0)

    def test_exact_cancellation_is_zero(self):
        three = SignedLog.from_float(3.0)
        self.assertEqual((three - three).sign, 0)
        self.assertEqual((three - three).log_abs, -math.inf)

    def test_zero_is_normalized(self):
        self.assertEqual(SignedLog(1, -math.inf).sign, 0)
        self.assertEqual(SignedLog(0, 4.0).log_abs, -math.inf)
        self.assertEqual(SignedLog.from_float(0.0), SignedLog.zero())
        with self.assertRaises(ZeroDivisionError):
            SignedLog.from_float(1.0) / SignedLog.zero()
        with self.assertRaises(DomainError):
            SignedLog(2, 0.0)

    def test_huge_magnitudes(self):
        big = SignedLog(1, 5000.0)
        self.assertAlmostEqual((big * big).log_abs, 10000.0)
        self.assertAlmostEqual((big + big).log_abs, 5000.0 + math.log(2.0))

    def test_signed_logsumexp(self):
        log_abs, sign = specfun.signed_logsumexp(np.log([3.0, 5.0]), np.array([1.0, -1.0]))
        self.assertAlmostEqual(float(log_abs), math.log(2.0))
        self.assertEqual(float(sign), -1.0)
        log_abs, sign = specfun.signed_logsumexp(np.log([3.0, 3.0]), np.array([1.0, -1.0]))
        self.assertEqual(float(log_abs), -math.inf)
        self.assertEqual(float(sign), 0.0)


class ElementaryTests(SimpleTestCase):
    def test_log1mexp(self):
        self.assertAlmostEqual(specfun.log1mexp(1e-20), math.log(1e-20), places=10)
        self.assertAlmostEqual(specfun.log1mexp(50.0) / -math.exp(-50.0), 1.0)
        self.assertAlmostEqual(specfun.log1mexp(1.0), math.log(1.0 - math.exp(-1.0)))

    def test_log_expm1(self):
        self.assertAlmostEqual(specfun.log_expm1(1.0), math.log(math.e - 1.0))
        self.assertAlmostEqual(specfun.log_expm1(800.0), 800.0)
        np.testing.assert_allclose(specfun.log_expm1(np.array([1e-10, 40.0])),
                                   [math.log(1e-10), 40.0], rtol=1e-9)

    def test_log_gamma_ratio(self):
        self.assertAlmostEqual(specfun.log_gamma_ratio(5.0, 3.0), math.log(12.0))
        with self.assertRaises(DomainError):
            specfun.log_gamma_ratio(0.0, 1.0)


class StirlingTests(SimpleTestCase):
    def test_small_values(self):
        tables = specfun.stirling_tables(10)
        self.assertAlmostEqual(tables.first(4, 2).value, 11.0)
        self.assertAlmostEqual(tables.first(4, 1).value, -6.0)
        self.assertAlmostEqual(tables.second(5, 2).value, 15.0)
        self.assertAlmostEqual(tables.second(7, 7).value, 1.0)
        self.assertEqual(tables.first(4, 0).sign, 0)
        self.assertEqual(tables.second(3, 5).sign, 0)

    def test_exact_rows(self):
        self.assertEqual(specfun.exact_stirling_first(4), (0, -6, 11, -6, 1))
        self.assertEqual(specfun.exact_stirling_second(4)[4], (0, 1, 7, 6, 1))

    def test_log_tables_match_exact_integers(self):
        tables = specfun.stirling_tables(30)
        first = specfun.exact_stirling_first(30)
        second = specfun.exact_stirling_second(30)[30]
        for k in range(1, 31):
            with self.subTest(k=k):
                self.assertEqual(tables.first(30, k).sign, 1 if first[k] > 0 else -1)
                self.assertAlmostEqual(
                    tables.first(30, k).log_abs, float(mpmath.log(abs(first[k]))), places=9
                )
                self.assertAlmostEqual(
                    tables.second(30, k).log_abs, float(mpmath.log(second[k])), places=9
                )

    def test_tables_grow(self):
        self.assertGreaterEqual(specfun.stirling_tables(350).max_n, 350)
        with self.assertRaises(DomainError):
            specfun.StirlingTables(5).first(6, 1)
        with self.assertRaises(DomainError):
            specfun.stirling_tables(0)


class PolylogTests(SimpleTestCase):
    def test_closed_forms(self):
        z = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(np.exp(specfun.log_polylog_neg(0, z)), z / (1 - z))
        np.testing.assert_allclose(np.exp(specfun.log_polylog_neg(1, z)), z / (1 - z) ** 2)
        np.testing.assert_allclose(
            np.exp(specfun.log_polylog_neg(2, z)), z * (1 + z) / (1 - z) ** 3
        )

    def test_matches_mpmath_at_high_order(self):
        z = mpmath.mpf("0.3")
        terms = (mpmath.mpf(k) ** 40 * z**k for k in range(1, 2000))
        expected = float(mpmath.log(mpmath.fsum(terms)))
        self.assertAlmostEqual(specfun.polylog_neg(40, 0.3).log_abs / expected, 1.0, places=10)

    def test_from_log_argument(self):
        self.assertAlmostEqual(
            specfun.log_polylog_neg_from_log(3, math.log(0.25)),
            specfun.log_polylog_neg(3, 0.25),
        )

    def test_domain(self):
        for d, z in ((2, 1.0), (2, 0.0), (-1, 0.5), (1.5, 0.5)):
            with self.subTest(d=d, z=z):
                with self.assertRaises(DomainError):
                    specfun.log_polylog_neg(d, z)


class DebyeTests(SimpleTestCase):
    def test_known_value(self):
        self.assertAlmostEqual(specfun.debye1(1.0), 0.7775046341122482, places=12)

    def test_series_joins_the_quadrature(self):
        x = specfun.DEBYE_SERIES_THRESHOLD * 1.001
        self.assertAlmostEqual(specfun.debye1(x), 1.0 - x / 4.0 + x**2 / 36.0, places=10)
        self.assertAlmostEqual(specfun.debye1(1e-8), 1.0 - 2.5e-9, places=14)

    def test_domain(self):
        with self.assertRaises(DomainError):
            specfun.debye1(0.0)


class BesselTests(SimpleTestCase):
    def test_half_order_closed_form(self):
        t = np.array([0.1, 1.0, 10.0, 700.0])
        np.testing.assert_allclose(
            specfun.log_bessel_k(0.5, t), 0.5 * np.log(np.pi / (2 * t)) - t, rtol=1e-10
        )

    def test_even_in_the_order(self):
        self.assertEqual(specfun.log_bessel_k(-1.3, 2.0), specfun.log_bessel_k(1.3, 2.0))

    def test_large_order_tiny_argument(self):
        value = specfun.log_bessel_k(150.0, 1e-3)
        expected = float(mpmath.log(mpmath.besselk(150, mpmath.mpf("0.001"))))
        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value / expected, 1.0, places=6)

    def test_domain(self):
        with self.assertRaises(DomainError):
            specfun.log_bessel_k(1.0, 0.0)
