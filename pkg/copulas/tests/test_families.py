import math

import numpy as np
from django.test import SimpleTestCase

from copulas import families
from copulas.sampling import RandomStream
from core.exceptions import DomainError, RangeError

THETAS = {"amh": 0.7, "clayton": 2.0, "frank": 5.0, "gumbel": 2.0, "joe": 2.5}


def interior_points(n: int, d: int, seed: int = 3) -> np.ndarray:
    return RandomStream(seed).generator.uniform(0.05, 0.95, size=(n, d))


class GeneratorTests(SimpleTestCase):
    def test_psi_inverse_round_trip(self):
        u = np.linspace(0.05, 0.95, 7)
        for family, theta in THETAS.items():
            with self.subTest(family=family):
                back = families.psi(family, theta, families.psi_inv(family, theta, u))
                np.testing.assert_allclose(back, u, rtol=1e-10)

    def test_frank_round_trip_single_point(self):
        t = families.psi_inv("frank", 2.0, 0.3)
        self.assertAlmostEqual(float(families.psi("frank", 2.0, t)), 0.3, places=12)

    def test_order_zero_is_log_psi(self):
        t = np.array([0.1, 1.0, 4.0])
        for family, theta in THETAS.items():
            with self.subTest(family=family):
                np.testing.assert_allclose(
                    families.log_gen_deriv(family, theta, 0, t),
                    np.log(families.psi(family, theta, t)),
                    rtol=1e-12,
                )

    def test_gumbel_high_order_derivative(self):
        value = math.exp(float(families.log_gen_deriv("gumbel", 1.25, 50, 15.0)))
        self.assertAlmostEqual(value / 1057.0, 1.0, delta=0.01)

    def test_large_order_stays_finite(self):
        for family, theta in THETAS.items():
            with self.subTest(family=family):
                value = families.log_gen_deriv(family, theta, 100, np.array([1e-3, 1.0, 100.0]))
                self.assertTrue(np.all(np.isfinite(value)))

    def test_clayton_derivative_closed_form(self):
        # (-1)^d psi^(d)(t) = (1+t)^(-d-1/theta) prod_{k<d} (k + 1/theta)
        theta, d, t = 2.0, 5, 1.0
        expected = -(d + 1.0 / theta) * math.log1p(t) + sum(
            math.log(k + 1.0 / theta) for k in range(d)
        )
        self.assertAlmostEqual(float(families.log_gen_deriv("clayton", theta, d, t)), expected,
                               places=12)

    def test_frank_derivative_matches_finite_difference(self):
        theta, t, h = 2.0, 0.7, 1e-4

        def second(x):
            return math.exp(float(families.log_gen_deriv("frank", theta, 2, x)))

        numeric = -(-second(t + 2 * h) + 8 * second(t + h) - 8 * second(t - h)
                    + second(t - 2 * h)) / (12 * h)
        exact = math.exp(float(families.log_gen_deriv("frank", theta, 3, t)))
        self.assertAlmostEqual(numeric / exact, 1.0, delta=1e-5)

    def test_boundary_parameter_is_independence(self):
        t = np.array([0.5, 2.0])
        for family, theta in (("gumbel", 1.0), ("joe", 1.0), ("amh", 0.0)):
            with self.subTest(family=family):
                np.testing.assert_allclose(families.log_gen_deriv(family, theta, 4, t), -t)

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            families.log_gen_deriv("clayton", -1.0, 2, 1.0)
        with self.assertRaises(DomainError):
            families.log_gen_deriv("clayton", 2.0, 2, 0.0)
        with self.assertRaises(DomainError):
            families.psi("gumbel", 0.5, 1.0)

    def test_monte_carlo_derivative_near_closed_form(self):
        estimate = families.mc_gen_deriv("clayton", 2.0, 5, 1.0, 100_000, RandomStream(11))
        exact = math.exp(float(families.log_gen_deriv("clayton", 2.0, 5, 1.0)))
        self.assertLess(abs(estimate.value - exact), 4.0 * estimate.std_error)


class DensityTests(SimpleTestCase):
    def test_closed_form_matches_generic_composition(self):
        u = interior_points(20, 4)
        for family, theta in THETAS.items():
            with self.subTest(family=family):
                np.testing.assert_allclose(
                    families.log_density(family, theta, u),
                    families.generic_log_density(family, theta, u),
                    atol=1e-9,
                )

    def test_bivariate_gumbel_density(self):
        theta, u, v = 2.0, 0.3, 0.7
        x, y = -math.log(u), -math.log(v)
        s = (x**theta + y**theta) ** (1.0 / theta)
        density = (
            math.exp(-s) / (u * v) * (x * y) ** (theta - 1.0) * s ** (1.0 - 2.0 * theta)
            * (s + theta - 1.0)
        )
        self.assertAlmostEqual(
            float(families.log_density("gumbel", theta, np.array([u, v]))), math.log(density),
            places=10,
        )

    def test_independence_limits(self):
        u = interior_points(5, 3)
        np.testing.assert_allclose(families.log_density("gumbel", 1.0, u), 0.0, atol=1e-12)
        np.testing.assert_allclose(families.log_density("clayton", 1e-6, u), 0.0, atol=1e-3)

    def test_single_point_returns_float(self):
        value = families.log_density("clayton", 2.0, np.array([0.2, 0.4, 0.6]))
        self.assertIsInstance(value, float)

    def test_points_on_the_boundary_are_rejected(self):
        with self.assertRaises(DomainError):
            families.log_density("clayton", 2.0, np.array([0.0, 0.5]))


class CdfTests(SimpleTestCase):
    def test_uniform_margins(self):
        near_one = 1.0 - 1e-12
        for family, theta in THETAS.items():
            for x in (0.1, 0.5, 0.9):
                with self.subTest(family=family, x=x):
                    value = families.copula_cdf(family, theta, np.array([x, near_one, near_one]))
                    self.assertAlmostEqual(value, x, places=9)

    def test_clayton_closed_form(self):
        theta, u = 2.0, interior_points(10, 4)
        expected = (np.sum(u ** -theta, axis=1) - 4 + 1) ** (-1.0 / theta)
        np.testing.assert_allclose(families.copula_cdf("clayton", theta, u), expected, rtol=1e-12)

    def test_gumbel_at_one_is_the_product(self):
        u = interior_points(10, 3)
        np.testing.assert_allclose(families.copula_cdf("gumbel", 1.0, u), np.prod(u, axis=1),
                                   rtol=1e-12)

    def test_between_product_and_minimum(self):
        u = interior_points(25, 3)
        for family in ("clayton", "gumbel", "joe", "frank"):
            with self.subTest(family=family):
                value = families.copula_cdf(family, THETAS[family], u)
                self.assertTrue(np.all(value <= u.min(axis=1) + 1e-12))
                self.assertTrue(np.all(value >= np.prod(u, axis=1) - 1e-12))

    def test_single_point_returns_float(self):
        self.assertIsInstance(families.copula_cdf("frank", 5.0, np.array([0.3, 0.6])), float)


class ScoreTests(SimpleTestCase):
    def test_analytic_score_matches_numeric(self):
        u = interior_points(15, 3)
        for family, theta in THETAS.items():
            with self.subTest(family=family):
                np.testing.assert_allclose(
                    families.score(family, theta, u),
                    families.score(family, theta, u, method="numeric"),
                    rtol=1e-5,
                    atol=1e-6,
                )

    def test_clayton_score_at_centre(self):
        u = np.array([0.5, 0.5])
        h = 1e-4
        numeric = (
            families.log_density("clayton", 1.0 + h, u)
            - families.log_density("clayton", 1.0 - h, u)
        ) / (2 * h)
        self.assertAlmostEqual(float(families.score("clayton", 1.0, u)), numeric, delta=1e-6)

    def test_clayton_hessian_matches_score_difference(self):
        u = interior_points(30, 5)
        theta, h = 2.0, 1e-5
        numeric = (
            families.score("clayton", theta + h, u) - families.score("clayton", theta - h, u)
        ) / (2 * h)
        np.testing.assert_allclose(
            families.clayton_loglik_hessian(theta, u), numeric, rtol=1e-4, atol=1e-6
        )


class TauTests(SimpleTestCase):
    def test_closed_forms(self):
        self.assertAlmostEqual(families.tau("clayton", 2.0), 0.5)
        self.assertAlmostEqual(families.tau("gumbel", 2.0), 0.5)
        self.assertEqual(families.tau("joe", 1.0), 0.0)

    def test_inverse_round_trip(self):
        for family in THETAS:
            for target in (0.1, 0.25, 0.75):
                if family == "amh" and target > 1.0 / 3.0:
                    continue
                with self.subTest(family=family, tau=target):
                    theta = families.tau_inverse(family, target)
                    self.assertAlmostEqual(families.tau(family, theta), target, delta=1e-9)

    def test_tau_increases_with_theta(self):
        grids = {
            "amh": np.linspace(0.01, 0.99, 20),
            "clayton": np.linspace(0.1, 20.0, 20),
            "frank": np.linspace(0.1, 40.0, 20),
            "gumbel": np.linspace(1.0, 20.0, 20),
            "joe": np.linspace(1.0, 20.0, 20),
        }
        for family, grid in grids.items():
            with self.subTest(family=family):
                values = [families.tau(family, theta) for theta in grid]
                self.assertTrue(np.all(np.diff(values) > 0))

    def test_joe_closed_form_matches_series(self):
        for theta in (1.5, 2.0, 4.0):
            with self.subTest(theta=theta):
                self.assertAlmostEqual(
                    families.tau("joe", theta), families.joe_tau_series(theta), places=8
                )

    def test_unattainable_tau(self):
        with self.assertRaises(RangeError):
            families.tau_inverse("amh", 0.5)
        with self.assertRaises(RangeError):
            families.tau_inverse("clayton", 0.0)
        self.assertEqual(families.tau_inverse("gumbel", 0.0), 1.0)

    def test_tail_dependence(self):
        lower, upper = families.tail_dependence("clayton", 2.0)
        self.assertAlmostEqual(lower, 2.0 ** -0.5)
        self.assertEqual(upper, 0.0)
        lower, upper = families.tail_dependence("gumbel", 2.0)
        self.assertEqual(lower, 0.0)
        self.assertAlmostEqual(upper, 2.0 - math.sqrt(2.0))

    def test_kendall_distribution_in_one_dimension_is_identity(self):
        w = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(families.kendall_distribution("clayton", 2.0, 1, w), w)

    def test_kendall_distribution_is_a_distribution(self):
        w = np.linspace(0.0, 1.0, 11)
        values = families.kendall_distribution("gumbel", 2.0, 3, w)
        self.assertEqual(values[0], 0.0)
        self.assertEqual(values[-1], 1.0)
        self.assertTrue(np.all(np.diff(values) >= 0))
        self.assertTrue(np.all(values[1:-1] >= w[1:-1]))
