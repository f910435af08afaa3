from types import SimpleNamespace
from unittest import mock

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from copulas import families
from copulas.registry import CopulaModel, ModelId
from copulas.sampling import RandomStream
from core.exceptions import ConvergenceError, DomainError, NumericalError
from estimation.mle import FitResult, fit_copula, log_likelihood
from estimation.pseudo import pseudo_observations
from inference.information import InfoEstimate, InfoKind
from inference.intervals import (
    OPEN_END_GAP,
    _nuisance_bounds,
    ci_information,
    ci_likelihood_ratio,
    ci_tau_likelihood_ratio,
    confidence_interval,
    lr_cut,
    profile_ci,
    profile_loglik,
    region_membership,
)


def simulate(family: str, params: tuple[float, ...], n: int, d: int, seed: int) -> np.ndarray:
    return pseudo_observations(CopulaModel(family, params).sample(n, d, RandomStream(seed)))


class InformationIntervalTests(SimpleTestCase):
    def test_symmetric_interval(self):
        ci = ci_information(2.0, InfoEstimate(InfoKind.EXPECTED, np.array([[1.0]])), 100)
        self.assertAlmostEqual(ci.lower[0], 2.0 - 0.1959964, places=7)
        self.assertAlmostEqual(ci.upper[0], 2.0 + 0.1959964, places=7)
        self.assertEqual(ci.method, "expected_info")
        self.assertTrue(ci.contains_estimate)

    def test_higher_level_is_wider(self):
        info = InfoEstimate(InfoKind.SCORE_OUTER, np.array([[0.5]]))
        narrow = ci_information(1.0, info, 50, 0.9)
        wide = ci_information(1.0, info, 50, 0.99)
        self.assertLess(narrow.half_width[0], wide.half_width[0])

    def test_non_positive_information(self):
        with self.assertRaises(NumericalError):
            ci_information(2.0, InfoEstimate(InfoKind.SCORE_OUTER, np.array([[0.0]])), 100)

    def test_invalid_level(self):
        with self.assertRaises(DomainError):
            ci_information(2.0, InfoEstimate(InfoKind.EXPECTED, np.array([[1.0]])), 100, 1.0)

    def test_likelihood_ratio_cut(self):
        self.assertAlmostEqual(lr_cut(0.95), 1.920729, places=6)
        self.assertAlmostEqual(lr_cut(0.95, 2), 2.995732, places=6)


class LikelihoodRatioIntervalTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.u = simulate("clayton", (2.0,), 200, 3, 1)
        cls.fit = fit_copula(cls.u, "clayton")

    def loglik(self, theta: float) -> float:
        return log_likelihood(CopulaModel("clayton", (theta,)), self.u)

    def test_endpoints_sit_on_the_cut(self):
        ci = ci_likelihood_ratio(self.fit, self.u)
        target = self.fit.loglik - lr_cut(0.95)
        self.assertLess(ci.lower[0], self.fit.params[0])
        self.assertGreater(ci.upper[0], self.fit.params[0])
        self.assertAlmostEqual(self.loglik(ci.lower[0]), target, delta=1e-5)
        self.assertAlmostEqual(self.loglik(ci.upper[0]), target, delta=1e-5)
        self.assertEqual((ci.censored_lower, ci.censored_upper), ((False,), (False,)))

    def test_levels_nest(self):
        inner = ci_likelihood_ratio(self.fit, self.u, 0.9)
        outer = ci_likelihood_ratio(self.fit, self.u, 0.99)
        self.assertLess(outer.lower[0], inner.lower[0])
        self.assertGreater(outer.upper[0], inner.upper[0])

    def test_tau_interval_maps_the_endpoints(self):
        theta_ci = ci_likelihood_ratio(self.fit, self.u)
        tau_ci = ci_tau_likelihood_ratio(self.fit, self.u)
        self.assertEqual(tau_ci.param_names, ("tau",))
        self.assertAlmostEqual(tau_ci.lower[0], families.tau("clayton", theta_ci.lower[0]))
        self.assertAlmostEqual(tau_ci.upper[0], families.tau("clayton", theta_ci.upper[0]))

    def test_censored_at_the_independence_boundary(self):
        u = pseudo_observations(RandomStream(2).generator.random((100, 2)))
        model = CopulaModel("gumbel", (1.0,))
        fit = FitResult(ModelId.GUMBEL, (1.0,), log_likelihood(model, u), 0, 1, None, True)
        ci = ci_likelihood_ratio(fit, u)
        self.assertEqual(ci.lower[0], 1.0)
        self.assertTrue(ci.censored_lower[0])
        self.assertFalse(ci.censored_upper[0])
        self.assertGreater(ci.upper[0], 1.0)

    def test_dispatch(self):
        results = confidence_interval(self.fit, self.u, "score_outer")
        self.assertEqual(len(results), 1)
        self.assertEqual(results[0].method, "score_outer")
        observed = confidence_interval(self.fit, self.u, "observed_info")[0]
        self.assertTrue(observed.contains_estimate)
        expected = confidence_interval(self.fit, self.u, "expected_info", mc_size=500,
                                       rng=RandomStream(3))[0]
        self.assertEqual(expected.extra["mc_size"], 500)
        with self.assertRaises(DomainError):
            confidence_interval(self.fit, self.u, "expected_info")
        with self.assertRaises(DomainError):
            confidence_interval(self.fit, self.u, "profile")


class RegionMembershipTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.u = simulate("frank", (5.0,), 200, 3, 4)
        cls.fit = fit_copula(cls.u, "frank")

    def test_estimate_is_inside(self):
        self.assertTrue(region_membership(self.fit, self.u, self.fit.params))

    def test_distant_parameter_is_outside(self):
        self.assertFalse(region_membership(self.fit, self.u, self.fit.params[0] * 3.0))

    def test_invalid_parameter_is_outside(self):
        self.assertFalse(region_membership(self.fit, self.u, -1.0))

    def test_quadratic_form(self):
        info = InfoEstimate(InfoKind.SCORE_OUTER, np.array([[1.0]]))
        theta_hat = self.fit.params[0]
        # n = 200: the region is theta_hat -+ sqrt(3.84 / 200)
        self.assertTrue(region_membership(self.fit, self.u, theta_hat + 0.13, info=info))
        self.assertFalse(region_membership(self.fit, self.u, theta_hat + 0.15, info=info))

    def test_wrong_dimension(self):
        with self.assertRaises(DomainError):
            region_membership(self.fit, self.u, (1.0, 2.0))


class ProfileIntervalTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.u = simulate("opclayton", (1.0, 4.0 / 3.0), 100, 5, 5)
        cls.fit = fit_copula(cls.u, "opclayton")

    def test_intervals_contain_the_estimate(self):
        results = confidence_interval(self.fit, self.u, "profile")
        self.assertEqual([r.param_names for r in results], [("theta",), ("beta",)])
        for ci in results:
            with self.subTest(param=ci.param_names[0]):
                self.assertTrue(ci.contains_estimate)
                self.assertLess(ci.lower[0], ci.upper[0])
                self.assertGreaterEqual(ci.extra["profile_at_estimate"], self.fit.loglik - 1e-3)

    def test_beta_never_below_one(self):
        ci = profile_ci(self.fit, self.u, 1)
        self.assertGreaterEqual(ci.lower[0], 1.0)

    def test_one_parameter_methods_rejected(self):
        with self.assertRaises(DomainError):
            confidence_interval(self.fit, self.u, "likelihood_ratio")
        with self.assertRaises(DomainError):
            ci_likelihood_ratio(self.fit, self.u)

    def test_estimate_is_in_the_joint_region(self):
        self.assertTrue(region_membership(self.fit, self.u, self.fit.params))
        self.assertFalse(region_membership(self.fit, self.u, (self.fit.params[0] * 4.0, 1.0)))

    def test_open_ends_sit_on_the_cut(self):
        target = self.fit.loglik - lr_cut(0.95)
        for which in (0, 1):
            ci = profile_ci(self.fit, self.u, which)
            for end, censored in ((ci.lower[0], ci.censored_lower[0]),
                                  (ci.upper[0], ci.censored_upper[0])):
                if censored:
                    continue
                with self.subTest(which=which, end=end):
                    self.assertAlmostEqual(profile_loglik(self.fit, self.u, which, end), target,
                                           delta=1e-2)

    def test_profile_interval_covers_the_fixed_nuisance_interval(self):
        # with the nuisance held at its estimate the likelihood at a profile end is below the cut
        target = self.fit.loglik - lr_cut(0.95)
        for which in (0, 1):
            ci = profile_ci(self.fit, self.u, which)
            for end, censored in ((ci.lower[0], ci.censored_lower[0]),
                                  (ci.upper[0], ci.censored_upper[0])):
                if censored:
                    continue
                params = list(self.fit.params)
                params[which] = end
                with self.subTest(which=which, end=end):
                    value = log_likelihood(CopulaModel(self.fit.family, tuple(params)), self.u)
                    self.assertLessEqual(value, target + 1e-2)


class ProfileWalkTests(SimpleTestCase):
    """The profile walk on a known quadratic profile."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.u = simulate("opclayton", (1.0, 4.0 / 3.0), 60, 4, 9)
        cls.fit = fit_copula(cls.u, "opclayton")

    def quadratic(self, fit, u, which, value):
        return self.fit.loglik - 100.0 * (value - self.fit.params[which]) ** 2

    def test_walk_continues_past_a_narrow_grid(self):
        half = (lr_cut(0.95) / 100.0) ** 0.5
        with mock.patch("inference.intervals._grid_span", return_value=0.01), \
                mock.patch("inference.intervals.profile_loglik", side_effect=self.quadratic):
            ci = profile_ci(self.fit, self.u, 0)
        theta = self.fit.params[0]
        self.assertFalse(ci.censored_lower[0] or ci.censored_upper[0])
        self.assertGreater(theta - half, OPEN_END_GAP)
        self.assertAlmostEqual(ci.lower[0], theta - half, places=5)
        self.assertAlmostEqual(ci.upper[0], theta + half, places=5)
        self.assertGreater(ci.extra["evaluations"], 41)

    def test_profile_that_never_drops_raises(self):
        flat = mock.patch("inference.intervals.profile_loglik", return_value=self.fit.loglik)
        with mock.patch("inference.intervals._grid_span", return_value=0.05), flat:
            with self.assertRaises(ConvergenceError):
                profile_ci(self.fit, self.u, 1)

    def test_floor_censors_only_the_lower_end(self):
        beta = self.fit.params[1]

        def rising(fit, u, which, value):
            return self.fit.loglik - max(value - beta, 0.0) ** 2

        with mock.patch("inference.intervals._grid_span", return_value=0.05), \
                mock.patch("inference.intervals.profile_loglik", side_effect=rising):
            ci = profile_ci(self.fit, self.u, 1)
        self.assertTrue(ci.censored_lower[0])
        self.assertEqual(ci.lower[0], 1.0)
        self.assertFalse(ci.censored_upper[0])
        self.assertAlmostEqual(ci.upper[0], beta + lr_cut(0.95) ** 0.5, places=5)


class NuisanceBoundsTests(SimpleTestCase):
    def fit_stub(self, family: ModelId, params: tuple[float, float]) -> SimpleNamespace:
        return SimpleNamespace(family=family, params=params, initial_region=None)

    def test_gig_nu_is_floored_at_zero(self):
        lo, hi = _nuisance_bounds(self.fit_stub(ModelId.GIG, (0.02, 0.1)), 0)
        self.assertEqual(lo, 0.0)
        self.assertGreater(hi, 0.02)

    def test_outer_power_beta_is_floored_at_one(self):
        lo, _ = _nuisance_bounds(self.fit_stub(ModelId.OPCLAYTON, (1.0, 1.1)), 1)
        self.assertEqual(lo, 1.0)

    def test_theta_keeps_off_zero(self):
        lo, _ = _nuisance_bounds(self.fit_stub(ModelId.GIG, (0.02, 0.1)), 1)
        self.assertEqual(lo, OPEN_END_GAP)


class GigProfileTests(SimpleTestCase):
    fit = None

    def setUp(self):
        if not settings.ARCHCOP_SLOW_TESTS:
            self.skipTest("set ARCHCOP_SLOW_TESTS to run")
        if GigProfileTests.fit is None:
            GigProfileTests.u = simulate("gig", (0.05, 0.0968), 100, 5, 6)
            GigProfileTests.fit = fit_copula(GigProfileTests.u, "gig")

    def test_nu_interval_stays_in_the_domain(self):
        ci = profile_ci(self.fit, self.u, 0)
        self.assertEqual(ci.param_names, ("nu",))
        self.assertGreaterEqual(ci.lower[0], 0.0)
        self.assertTrue(ci.contains_estimate)
        if ci.censored_lower[0]:
            self.assertEqual(ci.lower[0], 0.0)

    def test_nuisance_search_stays_in_the_domain(self):
        lo, hi = _nuisance_bounds(self.fit, 0)
        self.assertGreaterEqual(lo, 0.0)
        self.assertLess(lo, hi)

    def test_theta_upper_end_crosses_the_cut(self):
        ci = profile_ci(self.fit, self.u, 1)
        self.assertFalse(ci.censored_upper[0])
        self.assertGreater(ci.upper[0], self.fit.params[1])
        self.assertAlmostEqual(profile_loglik(self.fit, self.u, 1, ci.upper[0]),
                               self.fit.loglik - lr_cut(0.95), delta=1e-2)
