import numpy as np
from django.test import SimpleTestCase

from copulas import families
from copulas.multiparam import GigParams, gig_tau
from copulas.registry import ModelId
from core.exceptions import DomainError, RangeError, UnsupportedFamilyError
from estimation.intervals import (
    InitialBox,
    initial_box_gig,
    initial_box_opc,
    initial_interval_1p,
    initial_interval_fixed,
    initial_region,
)


class OneParameterIntervalTests(SimpleTestCase):
    def test_clayton(self):
        box = initial_interval_1p("clayton", 0.5, h=0.01)
        self.assertAlmostEqual(box.lower[0], 1.9216, places=4)
        self.assertAlmostEqual(box.upper[0], 2.0816, places=4)
        self.assertTrue(box.contains(2.0))
        self.assertFalse(box.widened)

    def test_gumbel(self):
        box = initial_interval_1p("gumbel", 0.5, h=0.015)
        self.assertAlmostEqual(box.lower[0], 1.9417, places=4)
        self.assertAlmostEqual(box.upper[0], 2.0619, places=4)

    def test_attained_independence_end_is_kept(self):
        for family in ("gumbel", "joe"):
            with self.subTest(family=family):
                self.assertEqual(initial_interval_1p(family, 0.02).lower[0], 1.0)

    def test_unattained_lower_end_is_truncated(self):
        box = initial_interval_1p("clayton", 0.02)
        self.assertAlmostEqual(box.lower[0], families.tau_inverse("clayton", 0.005))

    def test_estimate_outside_the_range_is_clamped(self):
        with self.assertLogs("estimation.intervals", level="WARNING"):
            box = initial_interval_1p("amh", 0.5)
        self.assertAlmostEqual(
            families.tau("amh", box.upper[0]), 1.0 / 3.0 - 0.005, places=9
        )
        self.assertLess(box.upper[0], 1.0)
        with self.assertRaises(RangeError):
            initial_interval_1p("amh", 0.5, clamp=False)

    def test_zero_width_is_widened(self):
        with self.assertLogs("estimation.intervals", level="WARNING"):
            box = initial_interval_1p("frank", 0.4, h=0.0)
        self.assertTrue(box.widened)
        self.assertAlmostEqual(families.tau("frank", box.lower[0]), 0.395, places=9)
        self.assertAlmostEqual(families.tau("frank", box.upper[0]), 0.405, places=9)

    def test_invalid_widths(self):
        with self.assertRaises(DomainError):
            initial_interval_1p("clayton", 0.5, h=1.5)
        with self.assertRaises(DomainError):
            initial_interval_1p("clayton", 0.5, epsilon=0.0)

    def test_two_parameter_family_rejected(self):
        with self.assertRaises(UnsupportedFamilyError):
            initial_interval_1p("gig", 0.5)

    def test_fixed_interval(self):
        box = initial_interval_fixed("clayton", 0.25, 0.75)
        self.assertAlmostEqual(box.lower[0], 2.0 / 3.0)
        self.assertAlmostEqual(box.upper[0], 6.0)
        self.assertIsNone(box.tau_hat)
        with self.assertRaises(RangeError):
            initial_interval_fixed("clayton", 0.5, 0.25)


class TwoParameterBoxTests(SimpleTestCase):
    def test_outer_power_clayton(self):
        box = initial_box_opc(0.5)
        self.assertAlmostEqual(box.lower[0], 2.0 / 9.0)
        self.assertEqual(box.lower[1], 1.0)
        self.assertAlmostEqual(box.upper[0], 2.0)
        self.assertAlmostEqual(box.upper[1], 1.8)
        self.assertTrue(box.contains((1.0, 4.0 / 3.0)))
        self.assertEqual(len(box.anchors), 3)

    def test_outer_power_clayton_zero_widths_widen(self):
        box = initial_box_opc(0.5, 0.0, 0.0)
        self.assertTrue(box.widened)
        self.assertLess(box.lower[0], box.upper[0])

    def test_gig_corners_attain_the_band(self):
        box = initial_box_gig(0.5)
        nu_l, theta_l = box.lower
        nu_u, theta_u = box.upper
        self.assertEqual(nu_l, 0.0)
        self.assertLess(theta_l, theta_u)
        self.assertGreater(nu_u, 0.0)
        self.assertAlmostEqual(gig_tau(GigParams(0.0, theta_u)), 0.35, places=6)
        self.assertAlmostEqual(gig_tau(GigParams(0.0, theta_l)), 0.65, places=6)
        self.assertAlmostEqual(gig_tau(GigParams(nu_u, theta_l)), 0.35, places=6)

    def test_band_is_clamped_near_one(self):
        box = initial_box_opc(0.99, 0.4, 0.2)
        self.assertAlmostEqual(box.upper[0], families.tau_inverse("clayton", 0.995))

    def test_dispatch_uses_family_defaults(self):
        self.assertEqual(initial_region("opclayton", 0.5), initial_box_opc(0.5, 0.4, 0.0))
        self.assertEqual(initial_region("clayton", 0.5).upper, initial_interval_1p(
            "clayton", 0.5, 0.1).upper)


class InitialBoxTests(SimpleTestCase):
    def test_empty_box_rejected(self):
        with self.assertRaises(RangeError):
            InitialBox(ModelId.CLAYTON, (2.0,), (1.0,), 0.5, 0.1, 0.1, 0.005)

    def test_unit_coordinates(self):
        box = InitialBox(ModelId.GIG, (0.0, 1.0), (2.0, 3.0), 0.5, 0.1, 0.1, 0.005)
        np.testing.assert_allclose(box.to_unit((1.0, 2.5)), [0.5, 0.75])
        np.testing.assert_allclose(box.from_unit((0.5, 0.75)), [1.0, 2.5])
        np.testing.assert_allclose(box.from_unit((-1.0, 2.0)), [0.0, 3.0])
        self.assertEqual(box.as_dict()["lower"], {"nu": 0.0, "theta": 1.0})
