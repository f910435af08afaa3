import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from ArchCopula.utils import write_matrix_csv
from copulas.registry import CopulaModel
from copulas.sampling import RandomStream


class FitCommandTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.path = str(Path(cls.tmp.name) / "gumbel.csv")
        sample = CopulaModel("gumbel", (2.0,)).sample(1000, 5, RandomStream(21))
        write_matrix_csv(sample, cls.path)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def fit(self, **options) -> dict:
        out = StringIO()
        call_command("fit", input=self.path, stdout=out, stderr=StringIO(), **options)
        return json.loads(out.getvalue())

    def test_fits_gumbel(self):
        payload = self.fit(family="gumbel")
        self.assertEqual((payload["n"], payload["d"]), (1000, 5))
        self.assertAlmostEqual(payload["fit"]["params"]["theta"], 2.0, delta=0.2)
        self.assertEqual(payload["fit"]["estimator"], "mle")
        self.assertIn("lower", payload["fit"]["initial_region"])
        self.assertIn("fit_seconds", payload["timing"])
        self.assertAlmostEqual(payload["tau_hat"], 0.5, delta=0.05)

    def test_diagonal_estimator(self):
        payload = self.fit(family="gumbel", estimator="diag")
        self.assertEqual(payload["fit"]["estimator"], "diag")
        self.assertIsNone(payload["fit"]["initial_region"])
        self.assertNotIn("tau_hat", payload)

    def test_likelihood_ratio_interval(self):
        payload = self.fit(family="gumbel", ci="lr")
        interval = payload["ci"][0]
        self.assertEqual(interval["method"], "likelihood_ratio")
        theta = interval["intervals"]["theta"]
        self.assertLess(theta["lower"], payload["fit"]["params"]["theta"])
        self.assertGreater(theta["upper"], payload["fit"]["params"]["theta"])
        self.assertIn("ci_seconds", payload["timing"])

    def test_diagonal_estimator_needs_gumbel(self):
        with self.assertRaises(CommandError) as ctx:
            self.fit(family="clayton", estimator="diag")
        self.assertEqual(ctx.exception.returncode, 1)

    def test_profile_interval_needs_two_parameters(self):
        with self.assertRaises(CommandError) as ctx:
            self.fit(family="gumbel", ci="profile")
        self.assertEqual(ctx.exception.returncode, 1)

    def test_non_numeric_input(self):
        bad = Path(self.tmp.name) / "bad.csv"
        bad.write_text("a,b\n1,x\n2,3\n", encoding="utf-8")
        with self.assertRaises(CommandError) as ctx:
            call_command("fit", input=str(bad), family="clayton", stdout=StringIO(),
                         stderr=StringIO())
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_file(self):
        with self.assertRaises(CommandError):
            call_command("fit", input=str(Path(self.tmp.name) / "nope.csv"), family="clayton",
                         stdout=StringIO(), stderr=StringIO())
