import json
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from ArchCopula.utils import read_matrix_csv


def run(name: str, *args, **options) -> str:
    out = StringIO()
    call_command(name, *args, stdout=out, stderr=StringIO(), **options)
    return out.getvalue()


class SampleCommandTests(SimpleTestCase):
    def test_writes_csv_with_header(self):
        text = run("sample", family="clayton", theta=2.0, n=5, d=3, seed=1)
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], "u1,u2,u3")
        self.assertEqual(len(lines), 6)
        matrix = read_matrix_csv(StringIO(text))
        self.assertEqual(matrix.shape, (5, 3))
        self.assertTrue(((matrix > 0) & (matrix < 1)).all())

    def test_same_seed_same_output(self):
        first = run("sample", family="gig", nu=0.05, theta=0.0968, n=4, d=2, seed=3)
        second = run("sample", family="gig", nu=0.05, theta=0.0968, n=4, d=2, seed=3)
        self.assertEqual(first, second)

    def test_missing_parameter_is_a_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            run("sample", family="opclayton", theta=1.0, n=4, d=2)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_unknown_family_is_a_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            run("sample", family="student", theta=1.0, n=4, d=2)
        self.assertEqual(ctx.exception.returncode, 1)


class TauCommandTests(SimpleTestCase):
    def test_reports_tau_and_tail_dependence(self):
        payload = json.loads(run("tau", family="clayton", theta=2.0))
        self.assertAlmostEqual(payload["tau"], 0.5)
        self.assertAlmostEqual(payload["tail_dependence"]["lower"], 2.0 ** -0.5)
        self.assertEqual(payload["schema_version"], "1.0")

    def test_inverts_tau(self):
        payload = json.loads(run("tau", family="gumbel", invert=0.5))
        self.assertAlmostEqual(payload["params"]["theta"], 2.0)
        payload = json.loads(run("tau", family="opclayton", invert=0.5, beta=4.0 / 3.0))
        self.assertAlmostEqual(payload["params"]["theta"], 1.0)

    def test_unattainable_tau(self):
        with self.assertRaises(CommandError) as ctx:
            run("tau", family="amh", invert=0.5)
        self.assertEqual(ctx.exception.returncode, 1)


class DerivCommandTests(SimpleTestCase):
    def test_gumbel_high_order(self):
        payload = json.loads(run("deriv", family="gumbel", theta=1.25, d=50, t=15.0))
        self.assertAlmostEqual(payload["value"] / 1057.0, 1.0, delta=0.01)

    def test_monte_carlo_check(self):
        payload = json.loads(run("deriv", family="clayton", theta=2.0, d=5, t=1.0, mc=20_000,
                                 seed=4))
        self.assertEqual(payload["mc"]["m"], 20_000)
        self.assertLess(abs(payload["mc"]["value"] - payload["value"]),
                        5.0 * payload["mc"]["std_error"])

    def test_non_positive_argument(self):
        with self.assertRaises(CommandError) as ctx:
            run("deriv", family="clayton", theta=2.0, d=2, t=0.0)
        self.assertEqual(ctx.exception.returncode, 1)
