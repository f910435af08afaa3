import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from copulas.registry import ModelId
from core.exceptions import ConfigError
from experiments.serializers import attainable, load_config, validate_config


def base_config(**overrides) -> dict:
    config = {
        "kind": "rmse_scaling",
        "families": ["clayton"],
        "taus": [0.5],
        "ns": [20],
        "ds": [5],
        "replications": 3,
    }
    config.update(overrides)
    return config


class ValidateConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = validate_config(base_config())
        self.assertEqual(cfg["seed"], settings.ARCHCOP_DEFAULT_SEED)
        self.assertEqual(cfg["workers"], settings.ARCHCOP_WORKERS)
        self.assertEqual(cfg["levels"], [0.95])
        self.assertEqual(cfg["family_taus"], [("clayton", 0.5)])
        self.assertAlmostEqual(cfg["h"], 0.1)

    def test_unknown_family(self):
        with self.assertRaises(ConfigError) as ctx:
            validate_config(base_config(families=["student"]))
        self.assertIn("student", str(ctx.exception))
        self.assertIn("fields", ctx.exception.diagnostics)

    def test_family_must_match_the_kind(self):
        with self.assertRaises(ConfigError):
            validate_config(base_config(kind="two_param"))
        with self.assertRaises(ConfigError):
            validate_config(base_config(families=["gig"]))

    def test_empty_grid(self):
        with self.assertRaises(ConfigError):
            validate_config(base_config(taus=[]))

    def test_out_of_range_values(self):
        for overrides in ({"taus": [1.0]}, {"levels": [1.5]}, {"ns": [1]}, {"replications": 0}):
            with self.subTest(**overrides):
                with self.assertRaises(ConfigError):
                    validate_config(base_config(**overrides))

    def test_unattainable_tau_is_dropped(self):
        with self.assertLogs("experiments.serializers", level="WARNING"):
            cfg = validate_config(base_config(families=["amh", "clayton"], taus=[0.25, 0.5]))
        self.assertEqual(
            cfg["family_taus"], [("amh", 0.25), ("clayton", 0.25), ("clayton", 0.5)]
        )

    def test_nothing_attainable(self):
        with self.assertRaises(ConfigError):
            validate_config(base_config(families=["amh"], taus=[0.5]))

    def test_not_a_mapping(self):
        with self.assertRaises(ConfigError):
            validate_config(["kind", "coverage"])


class AttainableTests(SimpleTestCase):
    def test_bounds(self):
        self.assertTrue(attainable(ModelId.GUMBEL, 0.0))
        self.assertFalse(attainable(ModelId.CLAYTON, 0.0))
        self.assertFalse(attainable(ModelId.AMH, 0.4))
        self.assertTrue(attainable(ModelId.OPCLAYTON, 0.9))
        self.assertFalse(attainable(ModelId.GIG, 0.0))


class LoadConfigTests(SimpleTestCase):
    def test_reads_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "study.yaml"
            path.write_text(
                "kind: coverage\nfamilies: [frank]\ntaus: [0.25]\nns: [50]\nds: [3]\n"
                "replications: 2\nmc_size: 100\n",
                encoding="utf-8",
            )
            cfg = load_config(path)
        self.assertEqual(cfg["kind"], "coverage")
        self.assertEqual(cfg["mc_size"], 100)

    def test_bundled_configs_are_valid(self):
        for path in sorted((Path(settings.BASE_DIR) / "experiments" / "configs").glob("*.yaml")):
            with self.subTest(config=path.name):
                self.assertIn(load_config(path)["kind"], ("rmse_scaling", "coverage", "two_param"))

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/study.yaml")

    def test_malformed_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.yaml"
            path.write_text("kind: [coverage\n", encoding="utf-8")
            with self.assertRaises(ConfigError):
                load_config(path)
