import configparser
from pathlib import Path

import yaml
from django.conf import settings
from django.test import SimpleTestCase

ROOT = Path(settings.BASE_DIR)


def pinned_packages() -> set[str]:
    lines = (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines()
    return {line.split("==")[0].strip().lower() for line in lines if "==" in line}


class PreCommitTests(SimpleTestCase):
    def test_config_runs_the_setup_cfg_linters(self):
        config = yaml.safe_load((ROOT / ".pre-commit-config.yaml").read_text(encoding="utf-8"))
        hooks = {hook["id"] for repo in config["repos"] for hook in repo["hooks"]}
        self.assertLessEqual({"flake8", "isort"}, hooks)
        self.assertIn("pre_commit", pinned_packages())


class MypyConfigTests(SimpleTestCase):
    def test_plugins_have_their_stubs(self):
        parser = configparser.ConfigParser()
        parser.read(ROOT / "setup.cfg", encoding="utf-8")
        plugins = parser.get("mypy", "plugins", fallback="")
        packages = pinned_packages()
        if "mypy_django_plugin" in plugins:
            self.assertIn("django-stubs", packages)
        if "mypy_drf_plugin" in plugins:
            self.assertIn("djangorestframework-stubs", packages)
