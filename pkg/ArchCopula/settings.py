"""
Django settings for the ArchCopula project.

The project has no web surface; Django provides settings, the management
command CLI and the test runner. Every value can be overridden from the
environment or from a ``.env`` file next to ``manage.py``.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.1/ref/settings/
"""

from pathlib import Path

import environ

env = environ.Env(
    DEBUG=(bool, False),
    ARCHCOP_SLOW_TESTS=(bool, False),
)

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

environ.Env.read_env(BASE_DIR / ".env")

SECRET_KEY = env("SECRET_KEY", default="archcopula-local-only")

DEBUG = env("DEBUG", default=False)

ALLOWED_HOSTS: list[str] = []

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    # -------------
    "core",
    "copulas",
    "estimation",
    "inference",
    "experiments",
    # -------------
    "rest_framework",
]

# Database
# Nothing is persisted; the default is an in-memory sqlite database so that
# Django's checks and test runner have something to point at.

DATABASES = {"default": env.db("DATABASE_URL", default="sqlite://:memory:")}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Logging
# stdout carries CSV/JSON only; every diagnostic goes to stderr.

LOG_LEVEL = env("ARCHCOP_LOG_LEVEL", default="WARNING")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "app_log": {"handlers": ["stderr"], "level": "ERROR", "propagate": False},
    },
    "root": {"handlers": ["stderr"], "level": LOG_LEVEL},
}


# Copula toolkit

ARCHCOP_DEFAULT_SEED = env.int("ARCHCOP_DEFAULT_SEED", default=20110101)
ARCHCOP_WORKERS = env.int("ARCHCOP_WORKERS", default=1)
ARCHCOP_OUTPUT_DIR = env("ARCHCOP_OUTPUT_DIR", default=str(BASE_DIR / "output"))
ARCHCOP_SLOW_TESTS = env("ARCHCOP_SLOW_TESTS")

# Numerical knobs
ARCHCOP_STIRLING_MAX_N = env.int("ARCHCOP_STIRLING_MAX_N", default=200)
ARCHCOP_GUMBEL_CHECK_MAX_D = env.int("ARCHCOP_GUMBEL_CHECK_MAX_D", default=40)
ARCHCOP_QUAD_EPSABS = env.float("ARCHCOP_QUAD_EPSABS", default=1e-10)

JSON_SCHEMA_VERSION = "1.0"
