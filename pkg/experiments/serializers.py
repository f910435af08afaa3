import logging
from pathlib import Path
from typing import Any

import yaml
from django.conf import settings
from rest_framework import serializers

from copulas.families import TAU_RANGES, FamilyId
from copulas.registry import ModelId
from core.exception_handler import flatten
from core.exceptions import ConfigError
from estimation.intervals import DEFAULT_EPSILON, DEFAULT_H

logger = logging.getLogger(__name__)

KINDS = ["rmse_scaling", "coverage", "two_param"]
COVERAGE_METHODS = ["expected_info", "score_outer", "observed_info", "likelihood_ratio"]


class ExperimentConfigSerializer(serializers.Serializer):
    """
    Schema of an experiment config file.

    One-parameter studies (``rmse_scaling``, ``coverage``) take the five
    one-parameter families, ``two_param`` takes ``opclayton`` and ``gig``.
    Tau values a family cannot attain are dropped with a warning.
    """

    kind = serializers.ChoiceField(choices=KINDS)
    families = serializers.ListField(
        child=serializers.ChoiceField(choices=[model.value for model in ModelId]), min_length=1
    )
    taus = serializers.ListField(child=serializers.FloatField(), min_length=1)
    ns = serializers.ListField(child=serializers.IntegerField(min_value=2), min_length=1)
    ds = serializers.ListField(child=serializers.IntegerField(min_value=2), min_length=1)
    replications = serializers.IntegerField(min_value=1)
    levels = serializers.ListField(child=serializers.FloatField(), default=[0.95], min_length=1)
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=COVERAGE_METHODS), default=COVERAGE_METHODS,
        min_length=1,
    )
    seed = serializers.IntegerField(min_value=0, required=False)
    workers = serializers.IntegerField(min_value=1, required=False)
    h = serializers.FloatField(min_value=0.0, max_value=1.0, default=DEFAULT_H)
    h_minus = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    h_plus = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    epsilon = serializers.FloatField(min_value=0.0, max_value=0.5, default=DEFAULT_EPSILON)
    mc_size = serializers.IntegerField(min_value=1, default=10_000)
    failure_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.05)

    def validate_levels(self, value: list[float]) -> list[float]:
        if not all(0.0 < level < 1.0 for level in value):
            raise serializers.ValidationError("levels must lie in (0, 1).")
        return value

    def validate_taus(self, value: list[float]) -> list[float]:
        if not all(0.0 <= tau < 1.0 for tau in value):
            raise serializers.ValidationError("taus must lie in [0, 1).")
        return value

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        attrs.setdefault("seed", settings.ARCHCOP_DEFAULT_SEED)
        attrs.setdefault("workers", settings.ARCHCOP_WORKERS)
        two_param = attrs["kind"] == "two_param"
        for family in attrs["families"]:
            if (ModelId(family).n_params == 2) != two_param:
                raise serializers.ValidationError(
                    {"families": f"{family} cannot be used in a {attrs['kind']} experiment."}
                )
        cells: list[tuple[str, float]] = []
        for family in attrs["families"]:
            for tau in attrs["taus"]:
                if attainable(ModelId(family), tau):
                    cells.append((family, tau))
                else:
                    logger.warning("dropping tau=%s: not attainable by %s", tau, family)
        if not cells:
            raise serializers.ValidationError({"taus": "no attainable (family, tau) pair."})
        attrs["family_taus"] = cells
        return attrs


def attainable(family: ModelId, tau: float) -> bool:
    if family.n_params == 2:
        return 0.0 < tau < 1.0
    lower, upper, lower_attained = TAU_RANGES[FamilyId(family.value)]
    return (tau >= lower if lower_attained else tau > lower) and tau < upper


def load_config(path: str | Path) -> dict[str, Any]:
    """
    Read and validate a YAML experiment config.

    Raises:
        ConfigError: If the file cannot be read or violates the schema.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read experiment config {path}: {exc}")
    return validate_config(raw)


def validate_config(raw: Any) -> dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError("an experiment config must be a mapping.")
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        errors = flatten(serializer.errors)
        raise ConfigError(
            "invalid experiment config: "
            + "; ".join(f"{key}: {value}" for key, value in errors.items()),
            {"fields": errors},
        )
    return dict(serializer.validated_data)
