from typing import Any

from django.conf import settings
from rest_framework import serializers

from copulas.registry import ModelId
from estimation.intervals import DEFAULT_EPSILON
from estimation.mle import FitResult

CI_CHOICES = ["expected_info", "score_outer", "observed_info", "likelihood_ratio", "profile"]
CI_ALIASES = {"lr": "likelihood_ratio", "expected": "expected_info", "observed": "observed_info"}


class FitOptionsSerializer(serializers.Serializer):
    """Flags of the ``fit`` command."""

    input = serializers.CharField()
    family = serializers.ChoiceField(choices=[model.value for model in ModelId])
    data = serializers.ChoiceField(choices=["raw", "pseudo"], default="raw")
    estimator = serializers.ChoiceField(choices=["mle", "diag"], default="mle")
    tau_method = serializers.ChoiceField(choices=["auto", "pairwise", "diag"], default="auto")
    h = serializers.FloatField(min_value=0.0, max_value=1.0, required=False, allow_null=True)
    h_minus = serializers.FloatField(
        min_value=0.0, max_value=1.0, required=False, allow_null=True
    )
    h_plus = serializers.FloatField(min_value=0.0, max_value=1.0, required=False, allow_null=True)
    epsilon = serializers.FloatField(min_value=0.0, max_value=0.5, default=DEFAULT_EPSILON)
    ci = serializers.ChoiceField(
        choices=CI_CHOICES + list(CI_ALIASES), required=False, allow_null=True
    )
    level = serializers.FloatField(default=0.95)
    mc_size = serializers.IntegerField(min_value=1, default=10_000)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True)

    def validate_level(self, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError("level must lie in (0, 1).")
        return value

    def validate_epsilon(self, value: float) -> float:
        if not value > 0:
            raise serializers.ValidationError("epsilon must be positive.")
        return value

    def validate_seed(self, value: int | None) -> int:
        return settings.ARCHCOP_DEFAULT_SEED if value is None else value

    def validate_ci(self, value: str | None) -> str | None:
        return CI_ALIASES.get(value, value) if value else None

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        model_id = ModelId(attrs["family"])
        attrs.setdefault("seed", settings.ARCHCOP_DEFAULT_SEED)
        if attrs["estimator"] == "diag" and model_id is not ModelId.GUMBEL:
            raise serializers.ValidationError(
                {"estimator": "the diagonal estimator is defined for gumbel only."}
            )
        ci = attrs.get("ci")
        if ci == "observed_info" and model_id is not ModelId.CLAYTON:
            raise serializers.ValidationError(
                {"ci": "observed information intervals are available for clayton only."}
            )
        if ci == "profile" and model_id.n_params != 2:
            raise serializers.ValidationError(
                {"ci": "profile intervals need a two-parameter family."}
            )
        if ci and ci != "profile" and model_id.n_params != 1:
            raise serializers.ValidationError(
                {"ci": f"{ci} intervals need a one-parameter family; use profile."}
            )
        return attrs


class FitResultSerializer(serializers.Serializer):
    family = serializers.SerializerMethodField()
    params = serializers.SerializerMethodField()
    loglik = serializers.FloatField()
    tau = serializers.SerializerMethodField()
    iterations = serializers.IntegerField()
    n_evals = serializers.IntegerField()
    converged = serializers.BooleanField()
    boundary = serializers.BooleanField()
    polished = serializers.BooleanField()
    nonfinite_rows = serializers.IntegerField()
    estimator = serializers.CharField()
    initial_region = serializers.SerializerMethodField()

    def get_family(self, obj: FitResult) -> str:
        return obj.family.value

    def get_params(self, obj: FitResult) -> dict[str, float]:
        return obj.as_dict()

    def get_tau(self, obj: FitResult) -> float:
        return obj.tau

    def get_initial_region(self, obj: FitResult) -> dict[str, Any] | None:
        return obj.initial_region.as_dict() if obj.initial_region is not None else None
