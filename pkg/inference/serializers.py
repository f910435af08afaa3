from typing import Any

from rest_framework import serializers

from copulas.registry import ModelId
from estimation.serializers import CI_ALIASES, CI_CHOICES, FitOptionsSerializer
from inference.intervals import CiResult


class CiOptionsSerializer(FitOptionsSerializer):
    """Flags of the ``ci`` command: a fit followed by one or more intervals."""

    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=CI_CHOICES + list(CI_ALIASES)),
        required=False,
        allow_null=True,
    )
    levels = serializers.ListField(
        child=serializers.FloatField(), required=False, allow_null=True
    )
    tau = serializers.BooleanField(default=False)

    def validate_levels(self, value: list[float] | None) -> list[float] | None:
        if value and not all(0.0 < level < 1.0 for level in value):
            raise serializers.ValidationError("levels must lie in (0, 1).")
        return value

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        attrs = super().validate(attrs)
        model_id = ModelId(attrs["family"])
        methods = [CI_ALIASES.get(m, m) for m in attrs.get("methods") or []]
        if not methods:
            if model_id.n_params == 2:
                methods = ["profile"]
            else:
                methods = ["expected_info", "score_outer", "likelihood_ratio"]
                if model_id is ModelId.CLAYTON:
                    methods.insert(2, "observed_info")
        for method in methods:
            FitOptionsSerializer.validate(self, {**attrs, "ci": method})
        if attrs["tau"] and model_id.n_params != 1:
            raise serializers.ValidationError(
                {"tau": "tau intervals need a one-parameter family."}
            )
        attrs["methods"] = methods
        attrs["levels"] = attrs.get("levels") or [attrs["level"]]
        return attrs


class CiResultSerializer(serializers.Serializer):
    method = serializers.CharField()
    level = serializers.FloatField()
    intervals = serializers.SerializerMethodField()
    contains_estimate = serializers.BooleanField()
    extra = serializers.DictField()

    def get_intervals(self, obj: CiResult) -> dict[str, dict[str, Any]]:
        return {
            name: {
                "estimate": obj.estimate[i],
                "lower": obj.lower[i],
                "upper": obj.upper[i],
                "censored_lower": obj.censored_lower[i],
                "censored_upper": obj.censored_upper[i],
            }
            for i, name in enumerate(obj.param_names)
        }
