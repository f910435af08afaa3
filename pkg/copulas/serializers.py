from typing import Any

from django.conf import settings
from rest_framework import serializers

from copulas.registry import CopulaModel, ModelId
from core.exceptions import CopulaError


class ModelOptionsSerializer(serializers.Serializer):
    """Family tag plus the named parameters a command line may carry."""

    family = serializers.ChoiceField(choices=[model.value for model in ModelId])
    theta = serializers.FloatField(required=False, allow_null=True)
    beta = serializers.FloatField(required=False, allow_null=True)
    nu = serializers.FloatField(required=False, allow_null=True)

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        try:
            attrs["model"] = CopulaModel.create(
                attrs["family"], attrs.get("theta"), attrs.get("beta"), attrs.get("nu")
            )
        except CopulaError as exc:
            raise serializers.ValidationError({"params": str(exc)})
        return attrs


class SampleOptionsSerializer(ModelOptionsSerializer):
    n = serializers.IntegerField(min_value=1)
    d = serializers.IntegerField(min_value=1)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True)
    out = serializers.CharField(required=False, allow_null=True, allow_blank=False)

    def validate_seed(self, value: int | None) -> int:
        return settings.ARCHCOP_DEFAULT_SEED if value is None else value


class TauOptionsSerializer(serializers.Serializer):
    family = serializers.ChoiceField(choices=[model.value for model in ModelId])
    theta = serializers.FloatField(required=False, allow_null=True)
    beta = serializers.FloatField(required=False, allow_null=True)
    nu = serializers.FloatField(required=False, allow_null=True)
    invert = serializers.FloatField(required=False, allow_null=True)

    def validate(self, attrs: dict[str, Any]) -> dict[str, Any]:
        if attrs.get("invert") is not None:
            return attrs
        return ModelOptionsSerializer().validate(attrs)


class DerivOptionsSerializer(ModelOptionsSerializer):
    d = serializers.IntegerField(min_value=0)
    t = serializers.FloatField()
    mc = serializers.IntegerField(min_value=2, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True)

    def validate_t(self, value: float) -> float:
        if not value > 0:
            raise serializers.ValidationError("t must be positive.")
        return value

    def validate_seed(self, value: int | None) -> int:
        return settings.ARCHCOP_DEFAULT_SEED if value is None else value
