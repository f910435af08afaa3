import math
from typing import Any

from django.conf import settings
from django.core.management.base import CommandParser

from copulas.families import mc_estimate
from copulas.sampling import RandomStream
from copulas.serializers import DerivOptionsSerializer
from core.commands import ArchCopulaCommand


class Command(ArchCopulaCommand):
    help = "Evaluate (-1)^d psi^(d)(t) of a generator, optionally with a Monte Carlo check"

    def add_arguments(self, parser: CommandParser) -> None:
        self.add_model_arguments(parser)
        parser.add_argument("--d", type=int, required=True, help="Derivative order.")
        parser.add_argument("--t", type=float, required=True)
        parser.add_argument("--mc", type=int, default=None, metavar="M",
                            help="Also estimate the derivative from M frailty draws.")
        parser.add_argument("--seed", type=int, default=None)

    def run(self, *args: Any, **options: Any) -> None:
        data = self.validated(DerivOptionsSerializer, options)
        model = data["model"]
        log_value = float(model.log_gen_deriv(data["d"], data["t"]))
        payload: dict[str, Any] = {
            "schema_version": settings.JSON_SCHEMA_VERSION,
            "family": model.family.value,
            "params": model.as_dict(),
            "d": data["d"],
            "t": data["t"],
            "log_value": log_value,
            "value": math.exp(log_value) if log_value < 709.0 else math.inf,
        }
        if data.get("mc"):
            draws = model.sample_frailty(RandomStream(data["seed"]), data["mc"])
            estimate = mc_estimate(draws, data["d"], data["t"])
            payload["mc"] = {
                "m": estimate.m,
                "log_value": estimate.log_value,
                "value": estimate.value if estimate.log_value < 709.0 else math.inf,
                "std_error": estimate.std_error,
            }
        self.write_json(payload)
