from typing import Any

from django.conf import settings
from django.core.management.base import CommandParser

from copulas import families, multiparam
from copulas.registry import ModelId, as_model_id
from copulas.serializers import TauOptionsSerializer
from core.commands import ArchCopulaCommand
from core.exceptions import DomainError


class Command(ArchCopulaCommand):
    help = "Kendall's tau and tail dependence of a family, or the parameter for a given tau"

    def add_arguments(self, parser: CommandParser) -> None:
        self.add_model_arguments(parser)
        parser.add_argument(
            "--invert",
            type=float,
            default=None,
            metavar="TAU",
            help="Solve for the parameter attaining this tau; two-parameter families "
            "need the other parameter fixed.",
        )

    def run(self, *args: Any, **options: Any) -> None:
        data = self.validated(TauOptionsSerializer, options)
        payload: dict[str, Any] = {"schema_version": settings.JSON_SCHEMA_VERSION}
        if data.get("invert") is not None:
            payload.update(self.invert(data))
        else:
            model = data["model"]
            lower, upper = model.tail_dependence()
            payload.update(
                {
                    "family": model.family.value,
                    "params": model.as_dict(),
                    "tau": model.tau(),
                    "tail_dependence": {"lower": lower, "upper": upper},
                }
            )
        self.write_json(payload)

    def invert(self, data: dict[str, Any]) -> dict[str, Any]:
        model_id = as_model_id(data["family"])
        target = data["invert"]
        if model_id is ModelId.OPCLAYTON:
            if data.get("beta") is not None:
                params = {"theta": multiparam.op_theta_for_tau(target, data["beta"]),
                          "beta": data["beta"]}
            elif data.get("theta") is not None:
                params = {"theta": data["theta"],
                          "beta": multiparam.op_beta_for_tau(target, data["theta"])}
            else:
                raise DomainError("opclayton inversion needs --beta or --theta fixed.")
        elif model_id is ModelId.GIG:
            if data.get("nu") is not None:
                params = {"nu": data["nu"],
                          "theta": multiparam.gig_theta_for_tau(target, data["nu"])}
            elif data.get("theta") is not None:
                params = {"nu": multiparam.gig_nu_for_tau(target, data["theta"]),
                          "theta": data["theta"]}
            else:
                raise DomainError("gig inversion needs --nu or --theta fixed.")
        else:
            params = {"theta": families.tau_inverse(model_id.value, target)}
        return {"family": model_id.value, "tau": target, "params": params}
