import logging
from typing import Any

from django.core.management.base import CommandParser

from ArchCopula.utils import write_matrix_csv
from copulas.sampling import RandomStream
from copulas.serializers import SampleOptionsSerializer
from core.commands import ArchCopulaCommand

logger = logging.getLogger(__name__)


class Command(ArchCopulaCommand):
    help = "Draw n points from a d-dimensional Archimedean copula and write them as CSV"

    def add_arguments(self, parser: CommandParser) -> None:
        self.add_model_arguments(parser)
        parser.add_argument("--n", type=int, required=True)
        parser.add_argument("--d", type=int, required=True)
        parser.add_argument("--seed", type=int, default=None)
        parser.add_argument("--out", default=None, help="Output file; stdout if omitted.")

    def run(self, *args: Any, **options: Any) -> None:
        data = self.validated(SampleOptionsSerializer, options)
        model = data["model"]
        sample = model.sample(data["n"], data["d"], RandomStream(data["seed"]))
        logger.info("sampled %s x %s from %s", data["n"], data["d"], model)
        if data.get("out"):
            write_matrix_csv(sample, data["out"])
        else:
            self.stdout.write(write_matrix_csv(sample), ending="")
