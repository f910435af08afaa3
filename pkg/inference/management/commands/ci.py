import logging
from typing import Any

from django.conf import settings
from django.core.management.base import CommandParser

from ArchCopula.utils import read_matrix_csv
from copulas.sampling import RandomStream
from core.commands import ArchCopulaCommand
from estimation.estimator import ArchimedeanCopulaMLE
from estimation.serializers import FitResultSerializer
from inference.intervals import ci_tau_likelihood_ratio, confidence_interval
from inference.serializers import CiOptionsSerializer, CiResultSerializer

logger = logging.getLogger(__name__)


class Command(ArchCopulaCommand):
    help = "Fit a copula and report confidence intervals by one or more methods"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--input", required=True, help="CSV file, '-' for stdin.")
        parser.add_argument("--family", required=True)
        parser.add_argument("--data", default="raw", help="raw (ranked first) or pseudo.")
        parser.add_argument("--h", type=float, default=None)
        parser.add_argument("--h-minus", dest="h_minus", type=float, default=None)
        parser.add_argument("--h-plus", dest="h_plus", type=float, default=None)
        parser.add_argument("--method", dest="methods", action="append", default=None,
                            help="Interval method; repeat for several. Default: all that apply.")
        parser.add_argument("--level", dest="levels", type=float, action="append", default=None,
                            help="Confidence level; repeat for several.")
        parser.add_argument("--tau", action="store_true", help="Add the tau likelihood interval.")
        parser.add_argument("--mc-size", dest="mc_size", type=int, default=None)
        parser.add_argument("--seed", type=int, default=None)

    def run(self, *args: Any, **options: Any) -> None:
        options = {key: value for key, value in options.items() if value is not None}
        data = self.validated(CiOptionsSerializer, options)
        matrix = read_matrix_csv(data["input"])
        estimator = ArchimedeanCopulaMLE(
            family=data["family"],
            pseudo=data["data"] == "pseudo",
            h=data.get("h"),
            h_minus=data.get("h_minus"),
            h_plus=data.get("h_plus"),
            epsilon=data["epsilon"],
        ).fit(matrix)
        u = estimator.pseudo_observations_
        rng = RandomStream(data["seed"])
        intervals = []
        for level in data["levels"]:
            for method in data["methods"]:
                logger.info("%s interval at level %s", method, level)
                intervals.extend(
                    confidence_interval(
                        estimator.fit_result_, u, method, level, data["mc_size"], rng
                    )
                )
            if data["tau"]:
                intervals.append(ci_tau_likelihood_ratio(estimator.fit_result_, u, level))
        self.write_json(
            {
                "schema_version": settings.JSON_SCHEMA_VERSION,
                "n": matrix.shape[0],
                "d": matrix.shape[1],
                "fit": FitResultSerializer(estimator.fit_result_).data,
                "ci": CiResultSerializer(intervals, many=True).data,
            }
        )
