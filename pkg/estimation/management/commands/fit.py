import logging
import time
from typing import Any

from django.conf import settings
from django.core.management.base import CommandParser

from ArchCopula.utils import read_matrix_csv
from copulas.sampling import RandomStream
from core.commands import ArchCopulaCommand
from estimation.estimator import ArchimedeanCopulaMLE
from estimation.serializers import FitOptionsSerializer, FitResultSerializer
from inference.intervals import confidence_interval
from inference.serializers import CiResultSerializer

logger = logging.getLogger(__name__)


class Command(ArchCopulaCommand):
    help = "Fit an Archimedean copula to a CSV data matrix by maximum likelihood"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--input", required=True, help="CSV file, '-' for stdin.")
        parser.add_argument("--family", required=True)
        parser.add_argument("--data", default="raw", help="raw (ranked first) or pseudo.")
        parser.add_argument("--estimator", default="mle", help="mle, or diag for gumbel.")
        parser.add_argument("--tau-method", dest="tau_method", default="auto")
        parser.add_argument("--h", type=float, default=None, help="Tau half width (1-parameter).")
        parser.add_argument("--h-minus", dest="h_minus", type=float, default=None)
        parser.add_argument("--h-plus", dest="h_plus", type=float, default=None)
        parser.add_argument("--epsilon", type=float, default=None)
        parser.add_argument("--ci", default=None, help="Add an interval of this method.")
        parser.add_argument("--level", type=float, default=None)
        parser.add_argument("--mc-size", dest="mc_size", type=int, default=None)
        parser.add_argument("--seed", type=int, default=None)

    def run(self, *args: Any, **options: Any) -> None:
        options = {key: value for key, value in options.items() if value is not None}
        data = self.validated(FitOptionsSerializer, options)
        matrix = read_matrix_csv(data["input"])
        estimator = ArchimedeanCopulaMLE(
            family=data["family"],
            pseudo=data["data"] == "pseudo",
            h=data.get("h"),
            h_minus=data.get("h_minus"),
            h_plus=data.get("h_plus"),
            epsilon=data["epsilon"],
            tau_method=data["tau_method"],
            estimator=data["estimator"],
        )
        start = time.perf_counter()
        estimator.fit(matrix)
        fit_seconds = time.perf_counter() - start
        result = estimator.fit_result_
        payload: dict[str, Any] = {
            "schema_version": settings.JSON_SCHEMA_VERSION,
            "n": matrix.shape[0],
            "d": matrix.shape[1],
            "data": data["data"],
            "fit": FitResultSerializer(result).data,
            "timing": {"fit_seconds": fit_seconds},
        }
        if getattr(estimator, "tau_hat_", None) is not None:
            payload["tau_hat"] = estimator.tau_hat_
        if data.get("ci"):
            start = time.perf_counter()
            intervals = confidence_interval(
                result,
                estimator.pseudo_observations_,
                data["ci"],
                data["level"],
                data["mc_size"],
                RandomStream(data["seed"]),
            )
            payload["timing"]["ci_seconds"] = time.perf_counter() - start
            payload["ci"] = CiResultSerializer(intervals, many=True).data
        self.write_json(payload)
