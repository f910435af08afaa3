import logging
from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.management.base import CommandParser

from core.commands import ArchCopulaCommand
from core.exceptions import ConfigError
from experiments.reporting import write_outputs
from experiments.runners import RUNNERS
from experiments.serializers import load_config

logger = logging.getLogger(__name__)


class Command(ArchCopulaCommand):
    help = "Run a simulation study described by a YAML config file"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("config", help="Path of the YAML experiment config.")
        parser.add_argument("--out", default=None,
                            help="Output directory; defaults to ARCHCOP_OUTPUT_DIR/<config name>.")
        parser.add_argument("--workers", type=int, default=None)

    def run(self, *args: Any, **options: Any) -> None:
        cfg = load_config(options["config"])
        workers = options.get("workers")
        if workers is not None and workers < 1:
            raise ConfigError(f"--workers must be positive, got {workers}.")
        out_dir = options.get("out") or (
            Path(settings.ARCHCOP_OUTPUT_DIR) / Path(options["config"]).stem
        )
        output = RUNNERS[cfg["kind"]](cfg, workers)
        paths = write_outputs(out_dir, output.records, output.summary, output.timing)
        logger.info("records in %s", paths["records"])
        self.write_json(output.summary)
