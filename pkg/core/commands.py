import logging
import sys
from typing import Any

from django.core.management.base import BaseCommand, CommandError, CommandParser

from ArchCopula.utils import dumps
from core.exception_handler import as_command_error

logger = logging.getLogger(__name__)


class ArchCopulaCommand(BaseCommand):
    """
    Base class of every toolkit subcommand.

    Subclasses implement ``run`` instead of ``handle``. Usage errors and
    invalid option sets exit with code 1, numerical failures with code 2;
    the diagnostic JSON body of a failure is written to stderr.
    """

    requires_system_checks: list[str] = []
    requires_migrations_checks = False

    def create_parser(self, prog_name: str, subcommand: str, **kwargs: Any) -> CommandParser:
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # argparse would exit with status 2 on bad flags; route them to CommandError(1)
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv: list[str]) -> None:
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f"{exc.__class__.__name__}: {exc}")
            sys.exit(exc.returncode)

    def handle(self, *args: Any, **options: Any) -> None:
        try:
            self.run(*args, **options)
        except CommandError:
            raise
        except Exception as exc:
            error = as_command_error(exc)
            self.stderr.write(dumps(error.body))
            logger.debug("command %s failed with exit code %s", self.__module__, error.returncode)
            raise error from exc

    def run(self, *args: Any, **options: Any) -> None:
        raise NotImplementedError("subclasses of ArchCopulaCommand must provide a run() method")

    def write_json(self, payload: dict[str, Any]) -> None:
        self.stdout.write(dumps(payload))

    def add_model_arguments(self, parser: CommandParser) -> None:
        """Family and parameter flags shared by the model-level commands."""
        parser.add_argument("--family", required=True, help="Copula family tag.")
        parser.add_argument("--theta", type=float, default=None)
        parser.add_argument("--beta", type=float, default=None, help="Outer power (opclayton).")
        parser.add_argument("--nu", type=float, default=None, help="Bessel order (gig).")

    def validated(self, serializer_class: type, options: dict[str, Any]) -> dict[str, Any]:
        """Run ``options`` through a DRF serializer; a ValidationError exits with code 1."""
        fields = serializer_class().fields
        serializer = serializer_class(
            data={name: options.get(name) for name in fields if name in options}
        )
        serializer.is_valid(raise_exception=True)
        return dict(serializer.validated_data)
