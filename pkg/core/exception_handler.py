import logging
import traceback
from typing import Any

from django.conf import settings
from django.core.management.base import CommandError
from rest_framework.exceptions import ErrorDetail, ValidationError

from core.exceptions import (
    ConfigError,
    ConvergenceError,
    CopulaError,
    DimensionError,
    DomainError,
    NumericalError,
    RangeError,
    UnsupportedFamilyError,
)

logger = logging.getLogger("app_log")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class CommandExceptionHandler:
    """
    Exception handler for management commands, with one method per family
    of exceptions. Each method fills the diagnostic body and returns the
    exit code the command must terminate with.
    """

    def __init__(self, exc: BaseException):
        self.exc = exc
        self.response: dict[str, Any] = {
            "schema_version": getattr(settings, "JSON_SCHEMA_VERSION", "1.0")
        }

    def usage_error(self) -> int:
        self.response.update(
            {
                "message": str(self.exc),
                "errors": [{self.exc.get_codes(): str(self.exc)}],
                "status": self.exc.get_codes(),
            }
        )
        return EXIT_USAGE

    def validation_error(self) -> int:
        self.response.update(
            {
                "message": "Invalid options.",
                "errors": [flatten(self.exc.detail)],
                "status": "invalid_options",
            }
        )
        return EXIT_USAGE

    def numerical_failure(self) -> int:
        self.response.update(
            {
                "message": str(self.exc),
                "errors": [
                    {self.exc.get_codes(): str(self.exc), **self.exc.diagnostics}
                ],
                "status": self.exc.get_codes(),
            }
        )
        return EXIT_NUMERICAL

    def internal_error(self) -> int:
        tb = traceback.format_exc()
        logger.error(f"Exception occurred: {str(self.exc)}\nTraceback: \n{tb}")
        self.response.update(
            {
                "message": "Internal error.",
                "errors": [{"exception": repr(self.exc)}],
                "status": "internal_error",
            }
        )
        return EXIT_NUMERICAL


def handle_command_exception(exc: BaseException) -> tuple[int, dict[str, Any]]:
    """
    Map an exception raised inside a command to an exit code and a
    diagnostic JSON body.

    Args:
        exc: The exception to be handled.

    Returns:
        A tuple of the exit code (1 usage, 2 numerical failure) and the
        diagnostic body.
    """
    handler = CommandExceptionHandler(exc=exc)
    # exact class first; any other CopulaError is a numerical failure
    exception_map = {
        ValidationError: handler.validation_error,
        ConfigError: handler.usage_error,
        DomainError: handler.usage_error,
        RangeError: handler.usage_error,
        DimensionError: handler.usage_error,
        UnsupportedFamilyError: handler.usage_error,
        NumericalError: handler.numerical_failure,
        ConvergenceError: handler.numerical_failure,
    }
    method = exception_map.get(exc.__class__)
    if method is None and isinstance(exc, CopulaError):
        method = handler.numerical_failure
    if method is None:
        method = handler.internal_error
    return method(), handler.response


def as_command_error(exc: BaseException) -> CommandError:
    """Wrap any exception into a CommandError carrying the mapped exit code."""
    returncode, body = handle_command_exception(exc)
    error = CommandError(body.get("message", str(exc)), returncode=returncode)
    error.body = body
    return error


def flatten(data: Any) -> dict[str, Any]:
    """
    Flatten nested serializer errors into a single level dictionary keyed
    by the innermost field name.

    Args:
        data: A dict or list of error details.

    Returns:
        dict: The flattened dictionary.
    """
    flattened_data: dict[str, Any] = {}
    if isinstance(data, list):
        data = {"non_field_errors": data}
    for key, value in data.items():
        if isinstance(value, dict):
            # Recursively flatten any nested dictionaries.
            flattened_data.update(flatten(value))
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, dict):
                    flattened_data.update(flatten(item))
                elif isinstance(item, (ErrorDetail, str)):
                    flattened_data[key] = str(item)
        else:
            flattened_data[key] = str(value)
    return flattened_data
