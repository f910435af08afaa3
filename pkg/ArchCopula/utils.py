import io
import json
import math
import sys
from pathlib import Path
from typing import Any, TextIO

import numpy as np
import pandas as pd
from django.conf import settings

from core.exceptions import DimensionError

CSV_FLOAT_FORMAT = "%.17g"


def get_setting(name: str, default: Any) -> Any:
    """
    Read a toolkit setting, falling back to ``default`` when the project
    settings do not define it.
    """
    return getattr(settings, name, default)


def jsonable(value: Any) -> Any:
    """
    Convert numpy scalars, arrays, tuples and non-finite floats into plain
    JSON types. Non-finite floats become ``None``.

    Args:
        value: Any nested structure of dicts, sequences and numbers.

    Returns:
        The same structure built from JSON-serializable types only.
    """
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(payload: Any) -> str:
    """Render a payload as deterministic JSON with sorted keys."""
    return json.dumps(jsonable(payload), sort_keys=True, indent=2, allow_nan=False)


def read_matrix_csv(source: str | Path | TextIO) -> np.ndarray:
    """
    Read a numeric matrix from a comma separated file.

    A first row that does not parse as numbers is taken as a header.
    ``"-"`` reads from stdin.

    Args:
        source: Path, ``"-"`` or an open text stream.

    Returns:
        np.ndarray: The n x d matrix of floats.

    Raises:
        DimensionError: If the file is empty or not numeric.
    """
    if isinstance(source, (str, Path)) and str(source) == "-":
        source = io.StringIO(sys.stdin.read())
    frame = pd.read_csv(source, header=None, dtype=str, skip_blank_lines=True)
    if frame.empty:
        raise DimensionError("Input matrix is empty.")
    first_row = pd.to_numeric(frame.iloc[0], errors="coerce")
    if first_row.isna().any():
        frame = frame.iloc[1:]
    try:
        matrix = frame.astype(float).to_numpy()
    except ValueError as exc:
        raise DimensionError(f"Input matrix is not numeric: {exc}")
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise DimensionError("Input matrix is empty.")
    return matrix


def write_matrix_csv(
    matrix: np.ndarray, target: str | Path | TextIO | None = None, prefix: str = "u"
) -> str | None:
    """
    Write a matrix with header ``u1..ud`` and 17 significant digits.

    Args:
        matrix: The n x d matrix.
        target: Path or an open text stream; ``None`` returns the CSV text.
        prefix: Column name prefix.
    """
    columns = [f"{prefix}{j + 1}" for j in range(matrix.shape[1])]
    frame = pd.DataFrame(matrix, columns=columns)
    return frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
