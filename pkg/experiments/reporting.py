"""
Tidy outputs of the simulation studies: a records CSV with one row per
replication, a timing-free summary JSON and a separate timing JSON.
"""

import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from django.conf import settings

from ArchCopula.utils import CSV_FLOAT_FORMAT, dumps
from copulas.registry import ModelId

logger = logging.getLogger(__name__)

CELL_KEYS = ["family", "tau", "n", "d"]


def param_names(cfg: dict[str, Any]) -> list[str]:
    names: list[str] = []
    for family in cfg["families"]:
        for name in ModelId(family).param_names:
            if name not in names:
                names.append(name)
    return names


def hit_columns(cfg: dict[str, Any]) -> list[str]:
    if cfg["kind"] != "coverage":
        return []
    return [f"hit_{method}_{level:g}" for level in cfg["levels"] for method in cfg["methods"]]


def records_frame(records: list[dict[str, Any]], cfg: dict[str, Any]) -> pd.DataFrame:
    """Records as a DataFrame with the fixed column order of the records CSV."""
    names = param_names(cfg)
    columns = (
        CELL_KEYS
        + ["rep"]
        + [f"{name}_true" for name in names]
        + [f"{name}_hat" for name in names]
        + ["seconds", "failed", "converged", "boundary"]
        + hit_columns(cfg)
        + ["error"]
    )
    return pd.DataFrame.from_records(records).reindex(columns=columns)


def _cell_summary(group: pd.DataFrame, cfg: dict[str, Any]) -> dict[str, Any]:
    family = ModelId(group["family"].iloc[0])
    failed = group["failed"].astype(bool)
    ok = group[~failed]
    summary: dict[str, Any] = {
        "replications": int(len(group)),
        "failures": int(failed.sum()),
        "failed": bool(failed.mean() > cfg["failure_threshold"]),
    }
    for name in family.param_names:
        errors = ok[f"{name}_hat"].astype(float) - ok[f"{name}_true"].astype(float)
        summary[name] = {
            "true": float(group[f"{name}_true"].iloc[0]),
            "mean": float(ok[f"{name}_hat"].astype(float).mean()) if len(ok) else None,
            "bias": float(errors.mean()) if len(ok) else None,
            "rmse": float(np.sqrt(np.mean(errors**2))) if len(ok) else None,
        }
    if cfg["kind"] == "coverage":
        coverage = {}
        for column in hit_columns(cfg):
            if column not in ok:
                continue
            hits = ok[column].dropna().astype(bool)
            missing = int(len(ok) - hits.size)
            if missing:
                logger.warning(
                    "%s coverage for %s tau=%s n=%s d=%s uses %s of %s replications",
                    column.removeprefix("hit_"), family.value, group["tau"].iloc[0],
                    group["n"].iloc[0], group["d"].iloc[0], hits.size, len(ok),
                )
            coverage[column.removeprefix("hit_")] = {
                "coverage": float(hits.mean()) if hits.size else None,
                "count": int(hits.size),
                "missing": missing,
            }
        summary["coverage"] = coverage
    return summary


def rmse_slopes(cells: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """
    Least-squares slope of log RMSE against log(n d), per family and tau,
    for the first parameter coordinate.
    """
    frame = pd.DataFrame(
        [
            {
                "family": cell["family"],
                "tau": cell["tau"],
                "log_nd": np.log(cell["n"] * cell["d"]),
                "rmse": cell[ModelId(cell["family"]).param_names[0]]["rmse"],
            }
            for cell in cells
        ]
    )
    slopes = []
    for (family, tau), group in frame.groupby(["family", "tau"], sort=False):
        group = group[group["rmse"].notna() & (group["rmse"] > 0)]
        if group["log_nd"].nunique() < 2:
            continue
        slope, intercept = np.polyfit(group["log_nd"], np.log(group["rmse"].astype(float)), 1)
        slopes.append(
            {"family": family, "tau": tau, "slope": float(slope), "intercept": float(intercept)}
        )
    return slopes


def summarize(frame: pd.DataFrame, cfg: dict[str, Any]) -> dict[str, Any]:
    """
    Per-cell bias, RMSE, failure counts and, for coverage studies, the
    proportion of intervals containing the true parameter. Contains no
    timings, so identical seeds give identical summaries.
    """
    cells = []
    for keys, group in frame.groupby(CELL_KEYS, sort=False):
        cell = dict(zip(CELL_KEYS, keys))
        cell.update(_cell_summary(group, cfg))
        cells.append(cell)
    summary: dict[str, Any] = {
        "schema_version": settings.JSON_SCHEMA_VERSION,
        "kind": cfg["kind"],
        "seed": cfg["seed"],
        "replications": cfg["replications"],
        "records": int(len(frame)),
        "cells": cells,
    }
    if cfg["kind"] == "rmse_scaling":
        summary["slopes"] = rmse_slopes(cells)
    return summary


def timing(frame: pd.DataFrame) -> dict[str, Any]:
    per_cell = (
        frame.groupby(CELL_KEYS, sort=False)["seconds"].agg(["mean", "sum"]).reset_index()
    )
    return {
        "schema_version": settings.JSON_SCHEMA_VERSION,
        "total_seconds": float(frame["seconds"].sum()),
        "cells": per_cell.rename(
            columns={"mean": "mean_fit_seconds", "sum": "total_fit_seconds"}
        ).to_dict(orient="records"),
    }


def write_outputs(
    out_dir: str | Path, frame: pd.DataFrame, summary: dict[str, Any], timings: dict[str, Any]
) -> dict[str, Path]:
    """Write ``records.csv``, ``summary.json`` and ``timing.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "records": out / "records.csv",
        "summary": out / "summary.json",
        "timing": out / "timing.json",
    }
    frame.to_csv(
        paths["records"], index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )
    paths["summary"].write_text(dumps(summary) + "\n", encoding="utf-8")
    paths["timing"].write_text(dumps(timings) + "\n", encoding="utf-8")
    logger.info("experiment outputs written to %s", out)
    return paths
