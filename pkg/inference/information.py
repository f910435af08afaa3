"""
Estimators of the Fisher information of an Archimedean copula: Monte Carlo
expected information, the score outer product on the observed sample and,
for Clayton, the observed information from the analytic Hessian.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from copulas import families
from copulas.registry import CopulaModel, ModelId, contains
from copulas.sampling import RandomStream
from core.exceptions import DomainError, NumericalError, UnsupportedFamilyError

logger = logging.getLogger(__name__)

RELATIVE_STEP = 1e-5
HESSIAN_STEP = 1e-4


class InfoKind(str, Enum):
    EXPECTED = "expected_info"
    SCORE_OUTER = "score_outer"
    OBSERVED = "observed_info"


@dataclass(frozen=True)
class InfoEstimate:
    kind: InfoKind
    value: np.ndarray
    mc_size: int | None = None
    std_error: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.value.shape[0]

    @property
    def positive_definite(self) -> bool:
        try:
            return bool(np.all(np.linalg.eigvalsh(self.value) > 0))
        except np.linalg.LinAlgError:
            return False

    @property
    def scalar(self) -> float:
        if self.dim != 1:
            raise DomainError("information is not scalar for a two-parameter family.")
        return float(self.value[0, 0])


def _steps(model: CopulaModel, scale: float) -> list[tuple[float, bool]]:
    # (step, central) per coordinate; one-sided next to the domain boundary
    out = []
    for i, x in enumerate(model.params):
        h = scale * max(1.0, abs(x))
        up = list(model.params)
        down = list(model.params)
        up[i] += h
        down[i] -= h
        if contains(model.family, down):
            out.append((h, True))
        elif contains(model.family, up):
            out.append((h, False))
        else:
            raise DomainError(f"no admissible finite-difference step at {model.params}.")
    return out


def _shifted(model: CopulaModel, shifts: dict[int, float]) -> CopulaModel:
    params = list(model.params)
    for i, delta in shifts.items():
        params[i] += delta
    return model.with_params(params)


def _rows(model: CopulaModel, u: np.ndarray) -> np.ndarray:
    values = np.asarray(model.log_density_rows(u), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            "log-density is not finite in a finite-difference stencil.",
            {"family": model.family.value, "params": list(model.params)},
        )
    return values


def score_vector(model: CopulaModel, u: np.ndarray) -> np.ndarray:
    """
    Per-observation score, an n x p matrix.

    One-parameter families use their analytic scores; the two-parameter
    families central differences of the log-density (forward differences on
    the boundary beta = 1 of outer-power Clayton).
    """
    arr, _ = families.check_u(u)
    if model.one_param:
        return np.asarray(families.score(model.family_id, model.theta, arr)).reshape(-1, 1)
    base = None
    columns = []
    for i, (h, central) in enumerate(_steps(model, RELATIVE_STEP)):
        upper = _rows(_shifted(model, {i: h}), arr)
        if central:
            lower = _rows(_shifted(model, {i: -h}), arr)
            columns.append((upper - lower) / (2.0 * h))
        else:
            base = _rows(model, arr) if base is None else base
            upper2 = _rows(_shifted(model, {i: 2.0 * h}), arr)
            columns.append((-3.0 * base + 4.0 * upper - upper2) / (2.0 * h))
    return np.column_stack(columns)


def numerical_hessian(model: CopulaModel, u: np.ndarray) -> np.ndarray:
    """
    Hessian of the summed log-likelihood by central differences, the step
    scaled to each parameter. Coordinates on the domain boundary are shifted
    inwards by one step first.
    """
    arr, _ = families.check_u(u)
    steps = _steps(model, HESSIAN_STEP)
    centre = model
    for i, (h, central) in enumerate(steps):
        if not central:
            centre = _shifted(centre, {i: h})
    p = len(steps)

    def total(shifts: dict[int, float]) -> float:
        return float(np.sum(_rows(_shifted(centre, shifts), arr)))

    f0 = total({})
    hess = np.empty((p, p))
    for i in range(p):
        hi = steps[i][0]
        hess[i, i] = (total({i: hi}) - 2.0 * f0 + total({i: -hi})) / hi**2
        for j in range(i + 1, p):
            hj = steps[j][0]
            hess[i, j] = hess[j, i] = (
                total({i: hi, j: hj})
                - total({i: hi, j: -hj})
                - total({i: -hi, j: hj})
                + total({i: -hi, j: -hj})
            ) / (4.0 * hi * hj)
    return hess


def _outer_mean(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    products = scores[:, :, None] * scores[:, None, :]
    m = scores.shape[0]
    std_error = np.full(products.shape[1:], np.nan)
    if m > 1:
        std_error = products.std(axis=0, ddof=1) / np.sqrt(m)
    return products.mean(axis=0), std_error


def info_expected_mc(model: CopulaModel, d: int, m: int, rng: RandomStream) -> InfoEstimate:
    """
    Expected information E[s s^T] by Monte Carlo over ``m`` draws of the
    d-dimensional copula at the given parameter.

    Args:
        model: Family and parameter, usually the fitted one.
        d: Dimension of the copula.
        m: Number of simulated points.
        rng: Random stream of the simulation.

    Returns:
        InfoEstimate: Mean outer product with entrywise standard errors.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"the Monte Carlo size must be a positive integer, got {m}.")
    u = model.sample(int(m), int(d), rng)
    value, std_error = _outer_mean(score_vector(model, u))
    logger.debug("expected information %s from %s draws", value.ravel(), m)
    return InfoEstimate(InfoKind.EXPECTED, value, int(m), std_error)


def info_score_outer(model: CopulaModel, u: np.ndarray) -> InfoEstimate:
    """Mean outer product of the scores over the observed pseudo-sample."""
    value, std_error = _outer_mean(score_vector(model, u))
    estimate = InfoEstimate(InfoKind.SCORE_OUTER, value, None, std_error)
    if estimate.dim > 1 and not estimate.positive_definite:
        logger.warning("score outer product is not positive definite (n=%s).", np.shape(u)[0])
    return estimate


def info_observed(model: CopulaModel, u: np.ndarray) -> InfoEstimate:
    """
    Observed information -(1/n) sum of the log-density Hessians, Clayton only.

    Raises:
        UnsupportedFamilyError: For any other family.
    """
    if model.family is not ModelId.CLAYTON:
        raise UnsupportedFamilyError(
            f"observed information is implemented for clayton only, got {model.family.value}."
        )
    hess = np.atleast_1d(families.clayton_loglik_hessian(model.theta, u))
    value = np.array([[-float(np.mean(hess))]])
    std_error = np.full((1, 1), np.nan)
    if hess.size > 1:
        std_error[0, 0] = np.std(hess, ddof=1) / np.sqrt(hess.size)
    return InfoEstimate(InfoKind.OBSERVED, value, None, std_error)
