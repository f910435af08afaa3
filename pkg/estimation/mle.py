"""
Log-likelihood assembly and the maximum-likelihood optimizers.

``mle_1p`` maximizes over an interval with scipy's bounded Brent method and
optionally polishes the result on the analytic score. ``mle_2p`` runs a
box-constrained Nelder-Mead search in coordinates normalized to the unit
square, restarted from the center and the corners of the initial box.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from scipy import optimize

from copulas import families
from copulas.registry import CopulaModel, ModelId, as_model_id
from core.exceptions import (
    ConvergenceError,
    CopulaError,
    DomainError,
    NumericalError,
    UnsupportedFamilyError,
)
from estimation.intervals import DEFAULT_EPSILON, InitialBox, initial_region
from estimation.pseudo import gumbel_diag_mle
from estimation.pseudo import tau_hat as estimate_tau

logger = logging.getLogger(__name__)

# objective value standing in for log-likelihood = -inf
REJECTED = 1e300
BOUNDARY_TOL = 1e-6
RESTART_SHRINK = 0.9


@dataclass(frozen=True)
class FitResult:
    family: ModelId
    params: tuple[float, ...]
    loglik: float
    iterations: int
    n_evals: int
    initial_region: InitialBox | None
    converged: bool
    boundary: bool = False
    polished: bool = False
    elapsed: float = 0.0
    nonfinite_rows: int = 0
    estimator: str = "mle"
    message: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.family.param_names

    @property
    def model(self) -> CopulaModel:
        return CopulaModel(self.family, self.params)

    @property
    def tau(self) -> float:
        return self.model.tau()

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.param_names, self.params))


def log_likelihood_detail(model: CopulaModel, u: np.ndarray) -> tuple[float, int]:
    """
    Log-likelihood together with the number of rows whose log-density is
    not finite. Any such row makes the total ``-inf``.
    """
    rows = np.asarray(model.log_density_rows(u), dtype=float)
    bad = int(np.count_nonzero(~np.isfinite(rows)))
    if bad:
        logger.debug("%s: %s non-finite log-density row(s)", model, bad)
        return -math.inf, bad
    return float(np.sum(rows)), 0


def log_likelihood(model: CopulaModel, u: np.ndarray) -> float:
    """Sum of the row log-densities; ``-inf`` if any row is not finite."""
    return log_likelihood_detail(model, u)[0]


class _Objective:
    """
    Negative log-likelihood with rejected points mapped to a large finite
    value. Counts evaluations and how many of them were finite.
    """

    def __init__(self, family: ModelId, u: np.ndarray, to_params: Callable[[Any], Any]):
        self.family = family
        self.u = u
        self.to_params = to_params
        self.n_evals = 0
        self.n_finite = 0
        self.nonfinite_rows = 0

    def loglik(self, params: Any) -> float:
        self.n_evals += 1
        try:
            model = CopulaModel(self.family, tuple(params))
        except DomainError:
            return -math.inf
        try:
            value, bad = log_likelihood_detail(model, self.u)
        except (NumericalError, ConvergenceError) as exc:
            logger.debug("likelihood rejected at %s: %s", params, exc)
            return -math.inf
        self.nonfinite_rows = max(self.nonfinite_rows, bad)
        if math.isfinite(value):
            self.n_finite += 1
        return value

    def __call__(self, x: Any) -> float:
        value = self.loglik(np.atleast_1d(self.to_params(x)))
        return -value if math.isfinite(value) else REJECTED


def _polish_1p(
    fam: families.FamilyId, theta: float, loglik: float, u: np.ndarray, lower: float, upper: float
) -> tuple[float, float] | None:
    # one safeguarded root-find of the summed analytic score around theta
    delta = 1e-3 * max(1.0, abs(theta))
    lo, hi = max(lower, theta - delta), min(upper, theta + delta)

    def total_score(x: float) -> float:
        return float(np.sum(families.score(fam, x, u)))

    try:
        if total_score(lo) * total_score(hi) > 0:
            return None
        root = optimize.brentq(total_score, lo, hi, xtol=1e-12, maxiter=100)
    except (CopulaError, ValueError, RuntimeError) as exc:
        logger.debug("score polish skipped: %s", exc)
        return None
    value = log_likelihood(CopulaModel(ModelId(fam.value), (root,)), u)
    if not value >= loglik:
        return None
    return float(root), value


def mle_1p(
    family: "ModelId | str",
    u: np.ndarray,
    interval: InitialBox,
    polish: bool = True,
    xatol: float = 1e-8,
    maxiter: int = 200,
) -> FitResult:
    """
    Maximum-likelihood estimate of a one-parameter family on ``interval``.

    Args:
        family: One-parameter family tag.
        u: The n x d pseudo-observations.
        interval: One-dimensional initial region.
        polish: Refine the optimum by a root-find of the analytic score.
        xatol: Absolute tolerance in theta.
        maxiter: Iteration cap of the bounded search.

    Returns:
        FitResult: The estimate. It is never worse than the interval midpoint
        or its endpoints.

    Raises:
        ConvergenceError: If the log-likelihood is -inf on every evaluated point.
    """
    model_id = as_model_id(family)
    if model_id.n_params != 1 or interval.dim != 1:
        raise UnsupportedFamilyError(f"mle_1p needs a one-parameter family, got {model_id.value}.")
    fam = families.FamilyId(model_id.value)
    start = time.perf_counter()
    lower, upper = interval.lower[0], interval.upper[0]
    objective = _Objective(model_id, u, lambda x: x)
    res = optimize.minimize_scalar(
        objective, bounds=(lower, upper), method="bounded",
        options={"xatol": xatol, "maxiter": maxiter},
    )
    candidates = [(float(res.x), -float(res.fun))]
    for theta in (float(interval.center[0]), lower, upper):
        candidates.append((theta, objective.loglik([theta])))
    theta_hat, loglik = max(candidates, key=lambda item: item[1])
    if objective.n_finite == 0 or not math.isfinite(loglik):
        raise ConvergenceError(
            "log-likelihood is -inf over the whole initial interval.",
            {"family": model_id.value, "interval": [lower, upper]},
        )
    polished = False
    if polish and lower < theta_hat < upper:
        refined = _polish_1p(fam, theta_hat, loglik, u, lower, upper)
        if refined is not None:
            theta_hat, loglik = refined
            polished = True
    width = upper - lower
    boundary = min(theta_hat - lower, upper - theta_hat) <= BOUNDARY_TOL * max(1.0, width)
    if boundary:
        logger.warning(
            "%s estimate %s lies on the initial interval edge.", model_id.value, theta_hat
        )
    return FitResult(
        family=model_id,
        params=(theta_hat,),
        loglik=loglik,
        iterations=int(res.nit),
        n_evals=objective.n_evals,
        initial_region=interval,
        converged=bool(res.success),
        boundary=boundary,
        polished=polished,
        elapsed=time.perf_counter() - start,
        nonfinite_rows=objective.nonfinite_rows,
        message=str(res.message),
    )


def _restarts(box: InitialBox) -> list[np.ndarray]:
    centre = np.full(box.dim, 0.5)
    starts = [centre]
    for anchor in box.anchors:
        starts.append(centre + RESTART_SHRINK * (box.to_unit(anchor) - centre))
    return starts


def mle_2p(
    family: "ModelId | str",
    u: np.ndarray,
    box: InitialBox,
    xatol: float = 1e-6,
    fatol: float = 1e-8,
    maxiter: int = 2000,
) -> FitResult:
    """
    Maximum-likelihood estimate of a two-parameter family inside ``box``.

    Nelder-Mead runs on the unit square mapped affinely onto the box, once
    from the center and once from each anchor corner pulled 10% towards the
    center; the best run wins.

    Args:
        family: ``opclayton`` or ``gig``.
        u: The n x d pseudo-observations.
        box: Two-dimensional initial region.
        xatol: Simplex tolerance in normalized coordinates.
        fatol: Tolerance in log-likelihood.
        maxiter: Iteration cap per restart.

    Raises:
        ConvergenceError: If the log-likelihood is -inf on every evaluated point.
    """
    model_id = as_model_id(family)
    if model_id.n_params != 2 or box.dim != 2:
        raise UnsupportedFamilyError(f"mle_2p needs a two-parameter family, got {model_id.value}.")
    start = time.perf_counter()
    objective = _Objective(model_id, u, box.from_unit)
    runs = []
    for z0 in _restarts(box):
        res = optimize.minimize(
            objective, z0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * box.dim,
            options={"xatol": xatol, "fatol": fatol, "maxiter": maxiter},
        )
        runs.append(res)
        logger.debug("restart from %s: %s after %s iterations", z0, -res.fun, res.nit)
    best = min(runs, key=lambda res: res.fun)
    if objective.n_finite == 0 or best.fun >= REJECTED:
        raise ConvergenceError(
            "log-likelihood is -inf over the whole initial box.",
            {"family": model_id.value, "lower": list(box.lower), "upper": list(box.upper)},
        )
    z = np.clip(best.x, 0.0, 1.0)
    boundary = bool(np.any((z <= BOUNDARY_TOL) | (z >= 1.0 - BOUNDARY_TOL)))
    if boundary:
        logger.warning("%s estimate is pinned to the initial box at %s.", model_id.value, z)
    return FitResult(
        family=model_id,
        params=tuple(float(v) for v in box.from_unit(z)),
        loglik=-float(best.fun),
        iterations=int(sum(res.nit for res in runs)),
        n_evals=objective.n_evals,
        initial_region=box,
        converged=bool(best.success),
        boundary=boundary,
        elapsed=time.perf_counter() - start,
        nonfinite_rows=objective.nonfinite_rows,
        message=str(best.message),
        extra={"restarts": len(runs)},
    )


def mle_conditional(
    family: "ModelId | str",
    u: np.ndarray,
    index: int,
    fixed: float,
    bounds: tuple[float, float],
    xatol: float = 1e-8,
    maxiter: int = 200,
) -> tuple[float, float]:
    """
    Maximize a two-parameter likelihood over one coordinate while the other
    is held at ``fixed``.

    Args:
        family: Two-parameter family tag.
        u: The n x d pseudo-observations.
        index: Position of the fixed coordinate in the parameter vector.
        fixed: Value of the fixed coordinate.
        bounds: Search interval of the free coordinate.

    Returns:
        The maximizing free coordinate and the log-likelihood there.

    Raises:
        ConvergenceError: If the log-likelihood is -inf on every evaluated point.
    """
    model_id = as_model_id(family)

    def full(x: Any) -> list[float]:
        free = float(np.atleast_1d(x)[0])
        return [fixed, free] if index == 0 else [free, fixed]

    objective = _Objective(model_id, u, full)
    res = optimize.minimize_scalar(
        objective, bounds=bounds, method="bounded", options={"xatol": xatol, "maxiter": maxiter}
    )
    if objective.n_finite == 0 or res.fun >= REJECTED:
        raise ConvergenceError(
            "conditional likelihood is -inf on the whole search interval.",
            {"family": model_id.value, "index": index, "fixed": fixed, "bounds": list(bounds)},
        )
    return float(res.x), -float(res.fun)


def gumbel_diag_fit(u: np.ndarray) -> FitResult:
    """The explicit Gumbel diagonal estimator packed as a FitResult."""
    start = time.perf_counter()
    theta = gumbel_diag_mle(u)
    loglik = log_likelihood(CopulaModel(ModelId.GUMBEL, (theta,)), u)
    return FitResult(
        family=ModelId.GUMBEL,
        params=(theta,),
        loglik=loglik,
        iterations=0,
        n_evals=1,
        initial_region=None,
        converged=True,
        boundary=theta == 1.0,
        elapsed=time.perf_counter() - start,
        estimator="diag",
    )


def fit_copula(
    u: np.ndarray,
    family: "ModelId | str",
    tau_hat: float | None = None,
    h: float | None = None,
    h_minus: float | None = None,
    h_plus: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
    region: InitialBox | None = None,
    polish: bool = True,
) -> FitResult:
    """
    Estimate a family from pseudo-observations end to end: tau estimate,
    initial region, then the matching optimizer.

    Args:
        u: The n x d pseudo-observations.
        family: Any supported family tag.
        tau_hat: Kendall's tau estimate; computed from ``u`` when omitted.
        h: Tau half width of one-parameter intervals.
        h_minus: Lower tau width of two-parameter boxes.
        h_plus: Upper tau width of two-parameter boxes.
        epsilon: Distance kept from unattainable tau bounds.
        region: Ready-made initial region; overrides the tau based one.
        polish: Score polish of one-parameter fits.
    """
    model_id = as_model_id(family)
    if region is None:
        if tau_hat is None:
            tau_hat = estimate_tau(u)
        region = initial_region(model_id, tau_hat, h, h_minus, h_plus, epsilon)
    if model_id.n_params == 1:
        return mle_1p(model_id, u, region, polish=polish)
    return mle_2p(model_id, u, region)
