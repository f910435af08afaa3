"""
Confidence intervals and regions for fitted Archimedean copulas.

Information based intervals are symmetric Wald intervals. Likelihood based
ones invert the likelihood-ratio statistic W = 2 (l(theta_hat) - l(theta)),
which is asymptotically chi-square; their endpoints are found by bracketing
root searches and may be asymmetric.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.stats import chi2, norm

from copulas import families
from copulas.registry import CopulaModel
from copulas.sampling import RandomStream
from core.exceptions import ConvergenceError, CopulaError, DomainError, NumericalError
from estimation.intervals import GIG_NU_FLOOR
from estimation.mle import REJECTED, FitResult, log_likelihood, mle_conditional
from inference.information import (
    InfoEstimate,
    info_expected_mc,
    info_observed,
    info_score_outer,
    numerical_hessian,
)

logger = logging.getLogger(__name__)

LR_EXPANSION = 1.6
LR_XTOL = 1e-8
LR_MAX_EXPANSIONS = 80
PROFILE_POINTS = 41
PROFILE_WIDENING = 2.0
PROFILE_MAX_EXTENSIONS = 60
# distance kept from open domain ends
OPEN_END_GAP = 1e-10


class CiMethod(str, Enum):
    EXPECTED_INFO = "expected_info"
    SCORE_OUTER = "score_outer"
    OBSERVED_INFO = "observed_info"
    LIKELIHOOD_RATIO = "likelihood_ratio"
    PROFILE = "profile"

    @property
    def information_based(self) -> bool:
        return self in (CiMethod.EXPECTED_INFO, CiMethod.SCORE_OUTER, CiMethod.OBSERVED_INFO)


@dataclass(frozen=True)
class CiResult:
    method: str
    level: float
    estimate: tuple[float, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    param_names: tuple[str, ...] = ("theta",)
    censored_lower: tuple[bool, ...] = (False,)
    censored_upper: tuple[bool, ...] = (False,)
    extra: dict = field(default_factory=dict)

    @property
    def contains_estimate(self) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.lower, self.estimate, self.upper))

    def covers(self, params: tuple[float, ...] | float) -> bool:
        values = np.atleast_1d(np.asarray(params, dtype=float))
        return all(lo <= x <= hi for lo, x, hi in zip(self.lower, values, self.upper))

    @property
    def half_width(self) -> tuple[float, ...]:
        return tuple((hi - lo) / 2.0 for lo, hi in zip(self.lower, self.upper))


def _check_level(level: float) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}.")
    return level


def lr_cut(level: float, p: int = 1) -> float:
    """Log-likelihood drop q_{chi2_p}(level) / 2 defining the likelihood-ratio set."""
    return float(chi2.ppf(_check_level(level), p)) / 2.0


def ci_information(
    theta_hat: float, info: InfoEstimate, n: int, level: float = 0.95
) -> CiResult:
    """
    Symmetric interval theta_hat -+ z_{1-alpha/2} / sqrt(n I).

    Args:
        theta_hat: Estimate of a one-parameter family.
        info: Scalar information estimate.
        n: Sample size.
        level: Confidence level.

    Raises:
        NumericalError: If the information is not positive.
    """
    level = _check_level(level)
    value = info.scalar
    if not (value > 0 and math.isfinite(value)):
        raise NumericalError(
            "information estimate is not positive; the interval is undefined.",
            {"kind": info.kind.value, "information": value},
        )
    half = float(norm.ppf(0.5 + level / 2.0)) / math.sqrt(n * value)
    return CiResult(
        info.kind.value, level, (theta_hat,), (theta_hat - half,), (theta_hat + half,),
        extra={"information": value, "mc_size": info.mc_size},
    )


def _domain_ends(family: families.FamilyId) -> tuple[float, float]:
    dom = families.DOMAINS[family]
    lo = dom.lower if dom.lower_closed else dom.lower + OPEN_END_GAP
    hi = dom.upper if dom.upper_closed or math.isinf(dom.upper) else dom.upper - OPEN_END_GAP
    return lo, hi


def _lr_endpoint(
    gap: Callable[[float], float], start: float, step: float, end: float, direction: int
) -> tuple[float, bool]:
    """Endpoint where ``gap`` changes sign walking from ``start`` towards ``end``."""
    inner = start
    for k in range(LR_MAX_EXPANSIONS):
        outer = start + direction * step * LR_EXPANSION**k
        hit_end = (outer - end) * direction >= 0
        if hit_end:
            outer = end
        if gap(outer) < 0:
            root = optimize.brentq(gap, min(inner, outer), max(inner, outer), xtol=LR_XTOL)
            return float(root), False
        if hit_end:
            return end, True
        inner = outer
    logger.warning("likelihood ratio set not bracketed after %s expansions", LR_MAX_EXPANSIONS)
    return inner, True


def ci_likelihood_ratio(fit: FitResult, u: np.ndarray, level: float = 0.95) -> CiResult:
    """
    Likelihood-ratio interval {theta : l(theta) >= l(theta_hat) - q_{chi2_1}(level)/2}
    of a one-parameter family.

    Endpoints are bracketed by expanding steps of factor 1.6 away from the
    estimate and refined by Brent's method. An endpoint that reaches the
    parameter domain boundary is returned there and flagged as censored.

    Args:
        fit: One-parameter fit on ``u``.
        u: The pseudo-observations the fit was computed on.
        level: Confidence level.

    Raises:
        DomainError: For a two-parameter fit.
    """
    if len(fit.params) != 1:
        raise DomainError("ci_likelihood_ratio needs a one-parameter fit; use profile_ci.")
    level = _check_level(level)
    fam = families.FamilyId(fit.family.value)
    theta_hat = fit.params[0]
    target = fit.loglik - lr_cut(level)

    def gap(theta: float) -> float:
        try:
            value = log_likelihood(CopulaModel(fit.family, (theta,)), u)
        except (NumericalError, ConvergenceError):
            value = -math.inf
        return value - target if math.isfinite(value) else -REJECTED

    lo_end, hi_end = _domain_ends(fam)
    step = 0.05 * max(1.0, abs(theta_hat))
    if fit.initial_region is not None:
        step = min(step, float(fit.initial_region.width[0]) / 4.0)
    if theta_hat <= lo_end:
        lower, censored_lo = theta_hat, True
    else:
        lower, censored_lo = _lr_endpoint(gap, theta_hat, step, lo_end, -1)
    upper, censored_hi = _lr_endpoint(gap, theta_hat, step, hi_end, 1)
    if censored_lo or censored_hi:
        logger.info("likelihood ratio interval censored (lower=%s, upper=%s)", censored_lo,
                    censored_hi)
    return CiResult(
        CiMethod.LIKELIHOOD_RATIO.value, level, (theta_hat,), (lower,), (upper,),
        censored_lower=(censored_lo,), censored_upper=(censored_hi,),
        extra={"cut": lr_cut(level)},
    )


def ci_tau_likelihood_ratio(fit: FitResult, u: np.ndarray, level: float = 0.95) -> CiResult:
    """
    Likelihood-ratio interval for Kendall's tau of a one-parameter family,
    mapped endpointwise from the theta interval since tau increases in theta.
    """
    ci = ci_likelihood_ratio(fit, u, level)
    fam = families.FamilyId(fit.family.value)
    tau_upper = families.TAU_RANGES[fam][1]

    def to_tau(theta: float) -> float:
        return tau_upper if math.isinf(theta) else families.tau(fam, theta)

    return CiResult(
        "likelihood_ratio_tau", ci.level, (to_tau(fit.params[0]),), (to_tau(ci.lower[0]),),
        (to_tau(ci.upper[0]),), ("tau",), ci.censored_lower, ci.censored_upper, ci.extra,
    )


def region_membership(
    fit: FitResult,
    u: np.ndarray,
    theta_test: tuple[float, ...] | float,
    level: float = 0.95,
    info: InfoEstimate | None = None,
) -> bool:
    """
    Whether ``theta_test`` lies in the confidence region of ``fit``.

    Without ``info`` the likelihood-ratio form l(theta) >= l(theta_hat) -
    q_{chi2_p}(level)/2 is used; with ``info`` the quadratic form
    n (theta - theta_hat)^T I (theta - theta_hat) <= q_{chi2_p}(level).
    """
    params = tuple(float(v) for v in np.atleast_1d(np.asarray(theta_test, dtype=float)))
    p = len(fit.params)
    if len(params) != p:
        raise DomainError(f"theta_test needs {p} component(s), got {len(params)}.")
    if info is not None:
        delta = np.asarray(params) - np.asarray(fit.params)
        n = np.shape(u)[0]
        return bool(n * delta @ info.value @ delta <= chi2.ppf(_check_level(level), p))
    try:
        value = log_likelihood(CopulaModel(fit.family, params), u)
    except CopulaError:
        return False
    return bool(value >= fit.loglik - lr_cut(level, p))


def _coordinate_floor(fit: FitResult, index: int) -> float:
    name = fit.family.param_names[index]
    if name == "beta":
        return 1.0
    if name == "nu":
        return GIG_NU_FLOOR
    return OPEN_END_GAP


def _nuisance_bounds(fit: FitResult, index: int) -> tuple[float, float]:
    # the nuisance range is the initial box extended by its width on both sides
    region = fit.initial_region
    x = fit.params[index]
    if region is not None:
        lo, hi = region.lower[index], region.upper[index]
    else:
        lo, hi = x / 2.0, 2.0 * x + 1.0
    width = hi - lo
    lo, hi = min(lo, x) - width, max(hi, x) + width
    return max(lo, _coordinate_floor(fit, index)), hi


def _grid_span(fit: FitResult, u: np.ndarray, which: int, level: float) -> float:
    # half width of the grid: the information based interval, widened
    try:
        hess = numerical_hessian(fit.model, u)
        cov = np.linalg.inv(-hess)
        var = float(cov[which, which])
    except (CopulaError, np.linalg.LinAlgError):
        var = math.nan
    if var > 0 and math.isfinite(var):
        return PROFILE_WIDENING * float(norm.ppf(0.5 + level / 2.0)) * math.sqrt(var)
    logger.warning("profile grid falls back to the initial box width")
    region = fit.initial_region
    if region is None:
        return 0.5 * max(1.0, abs(fit.params[which]))
    return PROFILE_WIDENING * float(region.width[which])


def profile_loglik(
    fit: FitResult, u: np.ndarray, which: int, value: float
) -> float:
    """
    Profile log-likelihood sup over the nuisance coordinate with coordinate
    ``which`` fixed at ``value``.

    A failed inner maximization is retried on a narrow interval around the
    nuisance value of the full fit; if that fails too the profile is -inf.
    """
    nuisance = 1 - which
    bounds = _nuisance_bounds(fit, nuisance)
    try:
        return mle_conditional(fit.family, u, which, value, bounds)[1]
    except CopulaError as exc:
        logger.debug("profile point %s failed (%s), retrying near the optimum", value, exc)
    x = fit.params[nuisance]
    narrow = (max(bounds[0], x - 0.1 * (bounds[1] - bounds[0])), x + 0.1 * (bounds[1] - bounds[0]))
    try:
        return mle_conditional(fit.family, u, which, value, narrow)[1]
    except CopulaError:
        logger.warning("profile point %s failed twice", value)
        return -math.inf


def _side_points(grid: np.ndarray, x_hat: float, side: int, step: float):
    """Grid points beyond the estimate on one side, then doubling steps past the grid."""
    yield from (grid[grid < x_hat][::-1] if side < 0 else grid[grid > x_hat])
    x = float(grid[0] if side < 0 else grid[-1])
    for _ in range(PROFILE_MAX_EXTENSIONS):
        x += side * step
        step *= 2.0
        yield x


def profile_ci(
    fit: FitResult,
    u: np.ndarray,
    which: int,
    level: float = 0.95,
    n_points: int = PROFILE_POINTS,
) -> CiResult:
    """
    Profile-likelihood interval of one coordinate of a two-parameter fit.

    The grid has ``n_points`` points spanning twice the information based
    interval around the estimate. Walking outwards from the estimate, the
    first point whose profile drops below l(theta_hat) - q_{chi2_1}(level)/2
    brackets the endpoint, which is refined by Brent's method. Past the end
    of the grid the walk continues with doubling steps. An end is censored
    only when it reaches the parameter floor without crossing the cut.

    Args:
        fit: Two-parameter fit on ``u``.
        u: The pseudo-observations.
        which: Index of the coordinate of interest (0 or 1).
        level: Confidence level.
        n_points: Grid size.

    Returns:
        CiResult: Interval for the chosen coordinate.

    Raises:
        ConvergenceError: If the profile stays above the cut for
            ``PROFILE_MAX_EXTENSIONS`` steps past the grid.
    """
    if len(fit.params) != 2 or which not in (0, 1):
        raise DomainError("profile_ci needs a two-parameter fit and which in {0, 1}.")
    level = _check_level(level)
    target = fit.loglik - lr_cut(level, 1)
    x_hat = fit.params[which]
    span = _grid_span(fit, u, which, level)
    lo_end = _coordinate_floor(fit, which)
    grid = np.linspace(x_hat - span, x_hat + span, n_points)
    step = 2.0 * span / max(n_points - 1, 1)
    evaluations: dict[float, float] = {}

    def gap(x: float) -> float:
        if x not in evaluations:
            evaluations[x] = profile_loglik(fit, u, which, x)
        value = evaluations[x]
        return value - target if math.isfinite(value) else -REJECTED

    endpoints = []
    censored = []
    for side in (-1, 1):
        inner = x_hat
        found = None
        at_floor = side < 0 and x_hat <= lo_end
        if not at_floor:
            for x in _side_points(grid, x_hat, side, step):
                x = max(float(x), lo_end)
                if x == inner:
                    continue
                if gap(x) < 0:
                    found = float(optimize.brentq(
                        gap, min(inner, x), max(inner, x), xtol=1e-6 * max(1.0, span)
                    ))
                    break
                inner = x
                if x == lo_end:
                    at_floor = True
                    break
            else:
                raise ConvergenceError(
                    "profile likelihood does not cross the cut level.",
                    {"parameter": fit.family.param_names[which], "side": side, "last": inner,
                     "gap": gap(inner)},
                )
        endpoints.append(inner if found is None else found)
        censored.append(at_floor and found is None)
    name = fit.family.param_names[which]
    return CiResult(
        CiMethod.PROFILE.value, level, (x_hat,), (endpoints[0],), (endpoints[1],), (name,),
        (censored[0],), (censored[1],),
        extra={
            "evaluations": len(evaluations),
            "profile_at_estimate": profile_loglik(fit, u, which, x_hat),
        },
    )


def confidence_interval(
    fit: FitResult,
    u: np.ndarray,
    method: "CiMethod | str",
    level: float = 0.95,
    mc_size: int = 10_000,
    rng: RandomStream | None = None,
) -> list[CiResult]:
    """
    Dispatch to one interval method. Two-parameter fits support the profile
    method only and return one interval per coordinate.

    Raises:
        DomainError: If the method does not apply to the fit.
    """
    method = CiMethod(method)
    n, d = np.shape(u)
    if fit.family.n_params == 2:
        if method is not CiMethod.PROFILE:
            raise DomainError(f"{method.value} intervals need a one-parameter family.")
        return [profile_ci(fit, u, which, level) for which in (0, 1)]
    if method is CiMethod.PROFILE:
        raise DomainError("profile intervals need a two-parameter family.")
    if method is CiMethod.LIKELIHOOD_RATIO:
        return [ci_likelihood_ratio(fit, u, level)]
    model = fit.model
    if method is CiMethod.EXPECTED_INFO:
        if rng is None:
            raise DomainError("the expected information needs a random stream.")
        info = info_expected_mc(model, d, mc_size, rng)
    elif method is CiMethod.SCORE_OUTER:
        info = info_score_outer(model, u)
    else:
        info = info_observed(model, u)
    return [ci_information(fit.params[0], info, n, level)]
