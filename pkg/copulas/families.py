"""
The one-parameter Archimedean families of Ali-Mikhail-Haq, Clayton, Frank,
Gumbel and Joe.

Every evaluation is carried out in the log domain. Functions taking ``u``
accept a single point of shape ``(d,)`` or a sample of shape ``(n, d)`` and
return a float or an array of ``n`` values respectively.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import TYPE_CHECKING

import mpmath
import numpy as np
from scipy import optimize
from scipy.special import binom, gammaln, logsumexp, psi as digamma

from ArchCopula.utils import get_setting
from copulas.specfun import (
    SignedLog,
    as_output,
    debye1,
    exact_stirling_first,
    exact_stirling_second,
    log1mexp,
    log_expm1,
    log_gamma_ratio,
    log_polylog_neg_from_log,
    signed_logsumexp,
    stirling_tables,
)
from core.exceptions import (
    ConvergenceError,
    DimensionError,
    DomainError,
    NumericalError,
    RangeError,
    UnsupportedFamilyError,
)

if TYPE_CHECKING:
    from copulas.sampling import RandomStream

logger = logging.getLogger(__name__)

# digits a Stirling-route Gumbel coefficient may lose before exact recomputation
GUMBEL_MAX_DIGITS_LOST = 6.0
GUMBEL_ROUTE_RTOL = 1e-6
KHOUDRAJI_MAX_DIM = 20
LOG_FLOOR = -1e300


class FamilyId(str, Enum):
    AMH = "amh"
    CLAYTON = "clayton"
    FRANK = "frank"
    GUMBEL = "gumbel"
    JOE = "joe"


@dataclass(frozen=True)
class ParamDomain:
    """Admissible parameter interval of a family."""

    family: FamilyId
    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool

    def contains(self, theta: float) -> bool:
        above = theta >= self.lower if self.lower_closed else theta > self.lower
        below = theta <= self.upper if self.upper_closed else theta < self.upper
        return bool(above and below)

    def is_boundary(self, theta: float) -> bool:
        """True on a closed endpoint, where the family is the independence copula."""
        return bool(
            (self.lower_closed and theta == self.lower)
            or (self.upper_closed and theta == self.upper)
        )


DOMAINS: dict[FamilyId, ParamDomain] = {
    FamilyId.AMH: ParamDomain(FamilyId.AMH, 0.0, 1.0, True, False),
    FamilyId.CLAYTON: ParamDomain(FamilyId.CLAYTON, 0.0, math.inf, False, False),
    FamilyId.FRANK: ParamDomain(FamilyId.FRANK, 0.0, math.inf, False, False),
    FamilyId.GUMBEL: ParamDomain(FamilyId.GUMBEL, 1.0, math.inf, True, False),
    FamilyId.JOE: ParamDomain(FamilyId.JOE, 1.0, math.inf, True, False),
}

# attainable Kendall's tau: (lower, upper, lower attained)
TAU_RANGES: dict[FamilyId, tuple[float, float, bool]] = {
    FamilyId.AMH: (0.0, 1.0 / 3.0, False),
    FamilyId.CLAYTON: (0.0, 1.0, False),
    FamilyId.FRANK: (0.0, 1.0, False),
    FamilyId.GUMBEL: (0.0, 1.0, True),
    FamilyId.JOE: (0.0, 1.0, True),
}


def as_family(family: "FamilyId | str") -> FamilyId:
    """
    Resolve a family tag.

    Raises:
        UnsupportedFamilyError: If the tag is not one of the five families.
    """
    try:
        return FamilyId(str(getattr(family, "value", family)).lower())
    except ValueError:
        raise UnsupportedFamilyError(f"Unsupported one-parameter family: {family!r}.")


def check_theta(family: "FamilyId | str", theta: float) -> tuple[FamilyId, float]:
    """
    Validate ``theta`` against the family's parameter domain.

    Returns:
        The resolved family tag and ``theta`` as a float.

    Raises:
        DomainError: If ``theta`` is outside the domain.
    """
    fam = as_family(family)
    theta = float(theta)
    if not DOMAINS[fam].contains(theta):
        dom = DOMAINS[fam]
        raise DomainError(
            f"theta={theta} is outside the {fam.value} domain "
            f"{'[' if dom.lower_closed else '('}{dom.lower}, {dom.upper}"
            f"{']' if dom.upper_closed else ')'}.",
            {"family": fam.value, "theta": theta},
        )
    return fam, theta


def check_u(u: np.ndarray, min_dim: int = 2) -> tuple[np.ndarray, bool]:
    """
    Coerce ``u`` into an (n, d) matrix with entries strictly inside (0, 1).

    Returns:
        The matrix and whether the input was a single point.

    Raises:
        DimensionError: On a wrong shape or a too small dimension.
        DomainError: If an entry lies on or outside the boundary.
    """
    arr = np.asarray(u, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise DimensionError(f"u must be a vector or a matrix, got shape {np.shape(u)}.")
    if arr.shape[1] < min_dim:
        raise DimensionError(f"dimension must be at least {min_dim}, got {arr.shape[1]}.")
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("all components of u must lie strictly inside (0, 1).")
    return arr, single


def _check_order(d: int) -> int:
    if int(d) != d or d < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {d}.")
    return int(d)


def _finish(values: np.ndarray, single: bool) -> np.ndarray | float:
    return float(values[0]) if single else values


# generator and inverse


def psi(family: "FamilyId | str", theta: float, t: np.ndarray | float) -> np.ndarray | float:
    """
    Generator psi_theta(t) for t in [0, inf].

    Raises:
        DomainError: If ``theta`` is outside the domain or ``t < 0``.
    """
    fam, theta = check_theta(family, theta)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("psi requires t >= 0.")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if fam is FamilyId.AMH:
            e = np.exp(-t)
            out = (1.0 - theta) * e / (1.0 - theta * e)
        elif fam is FamilyId.CLAYTON:
            out = np.exp(-np.log1p(t) / theta)
        elif fam is FamilyId.FRANK:
            out = -np.log1p(np.expm1(-theta) * np.exp(-t)) / theta
        elif fam is FamilyId.GUMBEL:
            out = np.exp(-(t ** (1.0 / theta)))
        else:
            out = -np.expm1(log1mexp(t) / theta)
    out = np.where(t == 0, 1.0, out)
    return as_output(out)


def log_psi(family: "FamilyId | str", theta: float, t: np.ndarray | float) -> np.ndarray | float:
    """log psi_theta(t), accurate where psi itself underflows."""
    fam, theta = check_theta(family, theta)
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if fam is FamilyId.AMH:
            out = np.log1p(-theta) - t - np.log1p(-theta * np.exp(-t))
        elif fam is FamilyId.CLAYTON:
            out = -np.log1p(t) / theta
        elif fam is FamilyId.FRANK:
            z = -np.expm1(-theta) * np.exp(-t)
            out = np.log(-np.log1p(-z)) - math.log(theta)
        elif fam is FamilyId.GUMBEL:
            out = -(t ** (1.0 / theta))
        else:
            out = np.log(-np.expm1(log1mexp(t) / theta))
    out = np.where(t == 0, 0.0, out)
    return as_output(out)


def psi_inv(family: "FamilyId | str", theta: float, u: np.ndarray | float) -> np.ndarray | float:
    """
    Inverse generator psi^{-1}(u) for u in (0, 1].

    Raises:
        DomainError: If ``u`` is outside (0, 1].
    """
    fam, theta = check_theta(family, theta)
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u <= 1))):
        raise DomainError("psi_inv requires u in (0, 1].")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if fam is FamilyId.AMH:
            out = np.log1p(-theta * (1.0 - u)) - np.log(u)
        elif fam is FamilyId.CLAYTON:
            out = np.expm1(-theta * np.log(u))
        elif fam is FamilyId.FRANK:
            out = -np.log(np.expm1(-theta * u) / np.expm1(-theta))
        elif fam is FamilyId.GUMBEL:
            out = (-np.log(u)) ** theta
        else:
            out = -np.log1p(-np.exp(theta * np.log1p(-u)))
    out = np.where(u == 1, 0.0, out)
    return as_output(out)


def log_neg_psi_inv_deriv(
    family: "FamilyId | str", theta: float, u: np.ndarray | float
) -> np.ndarray | float:
    """log(-(psi^{-1})'(u)) for u in (0, 1)."""
    fam, theta = check_theta(family, theta)
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam is FamilyId.AMH:
            out = np.log1p(-theta) - np.log(u) - np.log1p(-theta * (1.0 - u))
        elif fam is FamilyId.CLAYTON:
            out = math.log(theta) - (theta + 1.0) * np.log(u)
        elif fam is FamilyId.FRANK:
            out = math.log(theta) - log_expm1(theta * u)
        elif fam is FamilyId.GUMBEL:
            log_mlu = np.log(-np.log(u))
            out = math.log(theta) + (theta - 1.0) * log_mlu - np.log(u)
        else:
            log1m_u = np.log1p(-u)
            out = (
                math.log(theta)
                + (theta - 1.0) * log1m_u
                - log1mexp(-theta * log1m_u)
            )
    return as_output(out)


# polynomial coefficients


@dataclass(frozen=True, eq=False)
class GumbelPolyCoeffs:
    """
    Coefficients a_dk(theta), k = 1..d, of the Gumbel derivative polynomial
    P(x) = sum_k a_dk x^k, together with the theta-derivative companions
    w_dk = (-1)^(d-k) sum_j j alpha^j s(d,j) S(j,k) used by the score.
    """

    d: int
    theta: float
    log_coeffs: np.ndarray
    signs: np.ndarray
    log_weighted: np.ndarray
    weighted_signs: np.ndarray
    escalated: bool = False

    @property
    def coeffs(self) -> tuple[SignedLog, ...]:
        return tuple(SignedLog(int(s), float(v)) for s, v in zip(self.signs, self.log_coeffs))

    def log_poly(self, log_x: np.ndarray | float) -> np.ndarray | float:
        """log P(x) given log x."""
        log_x = np.asarray(log_x, dtype=float)
        k = np.arange(1, self.d + 1)
        terms = self.log_coeffs + np.multiply.outer(log_x, k)
        value, sign = signed_logsumexp(terms, np.broadcast_to(self.signs, terms.shape), axis=-1)
        if np.any(sign <= 0):
            raise NumericalError(
                "Gumbel derivative polynomial is not positive.", {"d": self.d, "theta": self.theta}
            )
        return as_output(value)


@dataclass(frozen=True, eq=False)
class JoePolyCoeffs:
    """Coefficients a_dk(theta) = S(d,k) Gamma(k-alpha)/Gamma(1-alpha), k = 1..d."""

    d: int
    theta: float
    log_coeffs: np.ndarray

    @property
    def coeffs(self) -> tuple[SignedLog, ...]:
        return tuple(SignedLog(1, float(v)) for v in self.log_coeffs)

    def log_poly(self, log_x: np.ndarray | float) -> np.ndarray | float:
        """log P(x) = log sum_k a_dk x^(k-1) given log x."""
        log_x = np.asarray(log_x, dtype=float)
        k = np.arange(1, self.d + 1)
        return as_output(logsumexp(self.log_coeffs + np.multiply.outer(log_x, k - 1), axis=-1))


def _gumbel_stirling_route(d: int, theta: float) -> tuple[np.ndarray, ...]:
    tables = stirling_tables(d)
    alpha = 1.0 / theta
    j = np.arange(1, d + 1)
    k = np.arange(1, d + 1)
    log_s2 = tables.second_log[1 : d + 1, 1 : d + 1]
    log_terms = (j * math.log(alpha) + tables.first_log[d, 1 : d + 1])[:, None] + log_s2
    signs = (
        tables.first_sign[d, 1 : d + 1][:, None]
        * np.where((d - k) % 2 == 0, 1.0, -1.0)[None, :]
        * np.isfinite(log_s2)
    )
    log_a, sign_a = signed_logsumexp(log_terms, signs, axis=0)
    log_w, sign_w = signed_logsumexp(log_terms + np.log(j)[:, None], signs, axis=0)
    biggest = np.max(log_terms, axis=0)
    biggest_w = np.max(log_terms + np.log(j)[:, None], axis=0)
    with np.errstate(invalid="ignore"):
        loss = np.maximum(biggest - log_a, np.where(sign_w != 0, biggest_w - log_w, 0.0))
    return log_a, sign_a, log_w, sign_w, loss


def _gumbel_binomial_route(d: int, theta: float) -> np.ndarray:
    alpha = 1.0 / theta
    out = np.empty(d)
    for k in range(1, d + 1):
        terms = [
            binom(k, j) * binom(alpha * j, d) * (-1.0) ** (d - j) for j in range(1, k + 1)
        ]
        out[k - 1] = math.exp(gammaln(d + 1) - gammaln(k + 1)) * math.fsum(terms)
    return out


def _gumbel_exact_route(d: int, theta: float, dps: int) -> tuple[np.ndarray, ...]:
    s_row = exact_stirling_first(d)
    s2_rows = exact_stirling_second(d)
    for _ in range(8):
        with mpmath.workdps(dps):
            alpha = mpmath.mpf(1) / mpmath.mpf(theta)
            powers = [alpha**j for j in range(d + 1)]
            a_vals, w_vals, worst = [], [], 0.0
            for k in range(1, d + 1):
                acc, acc_w, biggest = mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0)
                for j in range(k, d + 1):
                    term = powers[j] * s_row[j] * s2_rows[j][k]
                    acc += term
                    acc_w += j * term
                    biggest = max(biggest, abs(j * term))
                sign = 1 if (d - k) % 2 == 0 else -1
                a_vals.append(sign * acc)
                w_vals.append(sign * acc_w)
                if acc == 0:
                    worst = math.inf
                else:
                    worst = max(worst, float(mpmath.log10(biggest / abs(acc))))
            if worst < dps - 15:
                log_a = np.array([float(mpmath.log(abs(v))) for v in a_vals])
                sign_a = np.array([float(mpmath.sign(v)) for v in a_vals])
                log_w = np.array(
                    [float(mpmath.log(abs(v))) if v != 0 else -math.inf for v in w_vals]
                )
                sign_w = np.array([float(mpmath.sign(v)) for v in w_vals])
                return log_a, sign_a, log_w, sign_w
        dps *= 2
    raise NumericalError(
        "Gumbel coefficients could not be resolved at any working precision.",
        {"d": d, "theta": theta, "dps": dps},
    )


@lru_cache(maxsize=4096)
def _gumbel_coeffs_cached(d: int, theta: float) -> GumbelPolyCoeffs:
    if theta == 1.0:
        log_a = np.full(d, -math.inf)
        sign_a = np.zeros(d)
        log_a[-1], sign_a[-1] = 0.0, 1.0
        s_row, s2_rows = exact_stirling_first(d), exact_stirling_second(d)
        w_exact = [
            (-1) ** (d - k) * sum(j * s_row[j] * s2_rows[j][k] for j in range(k, d + 1))
            for k in range(1, d + 1)
        ]
        log_w = np.array([math.log(abs(w)) if w else -math.inf for w in w_exact])
        sign_w = np.sign(np.array(w_exact, dtype=float))
        return GumbelPolyCoeffs(d, theta, log_a, sign_a, log_w, sign_w)
    log_a, sign_a, log_w, sign_w, loss = _gumbel_stirling_route(d, theta)
    max_loss = float(np.max(loss)) if loss.size else 0.0
    escalate = (
        not np.all(sign_a > 0)
        or not np.isfinite(max_loss)
        or max_loss > GUMBEL_MAX_DIGITS_LOST * math.log(10)
    )
    if not escalate and d <= get_setting("ARCHCOP_GUMBEL_CHECK_MAX_D", 40):
        check = _gumbel_binomial_route(d, theta)
        stirling_values = np.exp(log_a)
        escalate = not np.allclose(check, stirling_values, rtol=GUMBEL_ROUTE_RTOL, atol=0.0)
    if escalate:
        digits = max_loss / math.log(10) if np.isfinite(max_loss) else 30.0
        dps = int(40 + min(max(digits, 16.0), 4000.0))
        logger.debug("escalating Gumbel coefficients d=%s theta=%r to %s digits", d, theta, dps)
        log_a, sign_a, log_w, sign_w = _gumbel_exact_route(d, theta, dps)
        if not np.all(sign_a > 0):
            raise NumericalError(
                "Gumbel coefficients are not positive.", {"d": d, "theta": theta}
            )
    for arr in (log_a, sign_a, log_w, sign_w):
        arr.setflags(write=False)
    return GumbelPolyCoeffs(d, theta, log_a, sign_a, log_w, sign_w, escalated=escalate)


def gumbel_coeffs(d: int, theta: float) -> GumbelPolyCoeffs:
    """
    Coefficients of the Gumbel derivative polynomial.

    The Stirling double sum is accumulated in the log domain with signs. Its
    summands alternate, so the lost digits are measured per coefficient; too
    large a loss, or disagreement with the binomial form for small ``d``,
    triggers an exact recomputation from integer Stirling numbers.

    Args:
        d: Order, 1 <= d <= 200 (larger if the Stirling tables are grown).
        theta: Gumbel parameter, >= 1.

    Returns:
        GumbelPolyCoeffs: Cached, read-only coefficients.

    Raises:
        DomainError: On an invalid order or parameter.
        NumericalError: If no working precision resolves the cancellation.
    """
    _, theta = check_theta(FamilyId.GUMBEL, theta)
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}.")
    return _gumbel_coeffs_cached(int(d), theta)


@lru_cache(maxsize=4096)
def _joe_coeffs_cached(d: int, theta: float) -> JoePolyCoeffs:
    tables = stirling_tables(d)
    alpha = 1.0 / theta
    k = np.arange(1, d + 1)
    if theta == 1.0:
        ratio = np.where(k == 1, 0.0, -math.inf)
    else:
        ratio = gammaln(k - alpha) - gammaln(1.0 - alpha)
    log_a = tables.second_log[d, 1 : d + 1] + ratio
    log_a.setflags(write=False)
    return JoePolyCoeffs(d, theta, log_a)


def joe_coeffs(d: int, theta: float) -> JoePolyCoeffs:
    """
    Coefficients of the Joe derivative polynomial, all strictly positive
    (for theta = 1 only a_d1 = 1 survives).
    """
    _, theta = check_theta(FamilyId.JOE, theta)
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}.")
    return _joe_coeffs_cached(int(d), theta)


# derivatives


def log_gen_deriv(
    family: "FamilyId | str", theta: float, d: int, t: np.ndarray | float
) -> np.ndarray | float:
    """
    log((-1)^d psi^(d)(t)), the log of the absolute d-th generator derivative.

    Args:
        family: Family tag.
        theta: Parameter inside the family domain.
        d: Derivative order, d = 0 gives log psi(t).
        t: Positive argument(s).

    Returns:
        The log-derivative, broadcast over ``t``.

    Raises:
        DomainError: On an invalid parameter, order or argument.
    """
    fam, theta = check_theta(family, theta)
    d = _check_order(d)
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("log_gen_deriv requires t > 0.")
    if d == 0:
        return log_psi(fam, theta, t)
    if DOMAINS[fam].is_boundary(theta):
        return as_output(-t)
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam is FamilyId.AMH:
            log_z = math.log(theta) - t
            out = math.log1p(-theta) - math.log(theta) + log_polylog_neg_from_log(d, log_z)
        elif fam is FamilyId.CLAYTON:
            out = log_gamma_ratio(d + 1.0 / theta, 1.0 / theta) - (d + 1.0 / theta) * np.log1p(t)
        elif fam is FamilyId.FRANK:
            log_z = log1mexp(theta) - t
            out = -math.log(theta) + log_polylog_neg_from_log(d - 1, log_z)
        elif fam is FamilyId.GUMBEL:
            log_t = np.log(t)
            log_x = log_t / theta
            out = -np.exp(log_x) - d * log_t + gumbel_coeffs(d, theta).log_poly(log_x)
        else:
            l1m = log1mexp(t)
            log_x = -t - l1m
            out = (
                -t
                - (1.0 - 1.0 / theta) * l1m
                - math.log(theta)
                + joe_coeffs(d, theta).log_poly(log_x)
            )
    return as_output(out)


@dataclass(frozen=True)
class McDerivative:
    """Monte Carlo estimate of (-1)^d psi^(d)(t) with its standard error."""

    log_value: float
    std_error: float
    m: int

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def mc_gen_deriv(
    family: "FamilyId | str",
    theta: float,
    d: int,
    t: float,
    m: int,
    rng: "RandomStream",
) -> McDerivative:
    """
    Monte Carlo approximation (1/m) sum_k V_k^d exp(-V_k t) with V_k drawn
    from the frailty distribution of the generator.
    """
    from copulas.sampling import sample_frailty

    fam, theta = check_theta(family, theta)
    d = _check_order(d)
    if not t > 0:
        raise DomainError("mc_gen_deriv requires t > 0.")
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}.")
    return mc_estimate(np.asarray(sample_frailty(fam, theta, rng, size=m), dtype=float), d, t)


def mc_estimate(v: np.ndarray, d: int, t: float) -> McDerivative:
    """Average of V^d exp(-V t) over frailty draws ``v``, in the log domain."""
    m = v.size
    log_terms = d * np.log(v) - v * t
    top = float(np.max(log_terms))
    scaled = np.exp(log_terms - top)
    log_mean = float(logsumexp(log_terms) - math.log(m))
    spread = float(np.std(scaled, ddof=1)) if m > 1 else math.inf
    with np.errstate(over="ignore"):
        std_error = float(np.exp(top)) * spread / math.sqrt(m)
    return McDerivative(log_mean, std_error, m)


# densities


def _rows_amh(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log_u = np.log(u)
    log_h = math.log(theta) + np.sum(log_u - np.log1p(-theta * (1.0 - u)), axis=1)
    return (
        (d + 1) * math.log1p(-theta)
        - 2.0 * math.log(theta)
        + log_h
        - 2.0 * np.sum(log_u, axis=1)
        + log_polylog_neg_from_log(d, log_h)
    )


def _clayton_log_t(theta: float, u: np.ndarray) -> np.ndarray:
    return logsumexp(log_expm1(-theta * np.log(u)), axis=1)


def _rows_clayton(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log1p_t = np.logaddexp(0.0, _clayton_log_t(theta, u))
    return (
        float(np.sum(np.log1p(theta * np.arange(d))))
        - (1.0 + theta) * np.sum(np.log(u), axis=1)
        - (d + 1.0 / theta) * log1p_t
    )


def _frank_log_h(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    return (1 - d) * log1mexp(theta) + np.sum(log1mexp(theta * u), axis=1)


def _rows_frank(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log_h = _frank_log_h(theta, u)
    return (
        (d - 1) * (math.log(theta) - log1mexp(theta))
        + log_polylog_neg_from_log(d - 1, log_h)
        - theta * np.sum(u, axis=1)
        - log_h
    )


def _gumbel_parts(theta: float, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    log_mlu = np.log(-np.log(u))
    log_t = logsumexp(theta * log_mlu, axis=1)
    return log_mlu, log_t, log_t / theta


def _rows_gumbel(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log_mlu, log_t, log_x = _gumbel_parts(theta, u)
    return (
        d * math.log(theta)
        - np.exp(log_x)
        + (theta - 1.0) * np.sum(log_mlu, axis=1)
        - d * log_t
        - np.sum(np.log(u), axis=1)
        + gumbel_coeffs(d, theta).log_poly(log_x)
    )


def _joe_parts(theta: float, u: np.ndarray) -> tuple[np.ndarray, ...]:
    log1m_u = np.log1p(-u)
    log_h = np.sum(log1mexp(-theta * log1m_u), axis=1)
    log_1mh = log1mexp(-log_h)
    return log1m_u, log_h, log_1mh, log_h - log_1mh


def _rows_joe(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log1m_u, _, log_1mh, log_y = _joe_parts(theta, u)
    return (
        (d - 1) * math.log(theta)
        + (theta - 1.0) * np.sum(log1m_u, axis=1)
        - (1.0 - 1.0 / theta) * log_1mh
        + joe_coeffs(d, theta).log_poly(log_y)
    )


_ROWS = {
    FamilyId.AMH: _rows_amh,
    FamilyId.CLAYTON: _rows_clayton,
    FamilyId.FRANK: _rows_frank,
    FamilyId.GUMBEL: _rows_gumbel,
    FamilyId.JOE: _rows_joe,
}


def log_density_rows(family: "FamilyId | str", theta: float, u: np.ndarray) -> np.ndarray:
    """
    Row-wise log-density of an (n, d) matrix without the finiteness check;
    non-finite entries are left for the caller to count.
    """
    fam, theta = check_theta(family, theta)
    u, _ = check_u(u)
    if DOMAINS[fam].is_boundary(theta):
        return np.zeros(u.shape[0])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.asarray(_ROWS[fam](theta, u), dtype=float)


def log_density(family: "FamilyId | str", theta: float, u: np.ndarray) -> np.ndarray | float:
    """
    Log copula density via the family-specific closed form.

    Args:
        family: Family tag.
        theta: Parameter; closed-boundary values give the independence density.
        u: Point(s) strictly inside the unit hypercube, d >= 2.

    Returns:
        log c_theta(u) as a float, or one value per row.

    Raises:
        DomainError: On boundary points or an invalid parameter.
        NumericalError: If any value is not finite.
    """
    arr, single = check_u(u)
    values = log_density_rows(family, theta, arr)
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            "log-density is not finite.",
            {"family": as_family(family).value, "theta": float(theta),
             "nonfinite": int(np.sum(~np.isfinite(values)))},
        )
    return _finish(values, single)


def generic_log_density(
    family: "FamilyId | str", theta: float, u: np.ndarray
) -> np.ndarray | float:
    """
    Log-density through the general composition
    log((-1)^d psi^(d)(t(u))) + sum_j log(-(psi^{-1})'(u_j)).
    """
    fam, theta = check_theta(family, theta)
    arr, single = check_u(u)
    d = arr.shape[1]
    if DOMAINS[fam].is_boundary(theta):
        return _finish(np.zeros(arr.shape[0]), single)
    t = np.sum(np.asarray(psi_inv(fam, theta, arr)).reshape(arr.shape), axis=1)
    values = np.asarray(log_gen_deriv(fam, theta, d, t)).reshape(-1) + np.sum(
        np.asarray(log_neg_psi_inv_deriv(fam, theta, arr)).reshape(arr.shape), axis=1
    )
    if not np.all(np.isfinite(values)):
        raise NumericalError("log-density is not finite.", {"family": fam.value, "theta": theta})
    return _finish(values, single)


def copula_cdf(family: "FamilyId | str", theta: float, u: np.ndarray) -> np.ndarray | float:
    """C(u) = psi(sum_j psi^{-1}(u_j))."""
    fam, theta = check_theta(family, theta)
    arr, single = check_u(u, min_dim=1)
    t = np.sum(np.asarray(psi_inv(fam, theta, arr)).reshape(arr.shape), axis=1)
    return _finish(np.asarray(psi(fam, theta, t)).reshape(-1), single)


# scores


def _score_amh(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    b = np.sum((1.0 - u) / (1.0 - theta * (1.0 - u)), axis=1)
    log_h = math.log(theta) + np.sum(np.log(u) - np.log1p(-theta * (1.0 - u)), axis=1)
    ratio = np.exp(log_polylog_neg_from_log(d + 1, log_h) - log_polylog_neg_from_log(d, log_h))
    return -(d + 1) / (1.0 - theta) - 1.0 / theta + b + (b + 1.0 / theta) * ratio


def _clayton_score_parts(theta: float, u: np.ndarray) -> tuple[np.ndarray, ...]:
    log_u = np.log(u)
    log1p_t = np.logaddexp(0.0, _clayton_log_t(theta, u))
    log_dt = logsumexp(np.log(-log_u) - theta * log_u, axis=1)
    log_d2t = logsumexp(2.0 * np.log(-log_u) - theta * log_u, axis=1)
    return log_u, log1p_t, np.exp(log_dt - log1p_t), np.exp(log_d2t - log1p_t)


def _score_clayton(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    k = np.arange(d)
    log_u, log1p_t, ratio, _ = _clayton_score_parts(theta, u)
    return (
        float(np.sum(k / (theta * k + 1.0)))
        - np.sum(log_u, axis=1)
        + log1p_t / theta**2
        - (d + 1.0 / theta) * ratio
    )


def _score_frank(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    log_h = _frank_log_h(theta, u)
    ratio = np.exp(log_polylog_neg_from_log(d, log_h) - log_polylog_neg_from_log(d - 1, log_h))
    inner = np.sum(u / np.expm1(theta * u), axis=1) - (d - 1) / math.expm1(theta)
    return (d - 1) / theta - np.sum(u / -np.expm1(-theta * u), axis=1) + inner * ratio


def _score_gumbel(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    alpha = 1.0 / theta
    log_mlu, log_t, log_x = _gumbel_parts(theta, u)
    b = np.sum(np.exp(theta * log_mlu - log_t[:, None]) * log_mlu, axis=1)
    coeffs = gumbel_coeffs(d, theta)
    k = np.arange(1, d + 1)
    kx = np.multiply.outer(log_x, k)
    shift = b - alpha * log_t
    with np.errstate(divide="ignore"):
        log_first = np.log(k) + coeffs.log_coeffs + kx + np.log(np.abs(shift))[:, None]
    sign_first = np.sign(shift)[:, None] * coeffs.signs
    log_second = coeffs.log_weighted + kx
    sign_second = np.broadcast_to(-coeffs.weighted_signs, log_second.shape)
    log_q, sign_q = signed_logsumexp(
        np.concatenate([log_first, log_second], axis=1),
        np.concatenate([sign_first, sign_second], axis=1),
        axis=1,
    )
    log_p = coeffs.log_poly(log_x)
    x = np.exp(log_x)
    return (
        d / theta
        - x * (alpha * b - alpha**2 * log_t)
        + np.sum(log_mlu, axis=1)
        - d * b
        + sign_q * np.exp(log_q - math.log(theta) - log_p)
    )


def _score_joe(theta: float, u: np.ndarray) -> np.ndarray:
    d = u.shape[1]
    alpha = 1.0 / theta
    log1m_u, _, log_1mh, log_y = _joe_parts(theta, u)
    neg_log1m = -log1m_u
    b = np.sum(neg_log1m * np.exp(theta * log1m_u - log1mexp(-theta * log1m_u)), axis=1)
    coeffs = joe_coeffs(d, theta)
    k = np.arange(1, d + 1)
    # (1/theta) sum_{j<k} 1/(theta j - 1)
    c = np.concatenate([[0.0], np.cumsum(alpha / (theta * np.arange(1, d) - 1.0))])
    weight = c[None, :] + (k - 1)[None, :] * (b * np.exp(-log_1mh))[:, None]
    base = coeffs.log_coeffs + np.multiply.outer(log_y, k - 1)
    with np.errstate(divide="ignore"):
        log_q = logsumexp(base + np.log(weight), axis=1)
    log_p = logsumexp(base, axis=1)
    return (
        (d - 1) / theta
        + np.sum(log1m_u, axis=1)
        - log_1mh / theta**2
        + (1.0 - alpha) * np.exp(log_y) * b
        + np.exp(log_q - log_p)
    )


_SCORES = {
    FamilyId.AMH: _score_amh,
    FamilyId.CLAYTON: _score_clayton,
    FamilyId.FRANK: _score_frank,
    FamilyId.GUMBEL: _score_gumbel,
    FamilyId.JOE: _score_joe,
}


def _numeric_score(fam: FamilyId, theta: float, u: np.ndarray) -> np.ndarray:
    dom = DOMAINS[fam]
    h = 1e-5 * max(1.0, abs(theta))
    if dom.is_boundary(theta) and theta == dom.lower:
        f0, f1, f2 = (log_density_rows(fam, theta + i * h, u) for i in range(3))
        return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
    if dom.is_boundary(theta):
        f0, f1, f2 = (log_density_rows(fam, theta - i * h, u) for i in range(3))
        return (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h)
    return (
        -log_density_rows(fam, theta + 2 * h, u)
        + 8.0 * log_density_rows(fam, theta + h, u)
        - 8.0 * log_density_rows(fam, theta - h, u)
        + log_density_rows(fam, theta - 2 * h, u)
    ) / (12.0 * h)


def score(
    family: "FamilyId | str", theta: float, u: np.ndarray, method: str = "analytic"
) -> np.ndarray | float:
    """
    Score function, the theta-derivative of the log-density.

    Args:
        family: Family tag.
        theta: Parameter. On a closed boundary the one-sided numerical
            derivative is returned.
        u: Point(s) strictly inside the unit hypercube.
        method: ``"analytic"`` for the closed forms, ``"numeric"`` for a
            four-point central difference of the log-density.

    Returns:
        The score per row.

    Raises:
        NumericalError: If a value is not finite.
    """
    fam, theta = check_theta(family, theta)
    arr, single = check_u(u)
    if method not in ("analytic", "numeric"):
        raise DomainError(f"unknown score method {method!r}.")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if method == "numeric" or DOMAINS[fam].is_boundary(theta):
            values = _numeric_score(fam, theta, arr)
        else:
            values = np.asarray(_SCORES[fam](theta, arr), dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericalError("score is not finite.", {"family": fam.value, "theta": theta})
    return _finish(values, single)


def clayton_loglik_hessian(theta: float, u: np.ndarray) -> np.ndarray | float:
    """Second theta-derivative of the Clayton log-density, per row."""
    _, theta = check_theta(FamilyId.CLAYTON, theta)
    arr, single = check_u(u)
    d = arr.shape[1]
    k = np.arange(d)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        _, log1p_t, ratio, ratio2 = _clayton_score_parts(theta, arr)
        values = (
            -float(np.sum((k / (theta * k + 1.0)) ** 2))
            + 2.0 / theta**2 * (ratio - log1p_t / theta)
            + (d + 1.0 / theta) * (ratio**2 - ratio2)
        )
    if not np.all(np.isfinite(values)):
        raise NumericalError("Clayton Hessian is not finite.", {"theta": theta})
    return _finish(values, single)


# dependence measures


def _tau_amh(theta: float) -> float:
    if theta < 1e-2:
        return (
            2.0 * theta / 9.0
            + theta**2 / 18.0
            + theta**3 / 45.0
            + theta**4 / 90.0
            + 2.0 * theta**5 / 315.0
        )
    return 1.0 - 2.0 * (theta + (1.0 - theta) ** 2 * math.log1p(-theta)) / (3.0 * theta**2)


def _tau_frank(theta: float) -> float:
    if theta < 1e-2:
        return theta / 9.0 - theta**3 / 900.0 + theta**5 / 52920.0
    if theta > 60.0:
        integral = math.pi**2 / 6.0 - (theta + 1.0) * math.exp(-theta)
        return 1.0 + 4.0 * (integral / theta - 1.0) / theta
    return 1.0 + 4.0 * (debye1(theta) - 1.0) / theta


def _tau_joe(theta: float) -> float:
    if theta == 1.0:
        return 0.0
    if abs(theta - 2.0) < 1e-4:
        series = mpmath.nsum(
            lambda k: 1 / (k * (theta * k + 2) * (theta * (k - 1) + 2)), [1, mpmath.inf]
        )
        return float(1 - 4 * series)
    return 1.0 + 2.0 * (digamma(2.0) - digamma(2.0 / theta + 1.0)) / (2.0 - theta)


def _tau_unchecked(fam: FamilyId, theta: float) -> float:
    if fam is FamilyId.AMH:
        return _tau_amh(theta)
    if fam is FamilyId.CLAYTON:
        return theta / (theta + 2.0)
    if fam is FamilyId.FRANK:
        return _tau_frank(theta)
    if fam is FamilyId.GUMBEL:
        return (theta - 1.0) / theta
    return _tau_joe(theta)


def tau(family: "FamilyId | str", theta: float) -> float:
    """Kendall's tau of the family at ``theta``."""
    fam, theta = check_theta(family, theta)
    return _tau_unchecked(fam, theta)


def joe_tau_series(theta: float, terms: int = 100000) -> float:
    """Kendall's tau of Joe's family from its series, 1 - 4 sum_k 1/(k(theta k+2)(theta(k-1)+2))."""
    _, theta = check_theta(FamilyId.JOE, theta)
    k = np.arange(1, terms + 1, dtype=float)
    partial = math.fsum(1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0)))
    # the tail behaves like 1/(2 theta^2 K^2)
    return 1.0 - 4.0 * (partial + 1.0 / (2.0 * theta**2 * terms**2))


def tau_inverse(family: "FamilyId | str", tau_target: float) -> float:
    """
    Parameter whose Kendall's tau equals ``tau_target``.

    Raises:
        RangeError: If ``tau_target`` is not attainable by the family.
        ConvergenceError: If the bracketing search fails.
    """
    fam = as_family(family)
    lower, upper, lower_attained = TAU_RANGES[fam]
    tau_target = float(tau_target)
    inside = (tau_target >= lower if lower_attained else tau_target > lower) and tau_target < upper
    if not inside:
        raise RangeError(
            f"tau={tau_target} is not attainable by the {fam.value} family.",
            {"family": fam.value, "tau": tau_target, "range": [lower, upper]},
        )
    if fam is FamilyId.GUMBEL:
        return 1.0 / (1.0 - tau_target)
    if fam is FamilyId.CLAYTON:
        return 2.0 * tau_target / (1.0 - tau_target)
    if fam is FamilyId.JOE and tau_target == 0.0:
        return 1.0

    def gap(theta: float) -> float:
        return _tau_unchecked(fam, theta) - tau_target

    if fam is FamilyId.AMH:
        lo, hi = 0.0, 1.0 - 1e-15
    else:
        lo = 0.0 if fam is FamilyId.FRANK else 1.0
        hi = max(2.0, 8.0 / (1.0 - tau_target))
        while gap(hi) < 0:
            hi *= 2.0
            if hi > 1e12:
                raise ConvergenceError(
                    "could not bracket the tau inverse.", {"family": fam.value, "tau": tau_target}
                )
    root, info = optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                 maxiter=500, full_output=True)
    if not info.converged:
        raise ConvergenceError(
            "tau inverse root search did not converge.", {"family": fam.value, "tau": tau_target}
        )
    return float(root)


def tail_dependence(family: "FamilyId | str", theta: float) -> tuple[float, float]:
    """Lower and upper tail-dependence coefficients."""
    fam, theta = check_theta(family, theta)
    if fam is FamilyId.CLAYTON:
        return 2.0 ** (-1.0 / theta), 0.0
    if fam in (FamilyId.GUMBEL, FamilyId.JOE):
        return 0.0, 2.0 - 2.0 ** (1.0 / theta)
    return 0.0, 0.0


def kendall_distribution(
    family: "FamilyId | str", theta: float, d: int, w: np.ndarray | float
) -> np.ndarray | float:
    """
    Kendall distribution function K(w) = P(C(U) <= w), evaluated as
    sum_{k<d} t^k (-1)^k psi^(k)(t) / k! with t = psi^{-1}(w).
    """
    fam, theta = check_theta(family, theta)
    if int(d) != d or d < 1:
        raise DomainError(f"d must be a positive integer, got {d}.")
    w = np.asarray(w, dtype=float)
    if np.any((w < 0) | (w > 1)):
        raise DomainError("kendall_distribution requires w in [0, 1].")
    inner = (w > 0) & (w < 1)
    out = np.where(w >= 1, 1.0, 0.0)
    if np.any(inner):
        t = np.asarray(psi_inv(fam, theta, w[inner]), dtype=float)
        terms = [np.log(w[inner])]
        for k in range(1, int(d)):
            terms.append(
                np.asarray(log_gen_deriv(fam, theta, k, t)) + k * np.log(t) - gammaln(k + 1)
            )
        out[inner] = np.minimum(np.exp(logsumexp(np.vstack(terms), axis=0)), 1.0)
    return as_output(out)


def khoudraji_log_density(
    family: "FamilyId | str", theta: float, alphas: np.ndarray, u: np.ndarray
) -> float:
    """
    Log-density of the Khoudraji transform C_psi(u^alpha) Pi(u^(1-alpha)),
    summed over all 2^d subsets of coordinates.

    Raises:
        DimensionError: If d exceeds 20 or ``alphas`` does not match ``u``.
    """
    fam, theta = check_theta(family, theta)
    arr, single = check_u(u)
    if not single:
        raise DimensionError("khoudraji_log_density takes a single point.")
    point = arr[0]
    alphas = np.asarray(alphas, dtype=float)
    d = point.size
    if d > KHOUDRAJI_MAX_DIM:
        raise DimensionError(f"Khoudraji density is limited to d <= {KHOUDRAJI_MAX_DIM}, got {d}.")
    if alphas.shape != point.shape or np.any((alphas < 0) | (alphas > 1)):
        raise DimensionError("alphas must have one value in [0, 1] per coordinate.")
    if np.all(alphas == 1.0):
        return float(log_density(fam, theta, point))
    if np.all(alphas == 0.0):
        return 0.0
    active = alphas > 0
    v = point**alphas
    t = float(np.sum(np.asarray(psi_inv(fam, theta, v)).reshape(-1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        a_in = np.full(d, -np.inf)
        a_in[active] = np.log(alphas[active]) + np.asarray(
            log_neg_psi_inv_deriv(fam, theta, v[active])
        ).reshape(-1)
        a_out = np.log1p(-alphas) - alphas * np.log(point)
    a_in = np.nan_to_num(a_in, nan=LOG_FLOOR, neginf=LOG_FLOOR)
    a_out = np.nan_to_num(a_out, nan=LOG_FLOOR, neginf=LOG_FLOOR)
    masks = np.array(list(product((False, True), repeat=d)), dtype=bool)
    sizes = masks.sum(axis=1)
    gen = np.full(d + 1, LOG_FLOOR)
    gen[0] = float(log_psi(fam, theta, t))
    if t > 0:
        for k in range(1, d + 1):
            gen[k] = float(log_gen_deriv(fam, theta, k, t))
    terms = gen[sizes] + masks @ a_in + (~masks) @ a_out
    value = float(logsumexp(terms))
    if not math.isfinite(value):
        raise NumericalError("Khoudraji log-density is not finite.", {"family": fam.value})
    return value

