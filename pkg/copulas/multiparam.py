"""
Two-parameter Archimedean families: the outer-power Clayton family and the
generalized-inverse-Gaussian (GIG) family.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.optimize import elementwise
from scipy.special import gammaln, logsumexp

from ArchCopula.utils import get_setting
from copulas import families
from copulas.families import FamilyId, check_u
from copulas.specfun import LOG2, as_output, log_bessel_k, log_expm1, signed_logsumexp
from core.exceptions import ConvergenceError, DomainError, NumericalError, RangeError

logger = logging.getLogger(__name__)

# below this theta the GIG tau integral is replaced by its Clayton limit
GIG_TAU_CLAYTON_SWITCH = 1e-10
GIG_NU_MIN = -0.5


@dataclass(frozen=True)
class OuterPowerClaytonParams:
    """
    Outer-power Clayton parameters, generator (1 + t^(1/beta))^(-1/theta).

    ``beta == 1`` is the Clayton family itself.
    """

    theta: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "beta", float(self.beta))
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise DomainError(f"outer-power Clayton needs theta > 0, got {self.theta}.")
        if not (self.beta >= 1 and math.isfinite(self.beta)):
            raise DomainError(f"outer-power Clayton needs beta >= 1, got {self.beta}.")

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta, self.beta])


@dataclass(frozen=True)
class GigParams:
    """GIG parameters (nu, theta), generator (1+t)^(-nu/2) K_nu(theta sqrt(1+t)) / K_nu(theta)."""

    nu: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "theta", float(self.theta))
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise DomainError(f"GIG needs theta > 0, got {self.theta}.")
        if not (self.nu > GIG_NU_MIN and math.isfinite(self.nu)):
            raise DomainError(f"GIG needs nu > -1/2, got {self.nu}.")

    def as_vector(self) -> np.ndarray:
        return np.array([self.nu, self.theta])


# outer-power Clayton


def _op_lgd_from_log(p: OuterPowerClaytonParams, d: int, log_t: np.ndarray) -> np.ndarray:
    """log((-1)^d psi^(d)(t)) for the outer-power generator, given log t."""
    theta, beta = p.theta, p.beta
    log_x = log_t / beta
    log1p_x = np.logaddexp(0.0, log_x)
    if d == 0:
        return -log1p_x / theta
    k = np.arange(1, d + 1)
    # (-1)^k psi^(k)(x) of the inner Clayton generator
    clayton = gammaln(k + 1.0 / theta) - gammaln(1.0 / theta) - np.multiply.outer(
        log1p_x, k + 1.0 / theta
    )
    coeffs = families.gumbel_coeffs(d, beta)
    terms = coeffs.log_coeffs + clayton + np.multiply.outer(log_x, k)
    value, sign = signed_logsumexp(terms, np.broadcast_to(coeffs.signs, terms.shape), axis=-1)
    if np.any(sign <= 0):
        raise NumericalError(
            "outer-power derivative sum is not positive.", {"theta": theta, "beta": beta, "d": d}
        )
    return value - d * log_t


def op_psi(p: OuterPowerClaytonParams, t: np.ndarray | float) -> np.ndarray | float:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("op_psi requires t >= 0.")
    return as_output(np.exp(-np.log1p(t ** (1.0 / p.beta)) / p.theta))


def op_psi_inv(p: OuterPowerClaytonParams, u: np.ndarray | float) -> np.ndarray | float:
    """(u^(-theta) - 1)^beta for u in (0, 1]."""
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u <= 1))):
        raise DomainError("op_psi_inv requires u in (0, 1].")
    with np.errstate(divide="ignore"):
        out = np.exp(p.beta * log_expm1(-p.theta * np.log(u)))
    return as_output(np.where(u == 1, 0.0, out))


def op_log_gen_deriv(
    p: OuterPowerClaytonParams, d: int, t: np.ndarray | float
) -> np.ndarray | float:
    """
    log((-1)^d psi^(d)(t)) of the outer-power Clayton generator.

    The derivative of psi(t^(1/beta)) is P(t^(1/beta)) / t^d with
    P(x) = sum_k a_dk(beta) (-1)^k psi_C^(k)(x) x^k, a_dk the Gumbel
    polynomial coefficients.

    Args:
        p: Parameters.
        d: Order, 0 <= d <= 200.
        t: Positive argument(s).

    Raises:
        DomainError: On a negative order or non-positive ``t``.
        NumericalError: If the signed sum is not positive.
    """
    if int(d) != d or d < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {d}.")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("op_log_gen_deriv requires t > 0.")
    if p.beta == 1.0:
        return families.log_gen_deriv(FamilyId.CLAYTON, p.theta, int(d), t)
    return as_output(_op_lgd_from_log(p, int(d), np.log(t)))


def op_log_density_rows(p: OuterPowerClaytonParams, u: np.ndarray) -> np.ndarray:
    u, _ = check_u(u)
    if p.beta == 1.0:
        return families.log_density_rows(FamilyId.CLAYTON, p.theta, u)
    d = u.shape[1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_u = np.log(u)
        log_inner = log_expm1(-p.theta * log_u)
        log_t = logsumexp(p.beta * log_inner, axis=1)
        jacobian = (
            math.log(p.beta)
            + (p.beta - 1.0) * log_inner
            + math.log(p.theta)
            - (p.theta + 1.0) * log_u
        )
        return _op_lgd_from_log(p, d, log_t) + np.sum(jacobian, axis=1)


def op_log_density(p: OuterPowerClaytonParams, u: np.ndarray) -> np.ndarray | float:
    """Log-density of the outer-power Clayton copula at point(s) ``u``."""
    arr, single = check_u(u)
    values = op_log_density_rows(p, arr)
    if not np.all(np.isfinite(values)):
        raise NumericalError(
            "outer-power Clayton log-density is not finite.", {"theta": p.theta, "beta": p.beta}
        )
    return float(values[0]) if single else values


def op_tau(p: OuterPowerClaytonParams) -> float:
    return 1.0 - 2.0 / (p.beta * (p.theta + 2.0))


def op_tail_dependence(p: OuterPowerClaytonParams) -> tuple[float, float]:
    return 2.0 ** (-1.0 / (p.beta * p.theta)), 2.0 - 2.0 ** (1.0 / p.beta)


def op_theta_for_tau(tau: float, beta: float) -> float:
    """
    Inner parameter giving Kendall's tau ``tau`` at outer power ``beta``.

    Raises:
        RangeError: If no theta > 0 attains ``tau`` for this ``beta``.
    """
    theta = 2.0 / (beta * (1.0 - tau)) - 2.0
    if not (0 <= tau < 1 and theta > 0):
        raise RangeError(
            f"tau={tau} is not attainable with beta={beta}.", {"tau": tau, "beta": beta}
        )
    return theta


def op_beta_for_tau(tau: float, theta: float) -> float:
    """
    Outer power giving Kendall's tau ``tau`` at inner parameter ``theta``.

    Raises:
        RangeError: If the solution is below 1.
    """
    beta = 2.0 / ((1.0 - tau) * (theta + 2.0)) if tau < 1 else math.inf
    if not (1.0 <= beta < math.inf):
        raise RangeError(
            f"tau={tau} is not attainable with theta={theta}.", {"tau": tau, "theta": theta}
        )
    return beta


# GIG


def _gig_log_h(
    nu1: float, nu2: float, theta: float, log1p_t: np.ndarray
) -> np.ndarray:
    # log of (theta sqrt(1+t))^nu1 K_nu1(theta sqrt(1+t)) / (theta^nu2 K_nu2(theta))
    arg = theta * np.exp(0.5 * log1p_t)
    return (
        nu1 * (math.log(theta) + 0.5 * log1p_t)
        + log_bessel_k(nu1, arg)
        - nu2 * math.log(theta)
        - log_bessel_k(nu2, theta)
    )


def _gig_lgd(p: GigParams, d: int, log1p_t: np.ndarray) -> np.ndarray:
    return _gig_log_h(p.nu + d, p.nu, p.theta, log1p_t) - d * LOG2 - (p.nu + d) * log1p_t


def gig_log_psi(p: GigParams, t: np.ndarray | float) -> np.ndarray | float:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("gig_psi requires t >= 0.")
    return as_output(np.where(t == 0, 0.0, _gig_lgd(p, 0, np.log1p(t))))


def gig_psi(p: GigParams, t: np.ndarray | float) -> np.ndarray | float:
    return as_output(np.exp(gig_log_psi(p, t)))


def gig_psi_inv(p: GigParams, u: np.ndarray | float) -> np.ndarray | float:
    """
    Inverse GIG generator by bracketed root finding on log psi(t) = log u,
    searching [0, (1 - log(u)/theta)^2 - 1].

    Raises:
        DomainError: If ``u`` is outside (0, 1].
        ConvergenceError: If the root search fails for some ``u``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u <= 1))):
        raise DomainError("gig_psi_inv requires u in (0, 1].")
    out = np.zeros(u.shape)
    inner = u < 1
    if np.any(inner):
        log_u = np.log(u[inner])
        upper = np.expm1(2.0 * np.log1p(-log_u / p.theta))

        def residual(t: np.ndarray, target: np.ndarray) -> np.ndarray:
            return _gig_lgd(p, 0, np.log1p(t)) - target

        res = elementwise.find_root(
            residual,
            (np.zeros_like(upper), upper),
            args=(log_u,),
            tolerances={"xatol": 1e-300, "xrtol": 4 * np.finfo(float).eps, "fatol": 1e-14},
            maxiter=300,
        )
        if not np.all(res.success):
            raise ConvergenceError(
                "GIG inverse generator root search failed.",
                {"nu": p.nu, "theta": p.theta, "failed": int(np.sum(~res.success))},
            )
        out[inner] = res.x
    return as_output(out)


def gig_log_gen_deriv(p: GigParams, d: int, t: np.ndarray | float) -> np.ndarray | float:
    """
    log((-1)^d psi^(d)(t)) = log h_{nu+d,nu,theta}(t) - d log 2 - (nu+d) log(1+t).
    """
    if int(d) != d or d < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {d}.")
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("gig_log_gen_deriv requires t > 0.")
    return as_output(_gig_lgd(p, int(d), np.log1p(t)))


def gig_log_density_rows(p: GigParams, u: np.ndarray) -> np.ndarray:
    u, _ = check_u(u)
    d = u.shape[1]
    t_j = np.asarray(gig_psi_inv(p, u)).reshape(u.shape)
    log1p_tj = np.log1p(t_j)
    log1p_t = np.log1p(np.sum(t_j, axis=1))
    return (
        -(p.nu + d) * log1p_t
        + _gig_log_h(p.nu + d, p.nu, p.theta, log1p_t)
        + (p.nu + 1.0) * np.sum(log1p_tj, axis=1)
        - np.sum(_gig_log_h(p.nu + 1.0, p.nu, p.theta, log1p_tj), axis=1)
    )


def gig_log_density(p: GigParams, u: np.ndarray) -> np.ndarray | float:
    """Log-density of the GIG copula at point(s) ``u``."""
    arr, single = check_u(u)
    values = gig_log_density_rows(p, arr)
    if not np.all(np.isfinite(values)):
        raise NumericalError("GIG log-density is not finite.", {"nu": p.nu, "theta": p.theta})
    return float(values[0]) if single else values


def gig_generic_log_density(p: GigParams, u: np.ndarray) -> np.ndarray | float:
    """Log-density as log((-1)^d psi^(d)(t)) - sum_j log((-psi')(t_j))."""
    arr, single = check_u(u)
    d = arr.shape[1]
    t_j = np.asarray(gig_psi_inv(p, arr)).reshape(arr.shape)
    values = _gig_lgd(p, d, np.log1p(np.sum(t_j, axis=1))) - np.sum(
        _gig_lgd(p, 1, np.log1p(t_j)), axis=1
    )
    return float(values[0]) if single else values


def _gig_tau_integrand(s: float, nu: float, theta: float, log_k_nu: float) -> float:
    # t (theta K_{nu+1}(theta sqrt(1+t)) / ((1+t)^((nu+1)/2) K_nu(theta)))^2 dt, t = e^s - 1
    if s == 0.0:
        return 0.0
    log_arg = 2.0 * (
        math.log(theta)
        + float(log_bessel_k(nu + 1.0, theta * math.exp(0.5 * s)))
        - 0.5 * (nu + 1.0) * s
        - log_k_nu
    )
    return math.exp(float(log_expm1(s)) + s + log_arg)


def gig_tau(p: GigParams) -> float:
    """
    Kendall's tau of the GIG family,
    1 - int_0^inf t (theta h_{nu+1}(t) / K_nu(theta))^2 dt,
    integrated over s = log(1 + t) up to where the Bessel tail vanishes.

    Raises:
        DomainError: If ``nu < 0``.
        ConvergenceError: If the quadrature misses its tolerance.
    """
    if p.nu < 0:
        raise DomainError(f"gig_tau requires nu >= 0, got {p.nu}.")
    if p.theta < GIG_TAU_CLAYTON_SWITCH and p.nu > 0:
        return 1.0 / (1.0 + 2.0 * p.nu)
    log_k_nu = float(log_bessel_k(p.nu, p.theta))
    s_max = 2.0 * math.log1p(50.0 / p.theta)
    knee = 2.0 * math.log1p(1.0 / p.theta)
    epsabs = get_setting("ARCHCOP_QUAD_EPSABS", 1e-10)
    value, abserr = integrate.quad(
        _gig_tau_integrand,
        0.0,
        s_max,
        args=(p.nu, p.theta, log_k_nu),
        points=[knee] if 0 < knee < s_max else None,
        epsabs=epsabs,
        epsrel=1e-10,
        limit=500,
    )
    if abserr > 1e-8:
        raise ConvergenceError(
            "GIG tau quadrature did not converge.",
            {"nu": p.nu, "theta": p.theta, "abserr": abserr},
        )
    return 1.0 - value


def gig_tail_dependence(p: GigParams) -> tuple[float, float]:
    return 0.0, 0.0


def _bracket_root(
    func: Callable[[float], float], lo: float, hi: float, expand_hi: bool, limit: float
) -> tuple[float, float]:
    # grow one end geometrically until func changes sign
    while func(lo) * func(hi) > 0:
        if expand_hi:
            hi = 2.0 * hi if hi > 0 else hi + 1.0
            if hi > limit:
                raise ConvergenceError("could not bracket the root.", {"hi": hi})
        else:
            lo = 2.0 * lo if lo < 0 else lo - 1.0
            if lo < -limit:
                raise ConvergenceError("could not bracket the root.", {"lo": lo})
    return lo, hi


def gig_theta_for_tau(tau: float, nu: float) -> float:
    """
    The theta with gig_tau(nu, theta) == tau; tau decreases in theta.

    Raises:
        RangeError: If ``tau`` is outside (0, 1/(1+2 nu)).
    """
    limit = 1.0 / (1.0 + 2.0 * nu)
    if not 0.0 < tau < limit:
        raise RangeError(
            f"tau={tau} is not attainable by GIG with nu={nu}.",
            {"tau": tau, "nu": nu, "range": [0.0, limit]},
        )

    def gap(log_theta: float) -> float:
        return gig_tau(GigParams(nu, math.exp(log_theta))) - tau

    lo, hi = math.log(1e-3), math.log(10.0)
    try:
        # a target above tau(lo) needs a smaller theta
        lo, hi = _bracket_root(gap, lo, hi, gap(lo) >= 0, 700.0)
    except ConvergenceError:
        raise RangeError(
            f"tau={tau} is not attainable by GIG with nu={nu} in floating point.",
            {"tau": tau, "nu": nu},
        )
    return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-12, maxiter=200))


def gig_nu_for_tau(tau: float, theta: float) -> float:
    """
    The nu >= 0 with gig_tau(nu, theta) == tau; tau decreases in nu.

    Raises:
        RangeError: If ``tau`` exceeds gig_tau(0, theta) or is not positive.
    """
    top = gig_tau(GigParams(0.0, theta))
    if not 0.0 < tau <= top:
        raise RangeError(
            f"tau={tau} is not attainable by GIG with theta={theta}.",
            {"tau": tau, "theta": theta, "range": [0.0, top]},
        )
    if tau == top:
        return 0.0

    def gap(nu: float) -> float:
        return gig_tau(GigParams(nu, theta)) - tau

    _, hi = _bracket_root(gap, 0.0, 1.0, True, 1e6)
    return float(optimize.brentq(gap, 0.0, hi, xtol=1e-12, maxiter=200))
