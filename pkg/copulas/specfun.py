"""
Log-scale special functions behind the generator derivatives.

Everything here returns logarithms (or ``SignedLog`` values) so that
derivatives of order 100 and more never overflow.
"""

import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln, kve, logsumexp

from ArchCopula.utils import get_setting
from core.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)

# below this the Debye integral is replaced by its Taylor series
DEBYE_SERIES_THRESHOLD = 1e-4
# order from which the uniform asymptotic expansion replaces an overflowing kve
BESSEL_UNIFORM_MIN_ORDER = 10.0


def as_output(value: np.ndarray | float) -> np.ndarray | float:
    """Return 0-d results as Python floats and everything else as arrays."""
    if np.ndim(value) == 0:
        return float(value)
    return np.asarray(value)


@dataclass(frozen=True)
class SignedLog:
    """
    A real number stored as ``sign * exp(log_abs)``.

    ``sign`` is one of -1, 0, +1 and ``sign == 0`` exactly when the value is
    zero, in which case ``log_abs`` is ``-inf``.
    """

    sign: int
    log_abs: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"SignedLog sign must be -1, 0 or 1, got {self.sign}.")
        if self.sign == 0 and self.log_abs != -math.inf:
            object.__setattr__(self, "log_abs", -math.inf)
        if self.sign != 0 and self.log_abs == -math.inf:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> "SignedLog":
        return cls(0, -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "SignedLog":
        if value == 0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.log_abs)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division of a SignedLog by zero")
        if self.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign * other.sign, self.log_abs - other.log_abs)

    def __add__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        log_abs, sign = logsumexp(
            [self.log_abs, other.log_abs], b=[self.sign, other.sign], return_sign=True
        )
        if sign == 0 or log_abs == -math.inf:
            return SignedLog.zero()
        return SignedLog(int(sign), float(log_abs))

    def __sub__(self, other: "SignedLog") -> "SignedLog":
        return self + (-other)


def signed_logsumexp(
    log_abs: np.ndarray, signs: np.ndarray, axis: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Sum terms ``signs * exp(log_abs)`` in the log domain.

    Args:
        log_abs: Logarithms of the absolute values of the terms.
        signs: Signs of the terms (-1, 0 or +1).
        axis: Axis along which to sum.

    Returns:
        A pair (log of the absolute sum, sign of the sum).
    """
    log_abs = np.asarray(log_abs, dtype=float)
    signs = np.asarray(signs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        result, sign = logsumexp(log_abs, b=signs, axis=axis, return_sign=True)
    result = np.where(sign == 0, -np.inf, result)
    return result, sign


def log1mexp(x: np.ndarray | float) -> np.ndarray | float:
    """
    ``log(1 - exp(-x))`` for ``x > 0`` without loss of precision on either end.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x <= LOG2, np.log(-np.expm1(-x)), np.log1p(-np.exp(-x)))
    return as_output(out)


def log_expm1(x: np.ndarray | float) -> np.ndarray | float:
    """``log(exp(x) - 1)`` for ``x > 0``, finite for large ``x``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.where(x > 30.0, x + np.log1p(-np.exp(-x)), np.log(np.expm1(x)))
    return as_output(out)


class StirlingTables:
    """
    Stirling numbers of the first kind s(n, k) (signed) and the second kind
    S(n, k), held in the log domain for 0 <= k <= n <= max_n.

    Instances are immutable; use ``stirling_tables`` to obtain a shared,
    lazily grown instance.
    """

    def __init__(self, max_n: int):
        if max_n < 1:
            raise DomainError(f"max_n must be at least 1, got {max_n}.")
        self.max_n = int(max_n)
        size = self.max_n + 1
        first = np.full((size, size), -np.inf)
        second = np.full((size, size), -np.inf)
        first[0, 0] = second[0, 0] = 0.0
        for n in range(1, size):
            log_prev = math.log(n - 1) if n > 1 else -np.inf
            # |s(n,k)| = |s(n-1,k-1)| + (n-1)|s(n-1,k)|
            first[n, 1 : n + 1] = np.logaddexp(
                first[n - 1, 0:n], log_prev + first[n - 1, 1 : n + 1]
            )
            # S(n,k) = S(n-1,k-1) + k S(n-1,k)
            k = np.arange(1, n + 1)
            second[n, 1 : n + 1] = np.logaddexp(
                second[n - 1, 0:n], np.log(k) + second[n - 1, 1 : n + 1]
            )
        n_idx, k_idx = np.indices((size, size))
        self.first_log = first
        self.first_sign = np.where(
            np.isfinite(first), np.where((n_idx - k_idx) % 2 == 0, 1.0, -1.0), 0.0
        )
        self.second_log = second
        for table in (self.first_log, self.first_sign, self.second_log):
            table.setflags(write=False)

    def _in_range(self, n: int, k: int) -> bool:
        if n > self.max_n:
            raise DomainError(f"n={n} exceeds the table size {self.max_n}.")
        return 0 <= k <= n

    def first(self, n: int, k: int) -> SignedLog:
        """Signed Stirling number of the first kind s(n, k)."""
        if not self._in_range(n, k):
            return SignedLog.zero()
        return SignedLog(int(self.first_sign[n, k]), float(self.first_log[n, k]))

    def second(self, n: int, k: int) -> SignedLog:
        """Stirling number of the second kind S(n, k)."""
        if not self._in_range(n, k):
            return SignedLog.zero()
        log_abs = float(self.second_log[n, k])
        return SignedLog(1 if np.isfinite(log_abs) else 0, log_abs)


_tables_lock = threading.Lock()
_tables: StirlingTables | None = None


def stirling_tables(max_n: int | None = None) -> StirlingTables:
    """
    Return Stirling tables covering at least ``max_n`` rows.

    The shared instance is rebuilt, never mutated, when a larger ``max_n``
    is requested.
    """
    global _tables
    if max_n is None:
        max_n = get_setting("ARCHCOP_STIRLING_MAX_N", 200)
    if max_n < 1:
        raise DomainError(f"max_n must be at least 1, got {max_n}.")
    with _tables_lock:
        if _tables is None or _tables.max_n < max_n:
            size = max(max_n, get_setting("ARCHCOP_STIRLING_MAX_N", 200))
            logger.debug("building Stirling tables up to n=%s", size)
            _tables = StirlingTables(size)
        return _tables


@lru_cache(maxsize=64)
def exact_stirling_first(n: int) -> tuple[int, ...]:
    """Row n of the signed Stirling numbers of the first kind as exact integers."""
    row = [1]
    for m in range(1, n + 1):
        nxt = [0] * (m + 1)
        for k in range(1, m + 1):
            nxt[k] = (row[k - 1] if k - 1 < len(row) else 0) - (m - 1) * (
                row[k] if k < len(row) else 0
            )
        row = nxt
    return tuple(row)


@lru_cache(maxsize=64)
def exact_stirling_second(n: int) -> tuple[tuple[int, ...], ...]:
    """Rows 0..n of the Stirling numbers of the second kind as exact integers."""
    rows: list[tuple[int, ...]] = [(1,)]
    for m in range(1, n + 1):
        prev = rows[-1]
        nxt = [0] * (m + 1)
        for k in range(1, m + 1):
            nxt[k] = (prev[k - 1] if k - 1 < len(prev) else 0) + k * (
                prev[k] if k < len(prev) else 0
            )
        rows.append(tuple(nxt))
    return tuple(rows)


def _check_order(d: int) -> int:
    if int(d) != d or d < 0:
        raise DomainError(f"Order must be a non-negative integer, got {d}.")
    return int(d)


def log_polylog_neg_from_log(d: int, log_z: np.ndarray | float) -> np.ndarray | float:
    """
    ``log Li_{-d}(z)`` given ``log z`` with ``z`` in (0, 1).

    Uses Li_{-d}(z) = sum_{k=0}^{d} k! S(d+1, k+1) x^(k+1) with x = z/(1-z);
    every term is positive so the sum is a plain log-sum-exp.
    """
    d = _check_order(d)
    log_z = np.asarray(log_z, dtype=float)
    if np.any(~(log_z < 0)):
        raise DomainError("polylog_neg requires 0 < z < 1.")
    tables = stirling_tables(d + 1)
    log_x = log_z - log1mexp(-log_z)
    k = np.arange(d + 1)
    log_coef = gammaln(k + 1) + tables.second_log[d + 1, 1 : d + 2]
    terms = log_coef + np.multiply.outer(log_x, k + 1)
    out = logsumexp(terms, axis=-1)
    return as_output(out)


def log_polylog_neg(d: int, z: np.ndarray | float) -> np.ndarray | float:
    """``log Li_{-d}(z)`` for ``z`` in (0, 1)."""
    z = np.asarray(z, dtype=float)
    if np.any((z <= 0) | (z >= 1)):
        raise DomainError("polylog_neg requires 0 < z < 1.")
    return log_polylog_neg_from_log(d, np.log(z))


def polylog_neg(d: int, z: float) -> SignedLog:
    """
    Polylogarithm of negative integer order, Li_{-d}(z) = sum_k k^d z^k.

    Args:
        d: Non-negative order.
        z: Argument in (0, 1).

    Returns:
        SignedLog: The strictly positive value.

    Raises:
        DomainError: If ``z`` is outside (0, 1) or ``d`` is negative.
    """
    return SignedLog(1, float(log_polylog_neg(d, z)))


def log_gamma_ratio(a: np.ndarray | float, b: np.ndarray | float) -> np.ndarray | float:
    """
    ``log Gamma(a) - log Gamma(b)`` for positive arguments.

    Raises:
        DomainError: On a non-positive argument.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("log_gamma_ratio requires positive arguments.")
    out = gammaln(a) - gammaln(b)
    return as_output(out)


def _debye_integrand(t: float) -> float:
    if t == 0.0:
        return 1.0
    return t / math.expm1(t)


def debye1(theta: float) -> float:
    """
    Debye function of order one, D_1(theta) = (1/theta) int_0^theta t/(e^t-1) dt.

    Args:
        theta: Positive argument.

    Returns:
        float: D_1(theta) in (0, 1).

    Raises:
        DomainError: If ``theta <= 0``.
        ConvergenceError: If the quadrature does not reach its tolerance.
    """
    if not theta > 0:
        raise DomainError(f"debye1 requires theta > 0, got {theta}.")
    if theta < DEBYE_SERIES_THRESHOLD:
        return 1.0 - theta / 4.0 + theta**2 / 36.0 - theta**4 / 3600.0 + theta**6 / 211680.0
    value, abserr = integrate.quad(
        _debye_integrand, 0.0, theta, epsabs=1e-14, epsrel=1e-13, limit=200
    )
    if abserr > 1e-11 * max(1.0, value):
        raise ConvergenceError(
            "Debye quadrature did not converge.", {"theta": theta, "abserr": abserr}
        )
    return value / theta


def _log_bessel_k_uniform(nu: np.ndarray, t: np.ndarray) -> np.ndarray:
    # uniform asymptotic expansion of K_nu(nu z) for large order
    z = t / nu
    root = np.sqrt(1.0 + z * z)
    eta = root + np.log(z / (1.0 + root))
    p = 1.0 / root
    u1 = (3.0 * p - 5.0 * p**3) / 24.0
    u2 = (81.0 * p**2 - 462.0 * p**4 + 385.0 * p**6) / 1152.0
    series = 1.0 - u1 / nu + u2 / nu**2
    return 0.5 * np.log(np.pi / (2.0 * nu)) - nu * eta - 0.5 * np.log(root) + np.log(series)


def _log_bessel_k_small(nu: np.ndarray, t: np.ndarray) -> np.ndarray:
    # t^nu K_nu(t) -> 2^(nu-1) Gamma(nu) as t -> 0 for nu > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        leading = gammaln(nu) + (nu - 1.0) * LOG2 - nu * np.log(t)
        order_zero = np.log(-np.log(t / 2.0) - np.euler_gamma)
    return np.where(nu > 0, leading, order_zero)


def log_bessel_k(nu: np.ndarray | float, t: np.ndarray | float) -> np.ndarray | float:
    """
    Logarithm of the modified Bessel function of the third kind, log K_nu(t).

    Exponentially scaled ``kve`` does the work; where it overflows (tiny
    ``t`` and large order) the small-argument limit or the uniform
    asymptotic expansion takes over. K is even in ``nu``.

    Args:
        nu: Order, any real.
        t: Positive argument.

    Returns:
        The logarithm of K_nu(t), broadcast over the inputs.

    Raises:
        DomainError: If any ``t <= 0``.
    """
    nu, t = np.broadcast_arrays(
        np.abs(np.asarray(nu, dtype=float)), np.asarray(t, dtype=float)
    )
    if np.any(~(t > 0)):
        raise DomainError("log_bessel_k requires t > 0.")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        scaled = kve(nu, t)
        out = np.log(scaled) - t
    bad = ~np.isfinite(out) | (scaled == 0)
    if np.any(bad):
        nu_bad, t_bad = nu[bad], t[bad]
        with np.errstate(divide="ignore", invalid="ignore"):
            fallback = np.where(
                nu_bad >= BESSEL_UNIFORM_MIN_ORDER,
                _log_bessel_k_uniform(np.maximum(nu_bad, 1.0), t_bad),
                _log_bessel_k_small(nu_bad, t_bad),
            )
        out = np.array(out, dtype=float)
        out[bad] = fallback
    return as_output(out)
