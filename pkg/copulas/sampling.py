"""
Random generation from Archimedean copulas through their frailty
(mixing) distributions: U_j = psi(E_j / V) with V ~ F, E_j ~ Exp(1).
"""

import logging
import math
from typing import Protocol

import numpy as np
from scipy.special import gammaln
from scipy.stats import geninvgauss

from copulas.families import FamilyId, check_theta
from copulas.multiparam import GigParams, OuterPowerClaytonParams
from core.exceptions import DomainError, NumericalError

logger = logging.getLogger(__name__)

SIBUYA_MAX = 1e300


class RandomStream:
    """
    A reproducible stream of random numbers identified by ``(seed, stream_id)``.

    Streams with the same seed and different ids are independent: the id is
    the spawn key of a ``numpy.random.SeedSequence``.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = ()):
        if int(seed) != seed or seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {seed}.")
        key = (int(stream_id),) if isinstance(stream_id, (int, np.integer)) else tuple(
            int(i) for i in stream_id
        )
        if any(i < 0 for i in key):
            raise DomainError(f"stream ids must be non-negative, got {key}.")
        self.seed = int(seed)
        self.stream_id = key
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key))
        )

    def substream(self, index: int) -> "RandomStream":
        """Independent child stream with id ``stream_id + (index,)``."""
        return RandomStream(self.seed, self.stream_id + (int(index),))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def _positive_stable(alpha: float, gen: np.random.Generator, size: int | None) -> np.ndarray:
    # Kanter's representation of S(alpha, 1) with Laplace transform exp(-t^alpha)
    if alpha == 1.0:
        return np.ones(() if size is None else size)
    u = np.pi * gen.random(size)
    u = np.where(u == 0.0, np.pi / 2.0, u)
    e = gen.standard_exponential(size)
    log_s = (
        np.log(np.sin(alpha * u))
        - np.log(np.sin(u)) / alpha
        + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e))
    )
    return np.exp(log_s)


def _sibuya_log_survival(k: np.ndarray, alpha: float) -> np.ndarray:
    # log P(V > k) = log Gamma(k+1-alpha) - log Gamma(k+1) - log Gamma(1-alpha)
    return gammaln(k + 1.0 - alpha) - gammaln(k + 1.0) - gammaln(1.0 - alpha)


def _sibuya(alpha: float, gen: np.random.Generator, size: int | None) -> np.ndarray:
    """Sibuya(alpha) by inversion: V = min{k : P(V > k) < W}."""
    if alpha == 1.0:
        return np.ones(() if size is None else size)
    log_w = np.log(gen.random(size))
    log_w = np.atleast_1d(log_w)
    lo = np.zeros_like(log_w)
    hi = np.ones_like(log_w)
    grow = _sibuya_log_survival(hi, alpha) >= log_w
    while np.any(grow):
        hi[grow] *= 2.0
        if np.any(hi > SIBUYA_MAX):
            raise NumericalError("Sibuya draw exceeds the float range.", {"alpha": alpha})
        grow = _sibuya_log_survival(hi, alpha) >= log_w
    # invariant: S(lo) >= W > S(hi)
    while True:
        mid = np.floor((lo + hi) / 2.0)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        below = _sibuya_log_survival(mid, alpha) >= log_w
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    return hi if size is not None else hi.reshape(())


def sample_frailty(
    family: "FamilyId | str", theta: float, rng: RandomStream, size: int | None = None
) -> np.ndarray | float:
    """
    Draw from the frailty distribution F of a one-parameter family.

    AMH: Geo(1 - theta); Clayton: Gamma(1/theta, 1); Frank: Log(1 - e^-theta);
    Gumbel: positive stable S(1/theta, 1) (1 for theta = 1); Joe: Sibuya(1/theta).

    Args:
        family: Family tag.
        theta: Parameter in the family domain.
        rng: Random stream the draws are taken from.
        size: Number of draws; ``None`` for a single float.

    Raises:
        DomainError: If ``theta`` is outside the domain.
    """
    fam, theta = check_theta(family, theta)
    gen = rng.generator
    if fam is FamilyId.AMH:
        draws = gen.geometric(1.0 - theta, size) if theta > 0 else np.ones(size or ())
    elif fam is FamilyId.CLAYTON:
        draws = gen.gamma(1.0 / theta, 1.0, size)
    elif fam is FamilyId.FRANK:
        p = min(-math.expm1(-theta), np.nextafter(1.0, 0.0))
        draws = gen.logseries(p, size)
    elif fam is FamilyId.GUMBEL:
        draws = _positive_stable(1.0 / theta, gen, size)
    else:
        draws = _sibuya(1.0 / theta, gen, size)
    draws = np.asarray(draws, dtype=float)
    return float(draws) if size is None else draws


def sample_op_frailty(
    p: OuterPowerClaytonParams, rng: RandomStream, size: int | None = None
) -> np.ndarray | float:
    """Outer-power Clayton frailty S * V^beta, S ~ S(1/beta, 1), V ~ Gamma(1/theta, 1)."""
    gen = rng.generator
    v = gen.gamma(1.0 / p.theta, 1.0, size)
    draws = np.asarray(_positive_stable(1.0 / p.beta, gen, size) * v**p.beta, dtype=float)
    return float(draws) if size is None else draws


def sample_gig_frailty(
    p: GigParams, rng: RandomStream, size: int | None = None
) -> np.ndarray | float:
    """
    GIG frailty V = X/2 with X ~ GIG(nu, 1, theta^2).

    X = theta * Y with Y following scipy's two-parameter ``geninvgauss(nu, theta)``,
    drawn by its ratio-of-uniforms rejection sampler.
    """
    draws = geninvgauss.rvs(p.nu, p.theta, scale=p.theta, size=size, random_state=rng.generator)
    draws = np.asarray(draws, dtype=float) / 2.0
    return float(draws) if size is None else draws


class FrailtyModel(Protocol):
    def psi(self, t: np.ndarray) -> np.ndarray: ...

    def sample_frailty(self, rng: RandomStream, size: int) -> np.ndarray: ...


def sample_copula(model: FrailtyModel, n: int, d: int, rng: RandomStream) -> np.ndarray:
    """
    Sample ``n`` rows of a ``d``-dimensional Archimedean copula.

    Each row uses one frailty draw V and d unit exponentials E_j, giving
    U_j = psi(E_j / V). Entries are clipped into the open unit interval.

    Args:
        model: Anything exposing ``psi`` and ``sample_frailty``, normally a
            ``copulas.registry.CopulaModel``.
        n: Number of rows, at least 1.
        d: Dimension, at least 1.
        rng: Random stream.

    Returns:
        np.ndarray: The n x d sample.
    """
    if int(n) != n or n < 1 or int(d) != d or d < 1:
        raise DomainError(f"n and d must be positive integers, got n={n}, d={d}.")
    gen = rng.generator
    v = np.asarray(model.sample_frailty(rng, int(n)), dtype=float)
    e = gen.standard_exponential((int(n), int(d)))
    u = np.asarray(model.psi(e / v[:, None]), dtype=float).reshape(int(n), int(d))
    return np.clip(u, np.finfo(float).tiny, np.nextafter(1.0, 0.0))
