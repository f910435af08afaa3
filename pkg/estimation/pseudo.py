"""
Rank based quantities computed from a data matrix: pseudo-observations,
sample versions of Kendall's tau and the explicit Gumbel diagonal estimator.
"""

import logging
import math
from itertools import combinations

import numpy as np
from scipy.stats import kendalltau, rankdata
from sklearn.utils import check_array

from copulas.sampling import RandomStream
from core.exceptions import DimensionError, DomainError

logger = logging.getLogger(__name__)

# above this dimension the default tau estimate comes from the diagonal estimator
PAIRWISE_TAU_MAX_DIM = 20


def as_matrix(x: np.ndarray, min_samples: int = 1, min_features: int = 1) -> np.ndarray:
    """
    Validate a data matrix with scikit-learn's ``check_array``.

    Raises:
        DimensionError: On a wrong shape, too few rows or columns, or
            non-finite entries.
    """
    try:
        return check_array(
            x,
            dtype=np.float64,
            ensure_min_samples=min_samples,
            ensure_min_features=min_features,
        )
    except ValueError as exc:
        raise DimensionError(f"Invalid data matrix: {exc}")


def pseudo_observations(x: np.ndarray) -> np.ndarray:
    """
    Componentwise ranks scaled by 1/(n+1).

    Ties get their average rank.

    Args:
        x: The n x d data matrix, n >= 2.

    Returns:
        np.ndarray: The n x d matrix of pseudo-observations, strictly inside (0, 1).

    Raises:
        DimensionError: If ``x`` is not a finite matrix with at least two rows.
        DomainError: If a column is constant.
    """
    arr = as_matrix(x, min_samples=2)
    constant = np.flatnonzero(np.ptp(arr, axis=0) == 0)
    if constant.size:
        raise DomainError(
            f"column(s) {constant.tolist()} are constant; ranks are undefined.",
            {"columns": constant.tolist()},
        )
    n = arr.shape[0]
    return rankdata(arr, method="average", axis=0) / (n + 1.0)


def pairwise_tau_hat(
    u: np.ndarray, max_pairs: int | None = None, rng: RandomStream | None = None
) -> float:
    """
    Mean of the sample Kendall's taus over column pairs.

    Args:
        u: The n x d data or pseudo-observation matrix, d >= 2.
        max_pairs: If given and smaller than d(d-1)/2, average over this many
            pairs drawn without replacement from ``rng``.
        rng: Random stream for the pair sub-selection.

    Returns:
        float: The averaged sample tau.
    """
    arr = as_matrix(u, min_samples=2, min_features=2)
    pairs = list(combinations(range(arr.shape[1]), 2))
    if max_pairs is not None and max_pairs < len(pairs):
        if max_pairs < 1:
            raise DomainError(f"max_pairs must be positive, got {max_pairs}.")
        if rng is None:
            raise DomainError("a random stream is needed to sub-select column pairs.")
        chosen = rng.generator.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in np.sort(chosen)]
    taus = [kendalltau(arr[:, i], arr[:, j]).statistic for i, j in pairs]
    value = float(np.mean(taus))
    if not math.isfinite(value):
        raise DomainError("sample Kendall's tau is undefined for constant columns.")
    return value


def gumbel_diag_mle(u: np.ndarray) -> float:
    """
    Explicit diagonal maximum-likelihood estimator of the Gumbel parameter,
    log d / (log n - log sum_i -log max_j u_ij), floored at 1.

    Args:
        u: The n x d pseudo-observation matrix, d >= 2.
    """
    arr = as_matrix(u, min_features=2)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError("the diagonal estimator needs entries strictly inside (0, 1).")
    n, d = arr.shape
    total = float(np.sum(-np.log(np.max(arr, axis=1))))
    denominator = math.log(n) - math.log(total)
    if denominator <= 0:
        return 1.0
    return max(1.0, math.log(d) / denominator)


def tau_hat(u: np.ndarray, method: str = "auto") -> float:
    """
    Kendall's tau estimate used to center initial intervals.

    Args:
        u: The n x d pseudo-observation matrix.
        method: ``"pairwise"``, ``"diag"`` (the Gumbel diagonal estimator
            mapped through (theta - 1)/theta) or ``"auto"``, pairwise up to
            d = 20 and diagonal above.
    """
    if method not in ("auto", "pairwise", "diag"):
        raise DomainError(f"unknown tau estimate {method!r}.")
    d = np.shape(u)[1] if np.ndim(u) == 2 else 0
    if method == "auto":
        method = "pairwise" if d <= PAIRWISE_TAU_MAX_DIM else "diag"
    if method == "pairwise":
        return pairwise_tau_hat(u)
    theta = gumbel_diag_mle(u)
    logger.debug("tau estimate from the diagonal estimator, theta=%s", theta)
    return (theta - 1.0) / theta
