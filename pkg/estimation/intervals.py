"""
Initial search regions for the maximum-likelihood optimizers.

All regions are built in "distance in concordance": a band of Kendall's
tau around an estimate is mapped back to parameter space. One-parameter
families get an interval, outer-power Clayton and GIG a box whose corners
are obtained from one-dimensional tau inversions.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from copulas import families
from copulas.families import TAU_RANGES
from copulas.multiparam import (
    gig_nu_for_tau,
    gig_theta_for_tau,
    op_beta_for_tau,
    op_theta_for_tau,
)
from copulas.registry import ModelId, as_model_id
from core.exceptions import DomainError, RangeError, UnsupportedFamilyError

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.005
DEFAULT_H = 0.1
GIG_NU_FLOOR = 0.0

# (h_minus, h_plus) of the two-parameter boxes
DEFAULT_BOX_WIDTHS: dict[ModelId, tuple[float, float]] = {
    ModelId.OPCLAYTON: (0.4, 0.0),
    ModelId.GIG: (0.15, 0.15),
}


@dataclass(frozen=True)
class InitialBox:
    """
    Axis-aligned search region in parameter space.

    ``lower`` and ``upper`` follow the family's parameter order. For
    two-parameter families ``anchors`` holds the three corners produced by
    the tau inversions; they are used as optimizer restarts.
    """

    family: ModelId
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    tau_hat: float | None
    h_minus: float | None
    h_plus: float | None
    epsilon: float
    widened: bool = False
    anchors: tuple[tuple[float, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper) or not all(
            lo < hi for lo, hi in zip(self.lower, self.upper)
        ):
            raise RangeError(
                "initial region is empty.", {"lower": list(self.lower), "upper": list(self.upper)}
            )

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lower) + np.asarray(self.upper)) / 2.0

    @property
    def width(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def to_unit(self, params: np.ndarray) -> np.ndarray:
        return (np.asarray(params, dtype=float) - np.asarray(self.lower)) / self.width

    def from_unit(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.lower) + np.clip(np.asarray(z, dtype=float), 0.0, 1.0) * self.width

    def contains(self, params: np.ndarray | tuple[float, ...] | float) -> bool:
        x = np.atleast_1d(np.asarray(params, dtype=float))
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def as_dict(self) -> dict:
        names = self.family.param_names
        return {
            "lower": dict(zip(names, self.lower)),
            "upper": dict(zip(names, self.upper)),
            "tau_hat": self.tau_hat,
            "h_minus": self.h_minus,
            "h_plus": self.h_plus,
            "epsilon": self.epsilon,
            "widened": self.widened,
        }


def _check_width(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}.")
    return value


def _one_param_family(family: "ModelId | str") -> families.FamilyId:
    model_id = as_model_id(family)
    if model_id.n_params != 1:
        raise UnsupportedFamilyError(f"{model_id.value} is not a one-parameter family.")
    return families.FamilyId(model_id.value)


def _tau_band(
    tau_lo: float, tau_hi: float, floor: float, ceiling: float, epsilon: float
) -> tuple[float, float, bool]:
    widened = False
    if tau_hi - tau_lo < epsilon:
        logger.warning(
            "tau band [%s, %s] is thinner than epsilon=%s, widening.", tau_lo, tau_hi, epsilon
        )
        tau_lo, tau_hi = max(tau_lo - epsilon, floor), min(tau_hi + epsilon, ceiling)
        widened = True
    if not tau_lo < tau_hi:
        raise RangeError(
            "no attainable tau band for the initial region.",
            {"tau_lo": tau_lo, "tau_hi": tau_hi},
        )
    return tau_lo, tau_hi, widened


def initial_interval_1p(
    family: "ModelId | str",
    tau_hat: float,
    h: float = DEFAULT_H,
    epsilon: float = DEFAULT_EPSILON,
    clamp: bool = True,
) -> InitialBox:
    """
    Interval [tau^-1(max(tau_hat - h, tau_l)), tau^-1(min(tau_hat + h, tau_u))].

    The tau bounds are truncated by ``epsilon`` wherever the family does not
    attain them (the independence end of Gumbel and Joe is attained and kept).

    Args:
        family: One-parameter family tag.
        tau_hat: Kendall's tau estimate.
        h: Half width in tau, in [0, 1].
        epsilon: Truncation of unattained tau bounds, also the minimal band width.
        clamp: Move ``tau_hat`` into the attainable range first; if False an
            unattainable estimate raises.

    Returns:
        InitialBox: A one-dimensional region.

    Raises:
        RangeError: If the interval is empty.
    """
    fam = _one_param_family(family)
    h = _check_width("h", h)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}.")
    tau_l, tau_u, lower_attained = TAU_RANGES[fam]
    floor = tau_l if lower_attained else tau_l + epsilon
    ceiling = tau_u - epsilon
    centre = float(tau_hat)
    if not floor <= centre <= ceiling:
        if not clamp:
            raise RangeError(
                f"tau_hat={centre} is outside the attainable range of {fam.value}.",
                {"family": fam.value, "tau_hat": centre, "range": [floor, ceiling]},
            )
        logger.warning(
            "tau_hat=%s clamped into [%s, %s] for %s.", centre, floor, ceiling, fam.value
        )
        centre = min(max(centre, floor), ceiling)
    tau_lo, tau_hi, widened = _tau_band(
        max(centre - h, floor), min(centre + h, ceiling), floor, ceiling, epsilon
    )
    lower = families.tau_inverse(fam, tau_lo)
    upper = families.tau_inverse(fam, tau_hi)
    return InitialBox(
        ModelId(fam.value), (lower,), (upper,), float(tau_hat), h, h, epsilon, widened
    )


def initial_interval_fixed(family: "ModelId | str", h1: float, h2: float) -> InitialBox:
    """
    Fixed interval [tau^-1(h1), tau^-1(h2)] independent of the data.

    Raises:
        RangeError: If h1 >= h2 or either is not attainable by the family.
    """
    fam = _one_param_family(family)
    if not h1 < h2:
        raise RangeError(f"need h1 < h2, got h1={h1}, h2={h2}.")
    lower = families.tau_inverse(fam, h1)
    upper = families.tau_inverse(fam, h2)
    return InitialBox(ModelId(fam.value), (lower,), (upper,), None, None, None, 0.0)


def _two_param_band(
    tau_hat: float, h_minus: float, h_plus: float, epsilon: float
) -> tuple[float, float, bool]:
    h_minus = _check_width("h_minus", h_minus)
    h_plus = _check_width("h_plus", h_plus)
    if not 0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon}.")
    tau_hi = min(tau_hat + h_plus, 1.0 - epsilon)
    tau_lo = max(tau_hat - h_minus, epsilon)
    if tau_hi <= epsilon or tau_lo >= 1.0 - epsilon:
        raise RangeError(
            f"tau_hat={tau_hat} leaves no feasible band after clamping.",
            {"tau_hat": tau_hat, "epsilon": epsilon},
        )
    return _tau_band(tau_lo, tau_hi, epsilon / 2.0, 1.0 - epsilon / 2.0, epsilon)


def initial_box_opc(
    tau_hat: float,
    h_minus: float = DEFAULT_BOX_WIDTHS[ModelId.OPCLAYTON][0],
    h_plus: float = DEFAULT_BOX_WIDTHS[ModelId.OPCLAYTON][1],
    epsilon: float = DEFAULT_EPSILON,
) -> InitialBox:
    """
    Box [(theta_l, 1), (theta_u, beta_u)] for outer-power Clayton.

    Kendall's tau increases in both parameters. With beta fixed at 1,
    theta_u and theta_l attain the upper and lower ends of the tau band;
    beta_u then lifts tau at theta_l back to the upper end.

    Args:
        tau_hat: Kendall's tau estimate.
        h_minus: Band width below ``tau_hat``.
        h_plus: Band width above ``tau_hat``.
        epsilon: Distance kept from tau = 0 and tau = 1.

    Returns:
        InitialBox: The (theta, beta) box with its three corners as anchors.

    Raises:
        RangeError: If the clamped band is empty.
    """
    tau_lo, tau_hi, widened = _two_param_band(float(tau_hat), h_minus, h_plus, epsilon)
    beta_l = 1.0
    theta_u = op_theta_for_tau(tau_hi, beta_l)
    theta_l = op_theta_for_tau(tau_lo, beta_l)
    beta_u = op_beta_for_tau(tau_hi, theta_l)
    logger.debug("opclayton box theta in [%s, %s], beta in [1, %s]", theta_l, theta_u, beta_u)
    return InitialBox(
        ModelId.OPCLAYTON,
        (theta_l, beta_l),
        (theta_u, beta_u),
        float(tau_hat),
        float(h_minus),
        float(h_plus),
        float(epsilon),
        widened,
        ((theta_u, beta_l), (theta_l, beta_l), (theta_l, beta_u)),
    )


def initial_box_gig(
    tau_hat: float,
    h_minus: float = DEFAULT_BOX_WIDTHS[ModelId.GIG][0],
    h_plus: float = DEFAULT_BOX_WIDTHS[ModelId.GIG][1],
    epsilon: float = DEFAULT_EPSILON,
) -> InitialBox:
    """
    Box [(0, theta_l), (nu_u, theta_u)] for the GIG family.

    Kendall's tau decreases in both parameters. With nu fixed at 0, theta_u
    attains the lower end of the tau band and theta_l the upper end; nu_u
    brings tau at theta_l down to the lower end.

    Raises:
        RangeError: If the band is empty or a tau inversion cannot be
            bracketed in floating point.
    """
    tau_lo, tau_hi, widened = _two_param_band(float(tau_hat), h_minus, h_plus, epsilon)
    nu_l = GIG_NU_FLOOR
    theta_u = gig_theta_for_tau(tau_lo, nu_l)
    theta_l = gig_theta_for_tau(tau_hi, nu_l)
    nu_u = gig_nu_for_tau(tau_lo, theta_l)
    if not (math.isfinite(theta_u) and nu_u > nu_l and theta_u > theta_l):
        raise RangeError(
            "GIG box corners are degenerate.",
            {"theta_l": theta_l, "theta_u": theta_u, "nu_u": nu_u},
        )
    logger.debug("gig box nu in [0, %s], theta in [%s, %s]", nu_u, theta_l, theta_u)
    return InitialBox(
        ModelId.GIG,
        (nu_l, theta_l),
        (nu_u, theta_u),
        float(tau_hat),
        float(h_minus),
        float(h_plus),
        float(epsilon),
        widened,
        ((nu_l, theta_u), (nu_l, theta_l), (nu_u, theta_l)),
    )


def initial_region(
    family: "ModelId | str",
    tau_hat: float,
    h: float | None = None,
    h_minus: float | None = None,
    h_plus: float | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> InitialBox:
    """
    Region for any supported family; unset widths take the family defaults.

    One-parameter families use ``h`` (default 0.1); the two-parameter ones
    ``h_minus``/``h_plus`` (outer-power Clayton 0.4/0, GIG 0.15/0.15).
    """
    model_id = as_model_id(family)
    if model_id.n_params == 1:
        return initial_interval_1p(model_id, tau_hat, DEFAULT_H if h is None else h, epsilon)
    default_minus, default_plus = DEFAULT_BOX_WIDTHS[model_id]
    h_minus = default_minus if h_minus is None else h_minus
    h_plus = default_plus if h_plus is None else h_plus
    if model_id is ModelId.OPCLAYTON:
        return initial_box_opc(tau_hat, h_minus, h_plus, epsilon)
    return initial_box_gig(tau_hat, h_minus, h_plus, epsilon)
