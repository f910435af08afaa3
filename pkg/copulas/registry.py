"""
A single entry point over every supported Archimedean family, one- and
two-parameter alike. Estimation, inference and the commands work against
``CopulaModel`` and never branch on the family themselves.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from copulas import families, multiparam, sampling
from copulas.families import DOMAINS, FamilyId
from copulas.multiparam import GigParams, OuterPowerClaytonParams
from core.exceptions import DomainError, UnsupportedFamilyError

logger = logging.getLogger(__name__)


class ModelId(str, Enum):
    AMH = "amh"
    CLAYTON = "clayton"
    FRANK = "frank"
    GUMBEL = "gumbel"
    JOE = "joe"
    OPCLAYTON = "opclayton"
    GIG = "gig"

    @property
    def n_params(self) -> int:
        return 2 if self in (ModelId.OPCLAYTON, ModelId.GIG) else 1

    @property
    def param_names(self) -> tuple[str, ...]:
        if self is ModelId.OPCLAYTON:
            return ("theta", "beta")
        if self is ModelId.GIG:
            return ("nu", "theta")
        return ("theta",)


def as_model_id(family: "ModelId | FamilyId | str") -> ModelId:
    try:
        return ModelId(str(getattr(family, "value", family)).lower())
    except ValueError:
        raise UnsupportedFamilyError(f"Unsupported family: {family!r}.")


@dataclass(frozen=True)
class CopulaModel:
    """
    A family together with a parameter vector.

    ``params`` follows ``ModelId.param_names``: ``(theta,)`` for the
    one-parameter families, ``(theta, beta)`` for outer-power Clayton and
    ``(nu, theta)`` for GIG.
    """

    family: ModelId
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", as_model_id(self.family))
        values = tuple(float(v) for v in np.atleast_1d(np.asarray(self.params, dtype=float)))
        if len(values) != self.family.n_params:
            raise DomainError(
                f"{self.family.value} takes {self.family.n_params} parameter(s), got {len(values)}."
            )
        object.__setattr__(self, "params", values)
        # validate eagerly; each family raises DomainError on bad values
        self.family_params

    @classmethod
    def create(
        cls,
        family: "ModelId | FamilyId | str",
        theta: float | None = None,
        beta: float | None = None,
        nu: float | None = None,
    ) -> "CopulaModel":
        """Build a model from named parameters as they appear on the command line."""
        model_id = as_model_id(family)
        named = {"theta": theta, "beta": beta, "nu": nu}
        missing = [name for name in model_id.param_names if named[name] is None]
        if missing:
            raise DomainError(f"{model_id.value} requires {', '.join(missing)}.")
        return cls(model_id, tuple(named[name] for name in model_id.param_names))

    def with_params(self, params: np.ndarray | tuple[float, ...] | float) -> "CopulaModel":
        return CopulaModel(self.family, tuple(np.atleast_1d(np.asarray(params, dtype=float))))

    @property
    def one_param(self) -> bool:
        return self.family.n_params == 1

    @property
    def family_id(self) -> FamilyId:
        return FamilyId(self.family.value)

    @property
    def theta(self) -> float:
        return self.params[self.family.param_names.index("theta")]

    @property
    def family_params(self) -> Any:
        if self.family is ModelId.OPCLAYTON:
            return OuterPowerClaytonParams(*self.params)
        if self.family is ModelId.GIG:
            return GigParams(*self.params)
        families.check_theta(self.family.value, self.params[0])
        return self.params[0]

    @property
    def is_boundary(self) -> bool:
        return self.one_param and DOMAINS[self.family_id].is_boundary(self.params[0])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.family.param_names, self.params))

    def psi(self, t: np.ndarray | float) -> np.ndarray | float:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_psi(self.family_params, t)
        if self.family is ModelId.GIG:
            return multiparam.gig_psi(self.family_params, t)
        return families.psi(self.family_id, self.theta, t)

    def psi_inv(self, u: np.ndarray | float) -> np.ndarray | float:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_psi_inv(self.family_params, u)
        if self.family is ModelId.GIG:
            return multiparam.gig_psi_inv(self.family_params, u)
        return families.psi_inv(self.family_id, self.theta, u)

    def log_gen_deriv(self, d: int, t: np.ndarray | float) -> np.ndarray | float:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_log_gen_deriv(self.family_params, d, t)
        if self.family is ModelId.GIG:
            return multiparam.gig_log_gen_deriv(self.family_params, d, t)
        return families.log_gen_deriv(self.family_id, self.theta, d, t)

    def log_density_rows(self, u: np.ndarray) -> np.ndarray:
        """Row-wise log-density, non-finite values left in place."""
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_log_density_rows(self.family_params, u)
        if self.family is ModelId.GIG:
            return multiparam.gig_log_density_rows(self.family_params, u)
        return families.log_density_rows(self.family_id, self.theta, u)

    def log_density(self, u: np.ndarray) -> np.ndarray | float:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_log_density(self.family_params, u)
        if self.family is ModelId.GIG:
            return multiparam.gig_log_density(self.family_params, u)
        return families.log_density(self.family_id, self.theta, u)

    def tau(self) -> float:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_tau(self.family_params)
        if self.family is ModelId.GIG:
            return multiparam.gig_tau(self.family_params)
        return families.tau(self.family_id, self.theta)

    def tail_dependence(self) -> tuple[float, float]:
        if self.family is ModelId.OPCLAYTON:
            return multiparam.op_tail_dependence(self.family_params)
        if self.family is ModelId.GIG:
            return multiparam.gig_tail_dependence(self.family_params)
        return families.tail_dependence(self.family_id, self.theta)

    def sample_frailty(
        self, rng: sampling.RandomStream, size: int | None = None
    ) -> np.ndarray | float:
        if self.family is ModelId.OPCLAYTON:
            return sampling.sample_op_frailty(self.family_params, rng, size)
        if self.family is ModelId.GIG:
            return sampling.sample_gig_frailty(self.family_params, rng, size)
        return sampling.sample_frailty(self.family_id, self.theta, rng, size)

    def sample(self, n: int, d: int, rng: sampling.RandomStream) -> np.ndarray:
        return sampling.sample_copula(self, n, d, rng)


def contains(family: "ModelId | str", params: np.ndarray | tuple[float, ...]) -> bool:
    """True if ``params`` is a valid parameter vector of ``family``."""
    try:
        CopulaModel(as_model_id(family), tuple(np.atleast_1d(params)))
    except DomainError:
        return False
    return all(math.isfinite(float(v)) for v in np.atleast_1d(params))
