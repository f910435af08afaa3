import logging

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from copulas.registry import CopulaModel, ModelId, as_model_id
from core.exceptions import DomainError, UnsupportedFamilyError
from estimation.intervals import DEFAULT_EPSILON
from estimation.mle import FitResult, fit_copula, gumbel_diag_fit, log_likelihood
from estimation.pseudo import as_matrix, pseudo_observations, tau_hat

logger = logging.getLogger(__name__)


class ArchimedeanCopulaMLE(BaseEstimator):
    """
    Maximum-likelihood fit of an Archimedean copula with a scikit-learn
    estimator interface.

    Args:
        family: Family tag, one of the seven supported families.
        pseudo: Whether ``X`` already holds pseudo-observations; otherwise
            ranks are taken first.
        h: Tau half width of the one-parameter initial interval.
        h_minus: Lower tau width of a two-parameter box.
        h_plus: Upper tau width of a two-parameter box.
        epsilon: Distance kept from unattainable tau bounds.
        tau_method: ``"auto"``, ``"pairwise"`` or ``"diag"``.
        estimator: ``"mle"`` or ``"diag"`` (Gumbel only).
        polish: Score polish of one-parameter fits.
    """

    def __init__(
        self,
        family: str = "clayton",
        pseudo: bool = False,
        h: float | None = None,
        h_minus: float | None = None,
        h_plus: float | None = None,
        epsilon: float = DEFAULT_EPSILON,
        tau_method: str = "auto",
        estimator: str = "mle",
        polish: bool = True,
    ):
        self.family = family
        self.pseudo = pseudo
        self.h = h
        self.h_minus = h_minus
        self.h_plus = h_plus
        self.epsilon = epsilon
        self.tau_method = tau_method
        self.estimator = estimator
        self.polish = polish

    def _to_pseudo(self, X: np.ndarray) -> np.ndarray:
        if self.pseudo:
            return as_matrix(X, min_features=2)
        return pseudo_observations(X)

    def fit(self, X: np.ndarray, y: None = None) -> "ArchimedeanCopulaMLE":
        u = self._to_pseudo(X)
        model_id = as_model_id(self.family)
        if self.estimator == "diag":
            if model_id is not ModelId.GUMBEL:
                raise UnsupportedFamilyError("the diagonal estimator is defined for Gumbel only.")
            result = gumbel_diag_fit(u)
        elif self.estimator == "mle":
            self.tau_hat_ = tau_hat(u, self.tau_method)
            result = fit_copula(
                u, model_id, self.tau_hat_, self.h, self.h_minus, self.h_plus,
                self.epsilon, polish=self.polish,
            )
        else:
            raise DomainError(f"unknown estimator {self.estimator!r}.")
        self.pseudo_observations_ = u
        self.fit_result_: FitResult = result
        self.params_ = np.asarray(result.params)
        self.loglik_ = result.loglik
        self.n_features_in_ = u.shape[1]
        logger.info("fitted %s: %s", model_id.value, result.as_dict())
        return self

    @property
    def model_(self) -> CopulaModel:
        if not hasattr(self, "fit_result_"):
            raise NotFittedError("ArchimedeanCopulaMLE is not fitted yet.")
        return self.fit_result_.model

    def score(self, X: np.ndarray, y: None = None) -> float:
        """Mean log-density of ``X`` under the fitted copula."""
        model = self.model_
        u = self._to_pseudo(X)
        return log_likelihood(model, u) / u.shape[0]
