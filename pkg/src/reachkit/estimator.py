"""scikit-learn style wrapper around a single reach set."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .boundary import contains
from .size import diameter, volume
from .support import support_box
from .validation import build_spec, check_rows


class IntegratorReachSet(TransformerMixin, BaseEstimator):
    """Reach set of an integrator system with box-valued inputs.

    ``fit`` validates the parameters and caches volume and diameter.
    ``transform`` maps direction vectors to support values, and ``predict``
    labels states as ``"inside"``, ``"boundary"`` or ``"outside"``.
    """

    def __init__(self, r=(2,), alpha=None, beta=None, x0=None, t=1.0, tol=1e-9):
        self.r = r
        self.alpha = alpha
        self.beta = beta
        self.x0 = x0
        self.t = t
        self.tol = tol

    def fit(self, X=None, y=None):
        self.spec_ = build_spec(self.r, self.alpha, self.beta, self.x0, self.t)
        self.n_features_in_ = self.spec_.d
        if X is not None:
            check_rows(X, self.spec_.d)
        self.volume_ = volume(self.spec_)
        dia = diameter(self.spec_)
        self.diameter_ = dia.value
        self.diameter_direction_ = dia.direction
        return self

    def transform(self, X):
        """Support values ``h(y)`` for the rows of ``X``, shape ``(n, 1)``."""
        check_is_fitted(self, "spec_")
        Y = check_rows(X, self.spec_.d)
        return np.array([[support_box(self.spec_, y, argmax=False).value] for y in Y])

    def support_points(self, X):
        """States attaining the support value in each row direction."""
        check_is_fitted(self, "spec_")
        Y = check_rows(X, self.spec_.d)
        return np.array([support_box(self.spec_, y).argmax_state for y in Y])

    def predict(self, X):
        check_is_fitted(self, "spec_")
        X = check_rows(X, self.spec_.d)
        return np.array([contains(self.spec_, x, tol=self.tol) for x in X])
