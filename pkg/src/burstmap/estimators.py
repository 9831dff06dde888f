"""scikit-learn style wrappers around the map and the attractor classifier.

``AdaptationMap`` is a transformer sending adaptation values w to
``[Phi(w), Phi'(w)]``; ``AttractorClassifier`` predicts the attracting
period for a column of v_reset values (0 for chaotic or undecided rows).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .adaptmap import fixed_point, phi_values, w_star
from .flow import DEFAULT_TOL
from .model import check_assumptions, landmarks
from .orbits import Kind, detect_attractor
from .validation import check_column, check_params, check_positive


class _ParamsMixin:
    def _params(self, v_reset=None):
        return check_params(self.family, self.a, self.b, self.I, self.d, self.eps,
                            self.v_reset if v_reset is None else v_reset)


class AdaptationMap(_ParamsMixin, TransformerMixin, BaseEstimator):
    def __init__(self, family="quartic", a=0.2, b=0.7, I=2.0, d=1.0, eps=0.4,  # noqa: E741
                 v_reset=1.3, tol=DEFAULT_TOL):
        self.family = family
        self.a = a
        self.b = b
        self.I = I
        self.d = d
        self.eps = eps
        self.v_reset = v_reset
        self.tol = tol

    def fit(self, X=None, y=None):
        params = self._params()
        check_positive("tol", self.tol)
        self.params_ = params
        self.landmarks_ = landmarks(params)
        self.assumptions_ = check_assumptions(params)
        self.fixed_point_ = fixed_point(params, self.tol)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        w = check_column(X)
        p, dp = phi_values(self.params_, w, self.tol)
        return np.column_stack([p, dp])

    def get_feature_names_out(self, input_features=None):
        return np.array(["phi", "dphi"], dtype=object)


class AttractorClassifier(_ParamsMixin, ClassifierMixin, BaseEstimator):
    """Attracting period of the critical orbit as a function of v_reset.

    ``fit`` only validates parameters; the mapping is fully determined by
    the model, so there is nothing to learn from ``y``.
    """

    def __init__(self, family="quartic", a=0.2, b=0.7, I=2.0, d=1.0, eps=0.4,  # noqa: E741
                 v_reset=1.3, transient_n=1000, sample_n=200, tol=1e-7, p_max=64,
                 map_tol=1e-8):
        self.family = family
        self.a = a
        self.b = b
        self.I = I
        self.d = d
        self.eps = eps
        self.v_reset = v_reset
        self.transient_n = transient_n
        self.sample_n = sample_n
        self.tol = tol
        self.p_max = p_max
        self.map_tol = map_tol

    def fit(self, X=None, y=None):
        self._params()
        check_positive("tol", self.tol)
        check_positive("map_tol", self.map_tol)
        self.n_features_in_ = 1
        self.classes_ = np.arange(self.p_max + 1)
        return self

    def predict(self, X):
        check_is_fitted(self, "classes_")
        out = []
        for v in check_column(X):
            p = self._params(v_reset=float(v))
            res = detect_attractor(p, w_star(p), self.transient_n, self.sample_n,
                                   self.tol, self.p_max, self.map_tol)
            out.append(res.period if res.kind in (Kind.PERIODIC, Kind.FIXED_POINT) else 0)
        return np.asarray(out, dtype=int)
