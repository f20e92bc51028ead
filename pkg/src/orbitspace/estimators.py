"""scikit-learn compatible wrappers.

Rows of ``X`` are flattened configurations ``V.ravel()`` of length ``k * m``
or packed Gram matrices of length ``k (k + 1) / 2``.  The transformers are
stateless; ``fit`` only validates the shapes and records ``n_features_in_``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import linalg, measure, reduction
from .exceptions import DimensionMismatch, NotCoregular, NotInImage


class _OrbitBase(TransformerMixin, BaseEstimator):
    def __init__(self, k=1, m=1, tol=linalg.DEFAULT_TOL):
        self.k = k
        self.m = m
        self.tol = tol

    def _check_params(self):
        if self.k < 1 or self.m < 1:
            raise DimensionMismatch("k and m must be positive", k=self.k, m=self.m)
        if self.k > self.m:
            raise NotCoregular(f"k={self.k} > m={self.m}", k=self.k, m=self.m)

    def _check_width(self, X, width):
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != width:
            raise DimensionMismatch(f"expected {width} features, got {X.shape[1]}",
                                    k=self.k, m=self.m)
        return X

    def fit(self, X, y=None):
        self._check_params()
        X = self._check_width(X, self._input_width())
        self.n_features_in_ = X.shape[1]
        return self

    def _input_width(self):
        return self.k * self.m

    def _vectors(self, X):
        check_is_fitted(self, "n_features_in_")
        X = self._check_width(X, self.k * self.m)
        return X.reshape(-1, self.k, self.m)


class HilbertEmbedding(_OrbitBase):
    """Map configurations to the packed lower triangle of their Gram matrix.

    ``inverse_transform`` returns one representative per orbit (the lifted
    lower-triangular configuration).
    """

    def transform(self, X):
        G = linalg.gram(self._vectors(X))
        rows, cols = np.tril_indices(self.k)
        return G[:, rows, cols]

    def inverse_transform(self, U):
        check_is_fitted(self, "n_features_in_")
        U = self._check_width(U, linalg.n_packed(self.k))
        return np.stack([linalg.lift(linalg.unpack_lower(u), self.m, self.tol).ravel() for u in U])


class FundamentalDomainReducer(_OrbitBase):
    """Rotate each configuration into the fundamental domain.

    Output rows are the packed lower-triangular factor ``W``.
    """

    def transform(self, X):
        return np.stack([linalg.pack_lower(reduction.reduce(V).W) for V in self._vectors(X)])

    def inverse_transform(self, Wp):
        check_is_fitted(self, "n_features_in_")
        Wp = self._check_width(Wp, linalg.n_packed(self.k))
        return np.stack([linalg.embed_rows(np.tril(linalg.unpack_lower(w)), self.m).ravel()
                         for w in Wp])


class HilbertMeasure(_OrbitBase):
    """Log-density of the pushed-forward Lebesgue measure at packed Gram rows."""

    def _input_width(self):
        return linalg.n_packed(self.k)

    def transform(self, U):
        return self.score_samples(U)[:, None]

    def score_samples(self, U):
        check_is_fitted(self, "n_features_in_")
        U = self._check_width(U, linalg.n_packed(self.k))
        out = np.empty(len(U))
        for n, u in enumerate(U):
            try:
                out[n] = measure.hilbert_density(u, self.k, self.m, self.tol).log_value
            except NotInImage:
                out[n] = -np.inf
        return out
