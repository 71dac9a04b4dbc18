"""Non-Gaussian subspace recovery from estimated log-density gradients.

For whitened data the difference between the log-density gradient and the
standard normal score, nu(y) = g(y) + y, vanishes exactly on the Gaussian
directions and spans the non-Gaussian index space otherwise. The estimator
whitens the data, fits the gradient, forms the second-moment matrix of the
residuals nu_i, takes its leading eigenspace, and maps that space back to
the original data frame.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.exceptions import NotFittedError

from .gradients import LSLDG
from .subspace import WHITENED, pull_back, top_eigenspace
from .validation import as_float_matrix
from .whitening import Whitener


def score_residual_moment(Y, gradients) -> np.ndarray:
    """Second-moment matrix (1/n) sum_i nu_i nu_i^T of nu_i = g(y_i) + y_i.

    No mean is removed; for data that is exactly Gaussian and gradients that
    are exact, the matrix is identically zero.
    """
    Y = as_float_matrix(Y, "Y")
    G = as_float_matrix(gradients, "gradients")
    if G.shape != Y.shape:
        raise ValueError(
            f"gradients shape {G.shape} does not match data shape {Y.shape}"
        )
    nu = G + Y
    M = nu.T @ nu / Y.shape[0]
    return (M + M.T) / 2.0


class LSNGCA(BaseEstimator, TransformerMixin):
    """Least-squares non-Gaussian component analysis.

    Parameters
    ----------
    n_components : int
        Dimension of the non-Gaussian subspace to recover; must be smaller
        than the data dimension.
    score_estimator : estimator with fit/predict, optional
        Log-density gradient estimator applied to the whitened data. Cloned
        before fitting. Defaults to LSLDG seeded with `random_state`.
    random_state : int or None
        Seed for the default score estimator.

    Attributes
    ----------
    subspace_ : Subspace
        Estimated index space in the original data frame.
    components_ : ndarray of shape (n_components, d)
        Orthonormal basis rows of the estimated subspace.
    mean_ : ndarray of shape (d,)
        Training mean, subtracted before projecting in `transform`.
    residual_eigenvalues_ : ndarray of shape (d,)
        Eigenvalues of the score-residual moment matrix, descending.
    degenerate_gap_ : bool
        True when the eigen-gap at the cut was numerically unresolved.
    """

    def __init__(self, n_components: int = 2, score_estimator=None, random_state=None):
        self.n_components = n_components
        self.score_estimator = score_estimator
        self.random_state = random_state

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        d = X.shape[1]
        if not 1 <= self.n_components < d:
            raise ValueError(
                f"n_components must be in [1, {d - 1}] for d={d}, "
                f"got {self.n_components}"
            )
        whitener = Whitener().fit(X)
        Y = whitener.transform(X)
        if self.score_estimator is None:
            estimator = LSLDG(random_state=self.random_state)
        else:
            estimator = clone(self.score_estimator)
        estimator.fit(Y)
        gradients = estimator.predict(Y)
        moment = score_residual_moment(Y, gradients)
        whitened_subspace, eigenvalues = top_eigenspace(
            moment, self.n_components, frame=WHITENED
        )
        subspace = pull_back(whitened_subspace, whitener.whitener_)
        self.whitener_ = whitener
        self.score_estimator_ = estimator
        self.mean_ = whitener.mean_
        self.residual_eigenvalues_ = eigenvalues
        self.degenerate_gap_ = subspace.degenerate_gap
        self.subspace_ = subspace
        self.components_ = subspace.basis.T
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        """Coordinates of centered rows in the estimated subspace basis."""
        if not hasattr(self, "subspace_"):
            raise NotFittedError("LSNGCA is not fitted yet; call fit first")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return (X - self.mean_) @ self.components_.T
