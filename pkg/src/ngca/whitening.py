"""Centering and covariance whitening."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .validation import as_float_matrix

# Relative eigenvalue cutoff below which the covariance counts as singular.
SINGULAR_TOL = 1e-12


class Whitener(BaseEstimator, TransformerMixin):
    """Center the data and map it to unit empirical covariance.

    The map is the symmetric inverse square root of the empirical covariance
    (1/n convention, computed after subtracting the empirical mean), so for
    the training data the transformed rows y_i = W (x_i - mean) satisfy
    (1/n) sum_i y_i y_i^T = I up to round-off.

    Attributes
    ----------
    mean_ : ndarray of shape (d,)
        Empirical mean of the training data.
    covariance_ : ndarray of shape (d, d)
        Empirical covariance with the 1/n normalization.
    whitener_ : ndarray of shape (d, d)
        Symmetric positive definite matrix W = covariance^{-1/2}.
    """

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        n, d = X.shape
        if n <= d:
            raise ValueError(
                f"whitening needs more samples than dimensions, got n={n}, d={d}"
            )
        mean = X.mean(axis=0)
        centered = X - mean
        cov = centered.T @ centered / n
        cov = (cov + cov.T) / 2.0
        vals, vecs = np.linalg.eigh(cov)
        if vals[-1] <= 0.0 or vals[0] < SINGULAR_TOL * vals[-1]:
            raise ValueError(
                "covariance is numerically singular: smallest eigenvalue "
                f"{vals[0]:.6e} is below {SINGULAR_TOL:g} of the largest ({vals[-1]:.6e})"
            )
        W = (vecs * vals**-0.5) @ vecs.T
        self.mean_ = mean
        self.covariance_ = cov
        self.whitener_ = (W + W.T) / 2.0
        self.n_features_in_ = d
        return self

    def transform(self, X):
        if not hasattr(self, "whitener_"):
            raise NotFittedError("Whitener is not fitted yet; call fit first")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return (X - self.mean_) @ self.whitener_
