"""Subspace comparison metrics and the PCA baseline.

Both metrics are functions of the spans only: they are invariant to the
choice of orthonormal basis on either side.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .subspace import ORIGINAL, Subspace, top_eigenspace
from .validation import as_float_matrix


def _check_pair(estimate: Subspace, reference: Subspace, same_dim: bool) -> None:
    if estimate.frame != reference.frame:
        raise ValueError(
            "cannot compare subspaces in different frames: "
            f"{estimate.frame!r} vs {reference.frame!r}"
        )
    if estimate.d_x != reference.d_x:
        raise ValueError(
            f"ambient dimensions differ: {estimate.d_x} vs {reference.d_x}"
        )
    if same_dim and estimate.d_s != reference.d_s:
        raise ValueError(
            f"subspace dimensions differ: {estimate.d_s} vs {reference.d_s}"
        )


def subspace_error(estimate: Subspace, reference: Subspace) -> float:
    """Mean squared projection residual of the estimated basis.

    E = 1 - trace(B^T P B) / d_s, where B is the estimated basis and P the
    orthogonal projector onto the reference span. Ranges from 0 (equal
    spans) to 1 (orthogonal spans).
    """
    _check_pair(estimate, reference, same_dim=False)
    B = estimate.basis
    overlap = reference.basis.T @ B
    value = 1.0 - float(np.sum(overlap * overlap)) / estimate.d_s
    return float(np.clip(value, 0.0, 1.0))


def subspace_distance(estimate: Subspace, reference: Subspace) -> float:
    """Smallest Frobenius distance between orthonormal bases of the spans.

    D = min ||B1 Q1 - B2 Q2||_F over orthogonal Q1, Q2, which has the closed
    form sqrt(2 d_s - 2 sum_i s_i) with s_i the singular values of
    B1^T B2 (clipped to [0, 1] against round-off).
    """
    _check_pair(estimate, reference, same_dim=True)
    svals = np.linalg.svd(estimate.basis.T @ reference.basis, compute_uv=False)
    svals = np.clip(svals, 0.0, 1.0)
    inner = max(2.0 * estimate.d_s - 2.0 * float(svals.sum()), 0.0)
    return float(np.sqrt(inner))


class PCABaseline(BaseEstimator, TransformerMixin):
    """Leading principal subspace of the centered covariance.

    Serves as the Gaussian-blind reference point: it picks directions by
    variance alone, so it cannot separate a non-Gaussian signal whose
    variance matches the background.

    Attributes
    ----------
    subspace_ : Subspace
        Original-frame span of the top eigenvectors, flagged as degenerate
        when the eigen-gap at the cut is numerically unresolved (for
        example isotropic data).
    components_ : ndarray of shape (n_components, d)
    eigenvalues_ : ndarray of shape (d,)
        Covariance eigenvalues, descending.
    """

    def __init__(self, n_components: int = 2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        n, d = X.shape
        if n < 2:
            raise ValueError(f"need at least 2 samples, got {n}")
        if not 1 <= self.n_components <= d:
            raise ValueError(
                f"n_components must be in [1, {d}], got {self.n_components}"
            )
        mean = X.mean(axis=0)
        centered = X - mean
        cov = centered.T @ centered / n
        subspace, eigenvalues = top_eigenspace(
            (cov + cov.T) / 2.0, self.n_components, frame=ORIGINAL
        )
        self.mean_ = mean
        self.eigenvalues_ = eigenvalues
        self.degenerate_gap_ = subspace.degenerate_gap
        self.subspace_ = subspace
        self.components_ = subspace.basis.T
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "subspace_"):
            raise NotFittedError("PCABaseline is not fitted yet; call fit first")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return (X - self.mean_) @ self.components_.T
