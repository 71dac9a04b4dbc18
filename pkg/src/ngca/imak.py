"""Iterative metric-adapted kernel estimation of the index space.

A single index function h(y) = sum_i alpha_i k(y, y_i) is fitted so that its
moment vector beta = (1/n) sum_i [ y_i h(y_i) - grad h(y_i) ] is as large as
possible relative to its fluctuation. With

    a_r   = e_r^T Y K - 1^T dK_r          (numerator rows)
    b_r   = diag(e_r^T Y) K - dK_r        (denominator rows)

where Y holds samples as columns, K is the kernel Gram matrix and dK_r the
matrix of kernel partials in coordinate r of the first argument, the squared
norm of beta and its fluctuation are quadratic forms in alpha:

    alpha^T F alpha = ||beta||^2,             F = (1/n^2) sum_r a_r^T a_r
    alpha^T (G + F) alpha
        = (1/n) sum_i ||y_i h(y_i) - grad h(y_i)||^2,
                                              G + F = (1/n) sum_r b_r^T b_r.

The best weights maximize the generalized Rayleigh quotient
alpha^T F alpha / alpha^T G alpha. The kernel metric M is then re-estimated
from the fitted beta vectors and the procedure repeats, sharpening the
kernel along the informative directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .subspace import WHITENED, pull_back, top_eigenspace
from .validation import as_float_matrix, as_float_vector, as_symmetric_matrix
from .whitening import Whitener

DEFAULT_SIGMA2_GRID = (0.5, 1.0, 2.0, 4.0)
DEFAULT_OUTER_ITERS = 10

# Weight-vector trace threshold under which the metric update is undefined.
VANISH_TOL = 1e-12


@dataclass(frozen=True)
class RadialKernel:
    """Gaussian kernel with a metric: k(u, v) = exp(-(u-v)^T M (u-v) / (2 s2)).

    Holds the sample Gram matrix and produces the partial-derivative
    matrices on demand; `partial(r)[i, j]` is the derivative of K[i, j] in
    the r-th coordinate of the first argument y_i.
    """

    samples: np.ndarray
    metric: np.ndarray
    scale2: float
    gram: np.ndarray
    metric_samples: np.ndarray  # samples @ metric, cached

    def partial(self, r: int) -> np.ndarray:
        m = self.metric_samples[:, r]
        return (m[None, :] - m[:, None]) * self.gram / self.scale2

    def cross_gram(self, points) -> np.ndarray:
        """Kernel values k(p, y_j) between new points (rows) and the samples."""
        P = as_float_matrix(points, "points")
        MP = P @ self.metric
        qp = np.einsum("ij,ij->i", P, MP)
        qs = np.einsum("ij,ij->i", self.samples, self.metric_samples)
        sq = qp[:, None] + qs[None, :] - 2.0 * (MP @ self.samples.T)
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-sq / (2.0 * self.scale2))


def build_kernel(Y, metric, scale2: float) -> RadialKernel:
    """Construct the metric kernel state for the given samples.

    The metric must be symmetric positive semidefinite and the squared scale
    positive. The Gram matrix is exactly symmetric with unit diagonal.
    """
    Y = as_float_matrix(Y, "Y")
    M = as_symmetric_matrix(metric, "metric")
    if M.shape[0] != Y.shape[1]:
        raise ValueError(
            f"metric shape {M.shape} does not match data dimension {Y.shape[1]}"
        )
    if scale2 <= 0:
        raise ValueError(f"scale2 must be positive, got {scale2}")
    eigs = np.linalg.eigvalsh(M)
    if eigs[0] < -1e-10 * max(1.0, eigs[-1]):
        raise ValueError(
            f"metric must be positive semidefinite, smallest eigenvalue {eigs[0]:.6e}"
        )
    MY = Y @ M
    q = np.einsum("ij,ij->i", Y, MY)
    sq = q[:, None] + q[None, :] - 2.0 * (MY @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    K = np.exp(-sq / (2.0 * scale2))
    K = (K + K.T) / 2.0
    np.fill_diagonal(K, 1.0)
    return RadialKernel(samples=Y, metric=M, scale2=float(scale2), gram=K, metric_samples=MY)


def criterion_matrices(kernel: RadialKernel):
    """Quadratic-form matrices (F, G) of the informativeness criterion.

    Returns symmetric (n, n) matrices such that for any weight vector alpha,
    alpha^T F alpha is the squared norm of the fitted moment vector and
    alpha^T G alpha is its fluctuation denominator.
    """
    Y = kernel.samples
    K = kernel.gram
    n, d = Y.shape
    F = np.zeros((n, n))
    GF = np.zeros((n, n))
    for r in range(d):
        dK = kernel.partial(r)
        col = Y[:, r]
        a = col @ K - dK.sum(axis=0)
        F += np.outer(a, a)
        B = col[:, None] * K - dK
        GF += B.T @ B
    F /= n * n
    GF /= n
    G = GF - F
    return (F + F.T) / 2.0, (G + G.T) / 2.0


def top_weight_vector(F, G):
    """Weights maximizing alpha^T F alpha / alpha^T G alpha.

    G is stabilized with a small ridge proportional to its mean eigenvalue;
    the returned weights are scaled so the denominator form equals one, and
    the achieved ratio is returned with them.
    """
    F = as_symmetric_matrix(F, "F")
    G = as_symmetric_matrix(G, "G")
    n = F.shape[0]
    if G.shape != F.shape:
        raise ValueError(f"F and G shapes differ: {F.shape} vs {G.shape}")
    ridge = 1e-10 * np.trace(G) / n
    G_reg = G + ridge * np.eye(n)
    vals, vecs = linalg.eigh(F, G_reg, subset_by_index=[n - 1, n - 1])
    ratio = float(vals[0])
    alpha = vecs[:, 0]
    scale = float(alpha @ G_reg @ alpha)
    if scale <= 0:
        raise ValueError("denominator form is not positive definite at the solution")
    alpha = alpha / np.sqrt(scale)
    return alpha, ratio


def index_values(kernel: RadialKernel, weights, points=None) -> np.ndarray:
    """h(p) = sum_j weights_j k(p, y_j) at the given points (default: samples)."""
    weights = as_float_vector(weights, "weights")
    C = kernel.gram if points is None else kernel.cross_gram(points)
    return C @ weights


def index_gradients(kernel: RadialKernel, weights, points=None) -> np.ndarray:
    """Gradient of h at the given points (rows), analytic form.

    grad h(p) = sum_j weights_j * (-M (p - y_j) / s2) * k(p, y_j).
    """
    weights = as_float_vector(weights, "weights")
    if points is None:
        C = kernel.gram
        MP = kernel.metric_samples
    else:
        P = as_float_matrix(points, "points")
        C = kernel.cross_gram(P)
        MP = P @ kernel.metric
    hv = C @ weights
    out = np.empty((C.shape[0], kernel.samples.shape[1]))
    MY = kernel.metric_samples
    for r in range(MY.shape[1]):
        out[:, r] = -(MP[:, r] * hv - C @ (weights * MY[:, r])) / kernel.scale2
    return out


def fitted_index_direction(kernel: RadialKernel, weights) -> np.ndarray:
    """Moment vector (1/n) sum_i [ y_i h(y_i) - grad h(y_i) ] of the fit."""
    Y = kernel.samples
    hv = index_values(kernel, weights)
    grads = index_gradients(kernel, weights)
    return (Y.T @ hv - grads.sum(axis=0)) / Y.shape[0]


class IMAK(BaseEstimator, TransformerMixin):
    """Iterative metric-adapted kernel index-space estimator.

    Deterministic given the data: the metric starts at the identity, and
    each outer iteration fits one weight vector per kernel scale, collects
    the resulting moment vectors, and re-estimates the metric from their
    scatter (rescaled to trace d). The final scatter's leading eigenspace is
    pulled back to the original frame.

    Parameters
    ----------
    n_components : int
        Dimension of the subspace to recover.
    sigma2_grid : sequence of float
        Squared kernel scales fitted in every outer iteration.
    n_iterations : int
        Number of outer metric updates.

    Attributes
    ----------
    subspace_ : Subspace
    components_ : ndarray of shape (n_components, d)
    metric_ : ndarray of shape (d, d)
        Final metric, trace d.
    criterion_values_ : ndarray of shape (n_iterations, len(sigma2_grid))
        Achieved Rayleigh ratios per iteration and scale.
    metric_fallback_ : bool
        True when some metric update was undefined because every moment
        vector vanished, in which case the identity metric was kept.
    """

    def __init__(
        self,
        n_components: int = 2,
        sigma2_grid=DEFAULT_SIGMA2_GRID,
        n_iterations: int = DEFAULT_OUTER_ITERS,
    ):
        self.n_components = n_components
        self.sigma2_grid = sigma2_grid
        self.n_iterations = n_iterations

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        d = X.shape[1]
        if not 1 <= self.n_components < d:
            raise ValueError(
                f"n_components must be in [1, {d - 1}] for d={d}, "
                f"got {self.n_components}"
            )
        grid = [float(s) for s in self.sigma2_grid]
        if not grid or any(s <= 0 for s in grid):
            raise ValueError("sigma2_grid must be a non-empty list of positive values")
        if self.n_iterations < 1:
            raise ValueError(f"n_iterations must be at least 1, got {self.n_iterations}")
        whitener = Whitener().fit(X)
        Y = whitener.transform(X)
        metric = np.eye(d)
        fallback = False
        ratios = np.empty((self.n_iterations, len(grid)))
        scatter = None
        for it in range(self.n_iterations):
            vectors = np.empty((len(grid), d))
            for gi, scale2 in enumerate(grid):
                kernel = build_kernel(Y, metric, scale2)
                F, G = criterion_matrices(kernel)
                weights, ratio = top_weight_vector(F, G)
                ratios[it, gi] = ratio
                vectors[gi] = fitted_index_direction(kernel, weights)
            scatter = vectors.T @ vectors
            scatter = (scatter + scatter.T) / 2.0
            trace = float(np.trace(scatter))
            if trace <= VANISH_TOL:
                metric = np.eye(d)
                fallback = True
            else:
                metric = scatter * (d / trace)
        whitened_subspace, eigenvalues = top_eigenspace(
            scatter, self.n_components, frame=WHITENED
        )
        subspace = pull_back(whitened_subspace, whitener.whitener_)
        self.whitener_ = whitener
        self.mean_ = whitener.mean_
        self.metric_ = metric
        self.criterion_values_ = ratios
        self.metric_fallback_ = fallback
        self.scatter_eigenvalues_ = eigenvalues
        self.degenerate_gap_ = subspace.degenerate_gap
        self.subspace_ = subspace
        self.components_ = subspace.basis.T
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "subspace_"):
            raise NotFittedError("IMAK is not fitted yet; call fit first")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return (X - self.mean_) @ self.components_.T
