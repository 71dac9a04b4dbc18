"""Least-squares estimation of the log-density gradient.

Each coordinate j of the gradient g_j(y) = d/dy_j log p(y) is fitted
separately as a linear expansion over Gaussian-derivative basis functions

    psi_i(y) = (c_i^{(j)} - y^{(j)}) / sigma_j^2 * exp(-||y - c_i||^2 / (2 sigma_j^2)),

with centers c_i drawn from the sample. The coefficients minimize the
regularized empirical least-squares criterion, which reduces to the linear
solve theta_j = -(G_j + lambda_j I)^{-1} h_j with

    G_j = (1/n) sum_i psi(y_i) psi(y_i)^T,    h_j = (1/n) sum_i d_j psi(y_i).

The fit quality of a candidate g is scored by the objective

    J(g) = (1/n) sum_i [ g(y_i)^2 + 2 d_j g(y_i) ],

whose population version equals E[(g - g_j)^2] up to a constant, so smaller
is better. Widths and ridge strengths are chosen per coordinate by k-fold
cross-validation of this objective.
"""

from __future__ import annotations

import json

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .validation import as_float_matrix

MAX_CENTERS = 100

DEFAULT_SIGMA_GRID = tuple(np.logspace(-1.0, 1.0, 10))
DEFAULT_LAMBDA_GRID = tuple(np.logspace(-5.0, 1.0, 10))
DEFAULT_FOLDS = 5


def pairwise_sq_distances(A, B) -> np.ndarray:
    """Squared Euclidean distances between rows of A and rows of B.

    Uses the expanded form ||a||^2 - 2 a.b + ||b||^2 and clamps tiny negative
    round-off at zero.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (
        np.sum(A * A, axis=1)[:, None]
        - 2.0 * (A @ B.T)
        + np.sum(B * B, axis=1)[None, :]
    )
    np.maximum(sq, 0.0, out=sq)
    return sq


def basis_features(points, centers, sigma: float, j: int, sq_dists=None):
    """Evaluate the coordinate-j basis functions and their j-th partials.

    Parameters
    ----------
    points : ndarray of shape (n, d)
    centers : ndarray of shape (b, d)
    sigma : float
        Positive kernel width.
    j : int
        Coordinate index in [0, d).
    sq_dists : ndarray of shape (n, b), optional
        Precomputed squared distances between points and centers.

    Returns
    -------
    values : ndarray of shape (n, b)
        values[i, k] = psi_k(points[i]).
    partials : ndarray of shape (n, b)
        partials[i, k] = d psi_k / d y^{(j)} at points[i].
    """
    points = as_float_matrix(points, "points")
    centers = as_float_matrix(centers, "centers")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0 <= j < points.shape[1]:
        raise ValueError(f"coordinate j={j} out of range for d={points.shape[1]}")
    if sq_dists is None:
        sq_dists = pairwise_sq_distances(points, centers)
    s2 = sigma * sigma
    envelope = np.exp(-sq_dists / (2.0 * s2))
    diff = centers[:, j][None, :] - points[:, j][:, None]
    values = diff / s2 * envelope
    partials = envelope * (diff * diff / (s2 * s2) - 1.0 / s2)
    return values, partials


def empirical_moments(values: np.ndarray, partials: np.ndarray):
    """Gram matrix and mean partial vector of one coordinate's basis.

    Returns (G, h) with G = (1/n) sum_i psi_i psi_i^T (exactly symmetric)
    and h = (1/n) sum_i d_j psi_i.
    """
    n = values.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    G = values.T @ values / n
    G = (G + G.T) / 2.0
    h = partials.mean(axis=0)
    return G, h


def ridge_coefficients(G: np.ndarray, h: np.ndarray, ridge: float) -> np.ndarray:
    """Solve theta = -(G + ridge I)^{-1} h for one coordinate."""
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")
    A = G + ridge * np.eye(G.shape[0])
    return linalg.solve(A, -h, assume_a="pos")


def empirical_objective(values: np.ndarray, partials: np.ndarray) -> float:
    """Score (1/n) sum_i [ g(y_i)^2 + 2 d_j g(y_i) ] for given evaluations."""
    return float(np.mean(values * values + 2.0 * partials))


def _fold_blocks(n: int, n_folds: int, rng: np.random.Generator):
    """Contiguous index blocks of a single seeded shuffle of range(n)."""
    if n_folds < 2:
        raise ValueError(f"need at least 2 folds, got {n_folds}")
    if n < n_folds:
        raise ValueError(f"cannot split {n} samples into {n_folds} non-empty folds")
    return np.array_split(rng.permutation(n), n_folds)


def cross_validate(
    Y,
    centers,
    sigma_grid=DEFAULT_SIGMA_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    n_folds: int = DEFAULT_FOLDS,
    rng=None,
):
    """Select per-coordinate widths and ridge strengths by k-fold CV.

    For every coordinate and every (sigma, lambda) pair the coefficients are
    fitted on the training folds and scored with the empirical objective on
    the held-out fold; scores are averaged over folds. Ties are broken toward
    larger lambda, then larger sigma.

    Returns
    -------
    sigmas : ndarray of shape (d,)
    lambdas : ndarray of shape (d,)
    scores : ndarray of shape (d, len(sigma_grid), len(lambda_grid))
        Mean held-out objective per coordinate and grid pair.
    """
    Y = as_float_matrix(Y, "Y")
    centers = as_float_matrix(centers, "centers")
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if sigma_grid.size == 0 or lambda_grid.size == 0:
        raise ValueError("sigma_grid and lambda_grid must be non-empty")
    rng = np.random.default_rng(rng)
    n, d = Y.shape
    folds = _fold_blocks(n, n_folds, rng)
    b = centers.shape[0]
    eye = np.eye(b)
    sq_dists = pairwise_sq_distances(Y, centers)
    scores = np.zeros((d, sigma_grid.size, lambda_grid.size))
    for si, sigma in enumerate(sigma_grid):
        for j in range(d):
            values, partials = basis_features(Y, centers, sigma, j, sq_dists=sq_dists)
            total_gram = values.T @ values
            total_partial = partials.sum(axis=0)
            for fold in folds:
                held_values = values[fold]
                held_partials = partials[fold]
                n_train = n - fold.size
                G = (total_gram - held_values.T @ held_values) / n_train
                G = (G + G.T) / 2.0
                h = (total_partial - held_partials.sum(axis=0)) / n_train
                for li, lam in enumerate(lambda_grid):
                    theta = linalg.solve(G + lam * eye, -h, assume_a="pos")
                    scores[j, si, li] += empirical_objective(
                        held_values @ theta, held_partials @ theta
                    )
    scores /= len(folds)

    sigmas = np.empty(d)
    lambdas = np.empty(d)
    for j in range(d):
        table = scores[j]
        candidates = np.argwhere(table == table.min())
        # prefer the largest lambda, then the largest sigma
        li = candidates[:, 1].max()
        si = candidates[candidates[:, 1] == li, 0].max()
        sigmas[j] = sigma_grid[si]
        lambdas[j] = lambda_grid[li]
    return sigmas, lambdas, scores


class LSLDG(BaseEstimator):
    """Least-squares log-density gradient estimator.

    Parameters
    ----------
    sigma_grid : sequence of float, optional
        Candidate kernel widths; defaults to 10 log-spaced values in
        [0.1, 10].
    lambda_grid : sequence of float, optional
        Candidate ridge strengths; defaults to 10 log-spaced values in
        [1e-5, 10].
    cv_folds : int
        Number of cross-validation folds.
    random_state : int or None
        Seeds both the center draw and the fold shuffle; refitting with the
        same data and seed reproduces the coefficients bitwise.

    Attributes
    ----------
    centers_ : ndarray of shape (b, d)
        Basis centers, a without-replacement subset of the training rows
        with b = min(n, 100).
    sigma_, lambda_ : ndarray of shape (d,)
        Selected width and ridge strength per coordinate.
    theta_ : ndarray of shape (d, b)
        Fitted coefficient vector per coordinate.
    cv_scores_ : ndarray of shape (d, n_sigma, n_lambda)
        Mean held-out objective for every grid pair.
    """

    def __init__(
        self,
        sigma_grid=None,
        lambda_grid=None,
        cv_folds: int = DEFAULT_FOLDS,
        random_state=None,
    ):
        self.sigma_grid = sigma_grid
        self.lambda_grid = lambda_grid
        self.cv_folds = cv_folds
        self.random_state = random_state

    def fit(self, Y, y=None):
        Y = as_float_matrix(Y, "Y")
        n, d = Y.shape
        if n < self.cv_folds:
            raise ValueError(
                f"need at least cv_folds={self.cv_folds} samples, got {n}"
            )
        sigma_grid = (
            DEFAULT_SIGMA_GRID if self.sigma_grid is None else tuple(self.sigma_grid)
        )
        lambda_grid = (
            DEFAULT_LAMBDA_GRID if self.lambda_grid is None else tuple(self.lambda_grid)
        )
        rng = np.random.default_rng(self.random_state)
        b = min(n, MAX_CENTERS)
        centers = Y[rng.choice(n, size=b, replace=False)].copy()
        sigmas, lambdas, scores = cross_validate(
            Y, centers, sigma_grid, lambda_grid, self.cv_folds, rng
        )
        sq_dists = pairwise_sq_distances(Y, centers)
        theta = np.empty((d, b))
        for j in range(d):
            values, partials = basis_features(
                Y, centers, sigmas[j], j, sq_dists=sq_dists
            )
            G, h = empirical_moments(values, partials)
            theta[j] = ridge_coefficients(G, h, lambdas[j])
        self.centers_ = centers
        self.sigma_ = sigmas
        self.lambda_ = lambdas
        self.theta_ = theta
        self.cv_scores_ = scores
        self.n_features_in_ = d
        return self

    def predict(self, Y) -> np.ndarray:
        """Estimated log-density gradient at each row of Y, shape (n, d)."""
        if not hasattr(self, "theta_"):
            raise NotFittedError("LSLDG is not fitted yet; call fit first")
        Y = as_float_matrix(Y, "Y")
        d = self.n_features_in_
        if Y.shape[1] != d:
            raise ValueError(f"Y has {Y.shape[1]} columns, expected {d}")
        sq_dists = pairwise_sq_distances(Y, self.centers_)
        out = np.empty_like(Y)
        for j in range(d):
            values, _ = basis_features(
                Y, self.centers_, self.sigma_[j], j, sq_dists=sq_dists
            )
            out[:, j] = values @ self.theta_[j]
        return out

    def to_dict(self) -> dict:
        """Serializable snapshot of the fitted model."""
        if not hasattr(self, "theta_"):
            raise NotFittedError("LSLDG is not fitted yet; call fit first")
        return {
            "centers": self.centers_.tolist(),
            "sigma": self.sigma_.tolist(),
            "lambda": self.lambda_.tolist(),
            "theta": self.theta_.tolist(),
            "dims": int(self.n_features_in_),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LSLDG":
        """Rebuild a fitted model from `to_dict` output (prediction only)."""
        model = cls()
        centers = np.asarray(payload["centers"], dtype=float)
        dims = int(payload["dims"])
        if centers.ndim != 2 or centers.shape[1] != dims:
            raise ValueError("centers shape does not match dims")
        sigma = np.asarray(payload["sigma"], dtype=float)
        lam = np.asarray(payload["lambda"], dtype=float)
        theta = np.asarray(payload["theta"], dtype=float)
        if sigma.shape != (dims,) or lam.shape != (dims,):
            raise ValueError("sigma and lambda must hold one value per coordinate")
        if theta.shape != (dims, centers.shape[0]):
            raise ValueError("theta must hold one coefficient vector per coordinate")
        model.centers_ = centers
        model.sigma_ = sigma
        model.lambda_ = lam
        model.theta_ = theta
        model.n_features_in_ = dims
        return model


def save_model(model: LSLDG, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")


def load_model(path) -> LSLDG:
    with open(path, "r", encoding="utf-8") as fh:
        return LSLDG.from_dict(json.load(fh))
