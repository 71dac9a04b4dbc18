"""Subspace estimation from moments of index projection functions.

For whitened data with unit population covariance, the vector

    beta(h) = E[ y h(y) - grad h(y) ]

vanishes for every smooth h when y is standard normal, and lies in the
non-Gaussian index space when the density has the signal-plus-Gaussian form.
Evaluating beta over a family of ridge functions h(y) = r(w^T y) therefore
produces a cloud of vectors concentrated on the index space; its leading
principal directions estimate the space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .subspace import WHITENED, pull_back, top_eigenspace
from .validation import as_float_matrix, as_float_vector
from .whitening import Whitener

DEFAULT_N_DIRECTIONS = 50
DEFAULT_FASTICA_ITERS = 10
_DEFAULT_PARAMS = (0.5, 1.0, 1.5, 2.0, 2.5)


def _pow3(z, a):
    return z**3


def _pow3_slope(z, a):
    return 3.0 * z * z


def _tanh(z, a):
    return np.tanh(a * z)


def _tanh_slope(z, a):
    t = np.tanh(a * z)
    return a * (1.0 - t * t)


PROFILES = {
    "pow3": (_pow3, _pow3_slope),
    "tanh": (_tanh, _tanh_slope),
    "fourier_sin": (lambda z, a: np.sin(a * z), lambda z, a: a * np.cos(a * z)),
    "fourier_cos": (lambda z, a: np.cos(a * z), lambda z, a: -a * np.sin(a * z)),
    # identity profile, useful as a null check: on whitened data its beta
    # vector is exactly zero
    "linear": (lambda z, a: z, lambda z, a: np.ones_like(z)),
}


def default_profiles() -> list[tuple[str, float | None]]:
    """The default ridge-profile family: one cubic plus parameterized
    tanh/sin/cos sweeps."""
    family: list[tuple[str, float | None]] = [("pow3", None)]
    for name in ("tanh", "fourier_sin", "fourier_cos"):
        family.extend((name, a) for a in _DEFAULT_PARAMS)
    return family


@dataclass(frozen=True)
class IndexFunction:
    """Ridge function h(y) = r(direction^T y) with slope r'."""

    profile: str
    param: float | None
    direction: np.ndarray

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(
                f"unknown profile {self.profile!r}, expected one of {sorted(PROFILES)}"
            )
        direction = as_float_vector(self.direction, "direction")
        norm = np.linalg.norm(direction)
        if not np.isclose(norm, 1.0, atol=1e-8):
            raise ValueError(f"direction must be a unit vector, got norm {norm}")
        object.__setattr__(self, "direction", direction)

    def value(self, z):
        return PROFILES[self.profile][0](np.asarray(z, dtype=float), self._a())

    def slope(self, z):
        return PROFILES[self.profile][1](np.asarray(z, dtype=float), self._a())

    def _a(self) -> float:
        return 1.0 if self.param is None else float(self.param)


def index_direction(Y, fn: IndexFunction) -> np.ndarray:
    """Raw vector (1/n) sum_i [ y_i h(y_i) - grad h(y_i) ].

    For h(y) = r(w^T y) the gradient is r'(w^T y) w, so the estimate is the
    mean of y_i r(z_i) minus the mean slope times w, with z_i = w^T y_i.
    """
    Y = as_float_matrix(Y, "Y")
    if fn.direction.shape[0] != Y.shape[1]:
        raise ValueError(
            f"direction dimension {fn.direction.shape[0]} does not match data "
            f"dimension {Y.shape[1]}"
        )
    z = Y @ fn.direction
    values = fn.value(z)
    return Y.T @ values / Y.shape[0] - fn.slope(z).mean() * fn.direction


@dataclass(frozen=True)
class NormalizedDirection:
    """Raw and noise-normalized direction estimate for one index function.

    `dropped` marks functions whose normalization denominator was not
    positive, which makes the scaled vector undefined.
    """

    raw: np.ndarray
    normalized: np.ndarray | None
    informative_norm: float
    dropped: bool


def normalize_direction(Y, fn: IndexFunction, raw=None) -> NormalizedDirection:
    """Scale a raw direction estimate by its fluctuation denominator.

    The denominator is sqrt( sum_i ||y_i h(y_i) - grad h(y_i)||^2 - ||raw||^2 ),
    with the plain (unaveraged) sum. A non-positive value under the root
    marks the function as degenerate and the vector is dropped.
    """
    Y = as_float_matrix(Y, "Y")
    if raw is None:
        raw = index_direction(Y, fn)
    raw = as_float_vector(raw, "raw")
    z = Y @ fn.direction
    values = fn.value(z)
    slopes = fn.slope(z)
    # ||y_i h - grad h||^2 expanded with ||w|| = 1 and w^T y_i = z_i
    row_sq = (
        values * values * np.sum(Y * Y, axis=1)
        - 2.0 * values * slopes * z
        + slopes * slopes
    )
    denom_sq = float(row_sq.sum()) - float(raw @ raw)
    if denom_sq <= 0.0:
        return NormalizedDirection(raw=raw, normalized=None, informative_norm=0.0, dropped=True)
    normalized = raw / np.sqrt(denom_sq)
    return NormalizedDirection(
        raw=raw,
        normalized=normalized,
        informative_norm=float(np.linalg.norm(normalized)),
        dropped=False,
    )


def candidate_directions(
    Y,
    count: int = DEFAULT_N_DIRECTIONS,
    iters: int = DEFAULT_FASTICA_ITERS,
    seed=None,
) -> np.ndarray:
    """Seeded random unit directions refined by fixed-point contrast steps.

    Each column starts as a random unit vector and is updated up to `iters`
    times with w <- E[y tanh(w^T y)] - E[1 - tanh^2(w^T y)] w, renormalizing
    after every step. Updates that collapse numerically keep the previous
    vector. Returns the directions as rows, shape (count, d).
    """
    Y = as_float_matrix(Y, "Y")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if iters < 0:
        raise ValueError(f"iters must be non-negative, got {iters}")
    rng = np.random.default_rng(seed)
    n, d = Y.shape
    V = rng.standard_normal((d, count))
    V /= np.linalg.norm(V, axis=0, keepdims=True)
    for _ in range(iters):
        T = np.tanh(Y @ V)
        updated = Y.T @ T / n - V * np.mean(1.0 - T * T, axis=0, keepdims=True)
        norms = np.linalg.norm(updated, axis=0)
        usable = norms > 1e-12
        V[:, usable] = updated[:, usable] / norms[usable]
    return V.T


class MIPP(BaseEstimator, TransformerMixin):
    """Index-space estimation by pooled projection-function moments.

    Parameters
    ----------
    n_components : int
        Dimension of the subspace to recover, smaller than the data
        dimension.
    profiles : sequence of (name, param) pairs, optional
        Ridge profiles to evaluate along every candidate direction; defaults
        to `default_profiles()`.
    n_directions : int
        Number of candidate directions shared across profiles.
    fastica_iters : int
        Fixed-point refinement steps applied to the candidate directions.
    random_state : int or None
        Seeds the candidate directions.

    Attributes
    ----------
    subspace_ : Subspace
        Estimate in the original data frame.
    components_ : ndarray of shape (n_components, d)
    directions_ : ndarray of shape (n_directions, d)
        Refined candidate directions in the whitened frame.
    n_dropped_ : int
        Number of index functions discarded by the normalization.
    degenerate_gap_ : bool
        True when the pooled scatter had no numerically resolved eigen-gap
        at the cut, as happens for data with no non-Gaussian structure.
    """

    def __init__(
        self,
        n_components: int = 2,
        profiles=None,
        n_directions: int = DEFAULT_N_DIRECTIONS,
        fastica_iters: int = DEFAULT_FASTICA_ITERS,
        random_state=None,
    ):
        self.n_components = n_components
        self.profiles = profiles
        self.n_directions = n_directions
        self.fastica_iters = fastica_iters
        self.random_state = random_state

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        d = X.shape[1]
        if not 1 <= self.n_components < d:
            raise ValueError(
                f"n_components must be in [1, {d - 1}] for d={d}, "
                f"got {self.n_components}"
            )
        profiles = list(self.profiles) if self.profiles is not None else default_profiles()
        whitener = Whitener().fit(X)
        Y = whitener.transform(X)
        directions = candidate_directions(
            Y, self.n_directions, self.fastica_iters, self.random_state
        )
        kept = []
        dropped = 0
        for name, param in profiles:
            for w in directions:
                fn = IndexFunction(name, param, w)
                result = normalize_direction(Y, fn)
                if result.dropped:
                    dropped += 1
                else:
                    kept.append(result.normalized)
        if len(kept) < self.n_components:
            raise ValueError(
                f"only {len(kept)} usable index functions survived the "
                f"normalization, need at least {self.n_components}"
            )
        B = np.asarray(kept)
        scatter = B.T @ B
        whitened_subspace, eigenvalues = top_eigenspace(
            scatter, self.n_components, frame=WHITENED
        )
        subspace = pull_back(whitened_subspace, whitener.whitener_)
        self.whitener_ = whitener
        self.mean_ = whitener.mean_
        self.directions_ = directions
        self.n_dropped_ = dropped
        self.scatter_eigenvalues_ = eigenvalues
        self.degenerate_gap_ = subspace.degenerate_gap
        self.subspace_ = subspace
        self.components_ = subspace.basis.T
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "subspace_"):
            raise NotFittedError("MIPP is not fitted yet; call fit first")
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} columns, expected {self.n_features_in_}"
            )
        return (X - self.mean_) @ self.components_.T
