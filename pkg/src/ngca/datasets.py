"""Synthetic benchmark generators and CSV loading.

Observations follow a signal-plus-noise layout: the first two coordinates
carry independent non-Gaussian signals (optionally contaminated with white
Gaussian noise of variance gamma2), the remaining coordinates are independent
standard normal. The non-Gaussian index space is therefore span{e_1, e_2}.

Signal families
---------------
gaussian_mixture   equal-weight mixture of N(-3, 1) and N(3, 1) per coordinate
super_gaussian     Laplace, scale calibrated so the variance is 3
sub_gaussian       density proportional to exp(-s^4 / beta), beta calibrated
                   so the variance is 3
mixed_super_sub    coordinate 1 Laplace, coordinate 2 quartic, as above
"""

from __future__ import annotations

import csv
import enum
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .validation import as_float_matrix

N_SIGNALS = 2

TARGET_VARIANCE = 3.0

# Support radius and resolution of the tabulated quartic CDF used for
# inverse-CDF sampling. The density exp(-s^4/beta) is below 1e-60 at the
# boundary, so the truncation error is negligible.
_QUARTIC_RANGE = 6.0 * np.sqrt(3.0)
_QUARTIC_GRID_SIZE = 4096


class GeneratorKind(str, enum.Enum):
    """Identifiers of the synthetic signal families."""

    GAUSSIAN_MIXTURE = "gaussian_mixture"
    SUPER_GAUSSIAN = "super_gaussian"
    SUB_GAUSSIAN = "sub_gaussian"
    MIXED_SUPER_SUB = "mixed_super_sub"


def _bisect_to_variance(variance_of, lo: float, hi: float) -> float:
    """Solve variance_of(t) = TARGET_VARIANCE for t by bisection."""
    return optimize.bisect(
        lambda t: variance_of(t) - TARGET_VARIANCE, lo, hi, xtol=1e-10
    )


def _laplace_variance(scale: float) -> float:
    density = lambda s: np.exp(-np.abs(s) / scale) / (2.0 * scale)
    second, _ = integrate.quad(lambda s: s * s * density(s), -np.inf, np.inf)
    return second


def _quartic_variance(beta: float) -> float:
    mass, _ = integrate.quad(lambda s: np.exp(-(s**4) / beta), -np.inf, np.inf)
    second, _ = integrate.quad(
        lambda s: s * s * np.exp(-(s**4) / beta), -np.inf, np.inf
    )
    return second / mass


@lru_cache(maxsize=1)
def laplace_scale() -> float:
    """Laplace scale with variance 3 (closed form sqrt(3/2), solved numerically)."""
    return _bisect_to_variance(_laplace_variance, 1e-3, 1e2)


@lru_cache(maxsize=1)
def quartic_shape() -> float:
    """Shape beta of the density exp(-s^4/beta) with variance 3."""
    return _bisect_to_variance(_quartic_variance, 1e-3, 1e4)


@lru_cache(maxsize=1)
def _quartic_cdf_table():
    beta = quartic_shape()
    grid = np.linspace(-_QUARTIC_RANGE, _QUARTIC_RANGE, _QUARTIC_GRID_SIZE)
    density = np.exp(-(grid**4) / beta)
    cdf = integrate.cumulative_trapezoid(density, grid, initial=0.0)
    cdf /= cdf[-1]
    return grid, cdf


def _sample_quartic(rng: np.random.Generator, size) -> np.ndarray:
    """Inverse-CDF draws from the variance-3 quartic density."""
    grid, cdf = _quartic_cdf_table()
    u = rng.random(size)
    return np.interp(u, cdf, grid)


def _sample_laplace(rng: np.random.Generator, size) -> np.ndarray:
    return rng.laplace(loc=0.0, scale=laplace_scale(), size=size)


def _sample_gaussian_mixture(rng: np.random.Generator, size) -> np.ndarray:
    # Equal-weight mixture of N(-3, 1) and N(3, 1); the coordinate variance
    # of this family is 10 (unit within-component variance plus 9 from the
    # component means).
    signs = 2.0 * rng.integers(0, 2, size=size) - 1.0
    return 3.0 * signs + rng.standard_normal(size)


def sample_signals(kind, n: int, seed=None) -> np.ndarray:
    """Draw an (n, 2) matrix of i.i.d. non-Gaussian signal pairs.

    Parameters
    ----------
    kind : GeneratorKind or str
        Signal family identifier.
    n : int
        Number of rows, at least 1.
    seed : int, Generator or None
        Source of randomness; a fixed integer makes the draw reproducible.
    """
    kind = GeneratorKind(kind)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    if kind is GeneratorKind.GAUSSIAN_MIXTURE:
        return _sample_gaussian_mixture(rng, (n, N_SIGNALS))
    if kind is GeneratorKind.SUPER_GAUSSIAN:
        return _sample_laplace(rng, (n, N_SIGNALS))
    if kind is GeneratorKind.SUB_GAUSSIAN:
        return _sample_quartic(rng, (n, N_SIGNALS))
    # mixed family: one heavy-tailed and one light-tailed coordinate
    out = np.empty((n, N_SIGNALS))
    out[:, 0] = _sample_laplace(rng, n)
    out[:, 1] = _sample_quartic(rng, n)
    return out


def assemble_observations(signals, d_x: int, gamma2: float = 0.0, seed=None) -> np.ndarray:
    """Embed signal pairs into d_x dimensions with Gaussian background noise.

    Columns 1 and 2 are the signals plus N(0, gamma2) contamination; columns
    3..d_x are independent standard normal. gamma2 = 0 reproduces the clean
    setup exactly.
    """
    S = as_float_matrix(signals, "signals")
    if S.shape[1] != N_SIGNALS:
        raise ValueError(f"signals must have {N_SIGNALS} columns, got {S.shape[1]}")
    if d_x <= N_SIGNALS:
        raise ValueError(f"d_x must exceed {N_SIGNALS}, got {d_x}")
    if gamma2 < 0:
        raise ValueError(f"gamma2 must be non-negative, got {gamma2}")
    n = S.shape[0]
    rng = np.random.default_rng(seed)
    X = np.empty((n, d_x))
    # The contamination draw happens even for gamma2 = 0 so that the
    # background columns coincide across noise levels under a shared seed.
    X[:, :N_SIGNALS] = S + np.sqrt(gamma2) * rng.standard_normal((n, N_SIGNALS))
    X[:, N_SIGNALS:] = rng.standard_normal((n, d_x - N_SIGNALS))
    return X


def load_csv(path) -> np.ndarray:
    """Load a numeric CSV as a float matrix.

    A header row is detected automatically: if any cell of the first row
    fails to parse as a number, that row is skipped. All remaining rows must
    be numeric and of equal length; violations raise ValueError with the
    offending 1-based row (and 0-based column) index.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: file contains no data rows")

    def parse_row(row, index):
        values = []
        for col, cell in enumerate(row):
            try:
                values.append(float(cell))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric value {cell!r} at row {index}, column {col}"
                ) from None
        return values

    start = 0
    try:
        first = parse_row(rows[0], 1)
    except ValueError:
        start = 1
        first = None
    if start == 1 and len(rows) == 1:
        raise ValueError(f"{path}: file contains only a header row")

    width = len(first) if first is not None else len(rows[1])
    data = []
    if first is not None:
        data.append(first)
    for index in range(max(start, 1), len(rows)):
        row = rows[index]
        if len(row) != width:
            raise ValueError(
                f"{path}: row {index + 1} has {len(row)} fields, expected {width}"
            )
        data.append(parse_row(row, index + 1))
    return np.asarray(data, dtype=float)
