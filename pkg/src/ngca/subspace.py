"""Orthonormal subspace container, eigenspace extraction, and frame pull-back.

A `Subspace` stores an orthonormal basis of a d_s-dimensional linear subspace
of R^{d_x} together with the coordinate frame the basis lives in: either the
whitened frame (unit empirical covariance) or the original data frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .validation import as_float_matrix, as_symmetric_matrix

WHITENED = "whitened"
ORIGINAL = "original"
_FRAMES = (WHITENED, ORIGINAL)

# Two adjacent eigenvalues closer than this are treated as an unresolved split.
EIGEN_GAP_TOL = 1e-12

_ORTHONORMAL_TOL = 1e-10


def fix_column_signs(B: np.ndarray) -> np.ndarray:
    """Flip signs so the largest-magnitude entry of each column is positive.

    Eigenvectors and QR factors are only defined up to sign; this makes the
    returned bases deterministic.
    """
    B = np.array(B, dtype=float, copy=True)
    idx = np.argmax(np.abs(B), axis=0)
    signs = np.sign(B[idx, np.arange(B.shape[1])])
    signs[signs == 0] = 1.0
    return B * signs


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis of a linear subspace, tagged with its frame.

    Parameters
    ----------
    basis : ndarray of shape (d_x, d_s)
        Matrix with orthonormal columns spanning the subspace.
    frame : str
        Either ``"whitened"`` or ``"original"``.
    degenerate_gap : bool
        True when the eigen-gap that selected this subspace was numerically
        unresolved, so the span is not uniquely determined by the data.
    """

    basis: np.ndarray
    frame: str
    degenerate_gap: bool = False

    def __post_init__(self):
        basis = as_float_matrix(self.basis, "basis")
        if basis.shape[1] > basis.shape[0]:
            raise ValueError(
                f"basis has more columns ({basis.shape[1]}) than rows ({basis.shape[0]})"
            )
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > _ORTHONORMAL_TOL:
            raise ValueError("basis columns are not orthonormal")
        if self.frame not in _FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}, expected one of {_FRAMES}")
        object.__setattr__(self, "basis", basis)

    @property
    def d_x(self) -> int:
        return self.basis.shape[0]

    @property
    def d_s(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace, shape (d_x, d_x)."""
        return self.basis @ self.basis.T

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "basis": self.basis.tolist(),
            "d_x": self.d_x,
            "d_s": self.d_s,
            "warning_degenerate_gap": bool(self.degenerate_gap),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "Subspace":
        basis = np.asarray(payload["basis"], dtype=float)
        if basis.shape != (payload["d_x"], payload["d_s"]):
            raise ValueError(
                f"basis shape {basis.shape} does not match declared "
                f"(d_x, d_s) = ({payload['d_x']}, {payload['d_s']})"
            )
        return cls(
            basis=basis,
            frame=payload["frame"],
            degenerate_gap=bool(payload.get("warning_degenerate_gap", False)),
        )


def save_subspace(subspace: Subspace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(subspace.to_dict(), fh, indent=2)
        fh.write("\n")


def load_subspace(path) -> Subspace:
    with open(path, "r", encoding="utf-8") as fh:
        return Subspace.from_dict(json.load(fh))


def top_eigenspace(matrix, n_components: int, frame: str = WHITENED):
    """Extract the span of the leading eigenvectors of a symmetric matrix.

    Parameters
    ----------
    matrix : ndarray of shape (d, d)
        Symmetric matrix.
    n_components : int
        Dimension of the returned eigenspace, between 1 and d.
    frame : str
        Frame tag attached to the returned subspace.

    Returns
    -------
    subspace : Subspace
        Span of the eigenvectors for the `n_components` largest eigenvalues,
        columns sign-fixed. The `degenerate_gap` flag is set when the gap
        between eigenvalue `n_components` and the next one is numerically
        unresolved (below 1e-12), in which case the span is arbitrary within
        the tied block but the result is still returned.
    eigenvalues : ndarray of shape (d,)
        All eigenvalues in descending order.
    """
    S = as_symmetric_matrix(matrix, "matrix")
    d = S.shape[0]
    if not 1 <= n_components <= d:
        raise ValueError(f"n_components must be in [1, {d}], got {n_components}")
    vals, vecs = np.linalg.eigh(S)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    degenerate = False
    if n_components < d:
        degenerate = (vals[n_components - 1] - vals[n_components]) < EIGEN_GAP_TOL
    basis = fix_column_signs(vecs[:, :n_components])
    return Subspace(basis=basis, frame=frame, degenerate_gap=degenerate), vals


def pull_back(subspace: Subspace, whitener: np.ndarray) -> Subspace:
    """Map a whitened-frame subspace to the original data frame.

    The whitened coordinates are y = W (x - mean), so a direction v in the
    whitened frame corresponds to the original-frame direction W v. The
    mapped basis is re-orthonormalized with a thin QR factorization.
    """
    if subspace.frame != WHITENED:
        raise ValueError(f"pull_back expects a whitened-frame subspace, got {subspace.frame!r}")
    W = as_float_matrix(whitener, "whitener")
    if W.shape != (subspace.d_x, subspace.d_x):
        raise ValueError(
            f"whitener shape {W.shape} does not match subspace dimension {subspace.d_x}"
        )
    mapped = W @ subspace.basis
    Q, R = np.linalg.qr(mapped)
    diag = np.abs(np.diag(R))
    if diag.min() < 1e-12 * max(diag.max(), 1e-300):
        raise ValueError(
            "rank deficiency while re-orthonormalizing the pulled-back basis; "
            "the whitening map collapsed the subspace"
        )
    return Subspace(
        basis=fix_column_signs(Q),
        frame=ORIGINAL,
        degenerate_gap=subspace.degenerate_gap,
    )
