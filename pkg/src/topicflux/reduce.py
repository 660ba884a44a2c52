"""Deterministic linear dimensionality reduction.

PCA via symmetric eigendecomposition of the sample covariance. The reducer
contract (fit -> Projection, transform -> scores) is the seam where a
nonlinear method could be swapped in later; everything downstream only
sees the reduced matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ZERO_VARIANCE_EPS = 1e-15


@dataclass
class Projection:
    mean: np.ndarray  # (d,)
    basis: np.ndarray  # (d, k), orthonormal columns
    explained_variance_ratio: np.ndarray  # (k,), non-increasing
    degenerate: bool = False

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def pca_fit(X: np.ndarray, k: int) -> Projection:
    """Top-k principal axes of X with a fixed sign convention.

    Each basis column is flipped so its largest-magnitude entry (lowest
    index on ties) is non-negative, making the projection bit-reproducible
    across runs. Zero-variance input yields an identity-like basis flagged
    degenerate.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows to fit")
    if not 1 <= k <= min(n, d):
        raise ValueError(f"k={k} out of range for {n}x{d} input")
    if not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")

    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    total_var = float(np.trace(cov))

    if total_var <= _ZERO_VARIANCE_EPS:
        basis = np.eye(d, k)
        return Projection(mean, basis, np.zeros(k), degenerate=True)

    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending order
    order = np.argsort(eigvals, kind="stable")[::-1][:k]
    values = np.clip(eigvals[order], 0.0, None)
    basis = eigvecs[:, order].copy()
    _fix_signs(basis)
    ratios = values / total_var
    return Projection(mean, basis, ratios, degenerate=False)


def _fix_signs(basis: np.ndarray) -> None:
    for j in range(basis.shape[1]):
        col = basis[:, j]
        i = int(np.argmax(np.abs(col)))  # argmax takes the lowest index on ties
        if col[i] < 0:
            basis[:, j] = -col


def pca_transform(proj: Projection, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != proj.mean.shape[0]:
        raise ValueError(
            f"X has {X.shape[1] if X.ndim == 2 else '?'} columns, projection expects {proj.mean.shape[0]}"
        )
    return (X - proj.mean) @ proj.basis
