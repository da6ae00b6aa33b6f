"""Canonical correlation analysis and its projection-weighted summary.

The decomposition follows the whitening route: mean-center both views,
regularize each covariance with a scale-aware ridge, form
T = Sxx^{-1/2} Sxy Syy^{-1/2}, and read the canonical correlations off the
singular values of T.  The scalar similarity weights each correlation by how
much of its source view the canonical variate accounts for, averaged over
both directions.

Rows are put into a canonical order before any arithmetic, which makes every
reported number exactly invariant under paired row permutations; the pair of
views is likewise ordered inside cca_similarity, making it exactly symmetric.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, DataError, InputError

__all__ = ["CcaResult", "fit_cca", "pwcca", "cca_similarity", "layer_curve"]

DEFAULT_EPS = 1e-8


@dataclass(frozen=True)
class CcaResult:
    """Correlations, directions, projection weights, and the symmetrized score."""

    correlations: np.ndarray
    directions_x: np.ndarray
    directions_y: np.ndarray
    weights_x: np.ndarray
    weights_y: np.ndarray
    pwcca_xy: float
    pwcca_yx: float
    similarity: float

    def __post_init__(self):
        rho = self.correlations
        if rho.ndim != 1:
            raise InputError("correlations must be a 1-D array")
        if (np.diff(rho) > 1e-8).any() or rho[0] > 1 + 1e-8 or rho[-1] < -1e-8:
            raise DataError("canonical correlations must lie in [0, 1], descending")
        if not (-1e-8 <= self.similarity <= 1 + 1e-8):
            raise DataError(f"similarity {self.similarity} outside [0, 1]")
        for w in (self.weights_x, self.weights_y):
            if abs(w.sum() - 1.0) > 1e-10:
                raise DataError("projection weights must sum to 1")

    @property
    def k(self) -> int:
        return self.correlations.shape[0]


def _as_view(name: str, arr) -> np.ndarray:
    a = np.ascontiguousarray(arr, dtype=np.float64)
    if a.ndim != 2:
        raise InputError(f"{name} must be 2-D, got rank {a.ndim}")
    if not np.isfinite(a).all():
        raise DataError(f"{name} contains non-finite entries")
    return a


def _canonical_row_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Deterministic row order that depends only on row content, not input order."""
    z = np.ascontiguousarray(np.hstack([x, y]))
    flat = z.view(np.dtype((np.void, z.dtype.itemsize * z.shape[1]))).ravel()
    return np.argsort(flat, kind="stable")


def _inv_sqrt(sigma: np.ndarray, ridge: float) -> np.ndarray:
    eigval, eigvec = np.linalg.eigh(sigma)
    floor = ridge if ridge > 0 else np.finfo(np.float64).tiny
    eigval = np.maximum(eigval, floor)
    return (eigvec / np.sqrt(eigval)) @ eigvec.T


def _projection_weights(variates: np.ndarray, centered: np.ndarray) -> np.ndarray:
    raw = np.abs(variates.T @ centered).sum(axis=1)
    total = raw.sum()
    if total <= 0.0:
        raise DataError("degenerate all-zero view: projection weights undefined")
    return raw / total


def fit_cca(X, Y, eps: float = DEFAULT_EPS) -> CcaResult:
    """Fit CCA between paired views X (n x d1) and Y (n x d2).

    eps is a relative ridge: each view's covariance gets eps * mean-variance
    added to its diagonal, and inverse square roots clamp eigenvalues at the
    same floor.  All outputs are exactly invariant under paired row
    permutations of (X, Y).
    """
    x = _as_view("X", X)
    y = _as_view("Y", Y)
    if x.shape[0] != y.shape[0]:
        raise InputError(f"views must pair rows, got n={x.shape[0]} vs n={y.shape[0]}")
    n, d1 = x.shape
    d2 = y.shape[1]
    if n < 2:
        raise InputError(f"need at least 2 paired samples, got {n}")
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    if n <= max(d1, d2):
        warnings.warn(
            f"n={n} does not exceed max dimension {max(d1, d2)}; "
            "canonical correlations will be inflated",
            stacklevel=2,
        )

    order = _canonical_row_order(x, y)
    x = x[order] - x[order].mean(axis=0)
    y = y[order] - y[order].mean(axis=0)

    sxx = (x.T @ x) / (n - 1)
    syy = (y.T @ y) / (n - 1)
    sxy = (x.T @ y) / (n - 1)
    ridge_x = eps * max(np.trace(sxx) / d1, 0.0)
    ridge_y = eps * max(np.trace(syy) / d2, 0.0)
    sxx[np.diag_indices(d1)] += ridge_x
    syy[np.diag_indices(d2)] += ridge_y

    inv_x = _inv_sqrt(sxx, ridge_x)
    inv_y = _inv_sqrt(syy, ridge_y)
    u, rho, vt = np.linalg.svd(inv_x @ sxy @ inv_y)
    k = min(d1, d2)
    rho = np.clip(rho[:k], 0.0, 1.0)
    directions_x = inv_x @ u[:, :k]
    directions_y = inv_y @ vt[:k].T

    weights_x = _projection_weights(x @ directions_x, x)
    weights_y = _projection_weights(y @ directions_y, y)
    pwcca_xy = float(weights_x @ rho)
    pwcca_yx = float(weights_y @ rho)
    return CcaResult(
        correlations=rho,
        directions_x=directions_x,
        directions_y=directions_y,
        weights_x=weights_x,
        weights_y=weights_y,
        pwcca_xy=pwcca_xy,
        pwcca_yx=pwcca_yx,
        similarity=0.5 * (pwcca_xy + pwcca_yx),
    )


def pwcca(result: CcaResult, X, Y) -> tuple[float, float]:
    """Recompute the two projection-weighted scores for a fitted result.

    Weights come from the canonical variates' absolute inner products with
    the centered columns of their own view.
    """
    x = _as_view("X", X)
    y = _as_view("Y", Y)
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    weights_x = _projection_weights(x @ result.directions_x, x)
    weights_y = _projection_weights(y @ result.directions_y, y)
    return float(weights_x @ result.correlations), float(weights_y @ result.correlations)


def cca_similarity(X, Y, eps: float = DEFAULT_EPS) -> float:
    """Symmetrized PWCCA score (pwcca_xy + pwcca_yx) / 2, exactly symmetric in X, Y."""
    x = _as_view("X", X)
    y = _as_view("Y", Y)
    if (x.shape[1], x.tobytes()) <= (y.shape[1], y.tobytes()):
        return fit_cca(x, y, eps).similarity
    return fit_cca(y, x, eps).similarity


def layer_curve(layers, reference, eps: float = DEFAULT_EPS) -> list[float]:
    """One similarity per layer against a fixed reference, order preserved."""
    ref = reference.data if hasattr(reference, "data") else np.asarray(reference)
    curve = []
    for idx, layer in enumerate(layers):
        mat = layer.data if hasattr(layer, "data") else np.asarray(layer)
        if mat.shape[0] != ref.shape[0]:
            raise AlignmentError(
                f"layer {idx}: {mat.shape[0]} rows but reference has {ref.shape[0]}"
            )
        curve.append(cca_similarity(mat, ref, eps))
    return curve
