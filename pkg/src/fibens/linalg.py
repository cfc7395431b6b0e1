"""Dense symmetric linear algebra for whitening and ridge fits.

Everything here is desk-scale (a few hundred rows at most): symmetric
eigendecomposition, the PSD inverse square root used to whiten Gram
matrices, and a ridge solver routed through the eigendecomposition so
singular unregularized systems surface as explicit errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NumericalError(RuntimeError):
    """A linear-algebra routine failed to produce a usable result."""


def check_symmetric(a: np.ndarray) -> np.ndarray:
    """Validate |A_ij - A_ji| <= 1e-12 * max(1, |A_ij|) and return float64 A."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.abs(a - a.T) <= 1e-12 * np.maximum(1.0, np.abs(a))):
        raise ValueError("matrix is not symmetric")
    return a


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order; eigenvector column j pairs with value j."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eig(a: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Raises ValueError on non-symmetric input and NumericalError if the
    underlying iteration fails to converge.
    """
    a = check_symmetric(a)
    try:
        vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return EigenDecomposition(eigenvalues=vals[order], eigenvectors=vecs[:, order])


def inv_sqrt_psd(g: np.ndarray, eig_floor: float) -> np.ndarray:
    """G^{-1/2} with eigenvalues floored at eig_floor before inversion.

    Returns V diag(1/sqrt(max(lam, eig_floor))) V^T.  Materially negative
    eigenvalues (below -1e-8 * max|G|) mean G is not PSD and raise.
    """
    if eig_floor <= 0.0:
        raise ValueError("eig_floor must be > 0")
    dec = sym_eig(g)
    scale = float(np.max(np.abs(g))) if g.size else 0.0
    if np.any(dec.eigenvalues < -1e-8 * scale):
        raise ValueError("matrix is materially non-PSD")
    inv_roots = 1.0 / np.sqrt(np.maximum(dec.eigenvalues, eig_floor))
    v = dec.eigenvectors
    w = (v * inv_roots) @ v.T
    return 0.5 * (w + w.T)


def ridge_solve(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Minimize ||Xc - y||^2 + lam ||c||^2 via the normal equations.

    Solves (X^T X + lam I) c = X^T y through sym_eig; a singular system at
    lam = 0 raises NumericalError.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("X must be n x d and y length n")
    if lam < 0.0:
        raise ValueError("lambda must be nonnegative")
    a = x.T @ x
    a = 0.5 * (a + a.T)
    a[np.diag_indices_from(a)] += lam
    dec = sym_eig(a)
    lam_max = float(dec.eigenvalues[0])
    lam_min = float(dec.eigenvalues[-1])
    if lam_min <= 1e-12 * max(lam_max, 1e-300):
        raise NumericalError("normal equations are singular; increase lambda")
    v = dec.eigenvectors
    rhs = x.T @ y
    return v @ ((v.T @ rhs) / dec.eigenvalues)
