"""Symmetric-matrix functions via eigendecomposition."""

from __future__ import annotations

import numpy as np


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


def symmetrize(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2


def _eig_checked(M: np.ndarray, floor: float, what: str):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {M.shape}")
    w, V = np.linalg.eigh(symmetrize(M))
    top = np.max(np.abs(w)) if w.size else 0.0
    if w.size == 0 or w[0] <= floor * top or top == 0:
        raise NotPositiveDefinite(
            f"{what} is not positive definite (min eigenvalue {w[0] if w.size else 'n/a'!r})")
    return w, V


def sym_sqrt(M: np.ndarray, floor: float = 1e-12, what: str = "matrix") -> np.ndarray:
    w, V = _eig_checked(M, floor, what)
    return (V * np.sqrt(w)) @ V.T


def sym_inv_sqrt(M: np.ndarray, floor: float = 1e-12, what: str = "matrix") -> np.ndarray:
    w, V = _eig_checked(M, floor, what)
    return (V / np.sqrt(w)) @ V.T


def psd_part(M: np.ndarray) -> np.ndarray:
    """Clamp the negative eigenvalues of a symmetric matrix to zero."""
    w, V = np.linalg.eigh(symmetrize(np.asarray(M, dtype=float)))
    return (V * np.maximum(w, 0.0)) @ V.T


def is_psd(M: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(symmetrize(M))[0] >= -tol)
