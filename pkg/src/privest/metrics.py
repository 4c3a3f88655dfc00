"""Error metrics and trial aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import sym_inv_sqrt


def l2_error(estimate, truth) -> float:
    estimate, truth = np.asarray(estimate, float), np.asarray(truth, float)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    return float(np.linalg.norm(estimate - truth))


def mahalanobis_mean_error(estimate, truth_mean, truth_cov) -> float:
    """||Sigma^{-1/2} (mu_hat - mu)||_2."""
    diff = np.asarray(estimate, float) - np.asarray(truth_mean, float)
    W = sym_inv_sqrt(truth_cov, what="truth covariance")
    if W.shape[0] != diff.shape[0]:
        raise ValueError("dimension mismatch between estimate and covariance")
    return float(np.linalg.norm(W @ diff))


def mahalanobis_cov_error(estimate, truth) -> float:
    """||Sigma^{-1/2} Sigma_hat Sigma^{-1/2} - I||_F; affine invariant."""
    estimate = np.asarray(estimate, float)
    W = sym_inv_sqrt(truth, what="truth covariance")
    if estimate.shape != W.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {W.shape}")
    return float(np.linalg.norm(W @ estimate @ W - np.eye(W.shape[0]), "fro"))


def trimmed_mean(values, trim: float = 0.1, per_side: bool = True) -> float:
    """Mean after dropping floor(trim*k) of the smallest and of the largest values.

    With ``per_side=False`` ``trim`` is the total fraction removed, split
    evenly between the two tails.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    k = v.size
    if k == 0:
        raise ValueError("trimmed_mean of an empty sequence")
    if not 0 <= trim < 0.5:
        raise ValueError(f"trim must lie in [0, 0.5), got {trim!r}")
    m = math.floor(trim * k) if per_side else math.floor(trim * k / 2)
    return float(np.mean(v[m:k - m]))


def eigvec_alignment(v_hat, v_true) -> float:
    """|<v_hat, v>| after normalizing both; eigenvectors are sign-ambiguous."""
    a, b = np.asarray(v_hat, float), np.asarray(v_true, float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("eigvec_alignment needs nonzero vectors")
    return float(min(1.0, abs(a @ b) / (na * nb)))


@dataclass
class TrialReport:
    method: str
    config_id: str
    per_trial_errors: list[float] = field(default_factory=list)
    trim: float = 0.1

    @property
    def aggregate(self) -> float:
        return trimmed_mean(self.per_trial_errors, self.trim)
