"""Private PCA: privately estimate the covariance, then take its top eigenvectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import CovConfig, mvc_rec
from .metrics import eigvec_alignment
from .privacy import PrivacyBudget, split_budget
from .univariate import difference_pairs


@dataclass
class PCAResult:
    components: np.ndarray         # d x k, columns ordered by decreasing eigenvalue
    eigenvalues: np.ndarray        # top-k eigenvalues of the private estimate (scaled units)
    projection: np.ndarray         # n x k
    alignments: list[float] | None = None
    reference_components: np.ndarray | None = None


def top_eigenvectors(M: np.ndarray, k: int):
    w, V = np.linalg.eigh((M + M.T) / 2)
    order = np.argsort(w)[::-1][:k]
    return w[order], V[:, order]


def private_pca(X, *, scale_factor: float, kappa: float, rho: float, t: int, k: int,
                rng: np.random.Generator, beta: float = 0.1, mean_known: bool = True,
                reference: bool = False, shrink: float = 1.0, clip_multiplier: float = 1.0,
                clamp_negative: bool = False) -> PCAResult:
    """Top-k principal directions of ``X`` under rho-zCDP.

    The analyst's prior is expressed by ``scale_factor`` and ``kappa``: the
    rescaled data should have covariance below ``kappa * I``.  ``rho`` may be
    ``math.inf`` to switch the privacy noise off for debugging.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in [1, d={d}], got {k}")
    if not scale_factor > 0:
        raise ValueError("scale_factor must be positive")
    Y = X * scale_factor
    if not mean_known:
        Y = difference_pairs(Y[: n - n % 2])
    if math.isinf(rho):
        # noiseless debugging run: keep the textbook clipping so nothing is cut
        budget = PrivacyBudget(math.inf, (math.inf,) * t)
        clip_multiplier, shrink, clamp_negative = 1.0, 1.0, False
    else:
        budget = split_budget(rho, t)
    config = CovConfig(t, budget, beta, shrink_aggressiveness=shrink,
                       clip_multiplier=clip_multiplier, clamp_negative=clamp_negative)
    est = mvc_rec(Y, None, kappa, config, rng)
    vals, vecs = top_eigenvectors(est, k)
    centered = X - X.mean(axis=0) if not mean_known else X
    result = PCAResult(vecs, vals, centered @ vecs)
    if reference:
        ref_cov = (Y.T @ Y) / Y.shape[0]
        _, ref = top_eigenvectors(ref_cov, k)
        result.reference_components = ref
        result.alignments = [eigvec_alignment(vecs[:, i], ref[:, i]) for i in range(k)]
    return result
