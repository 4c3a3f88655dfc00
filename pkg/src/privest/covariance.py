"""Private covariance estimation by iteratively squeezing a pair of ellipsoids.

The state after each step is a scaling matrix A and a lower bound L with
L <= A Sigma A^T <= I (Loewner order) with high probability.  Data are
assumed zero-mean; difference pairs first otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (eta_empirical_cov_bound, gamma_norm_bound, gauss_spec_factor,
                     nu_noise_spectral_bound, smallest_n)
from .linalg import NotPositiveDefinite, psd_part, sym_inv_sqrt, sym_sqrt, symmetrize
from .mean import _matrix, project_to_ball
from .privacy import (NoiseScale, PrivacyBudget, Sensitivity, ZCDPAccountant,
                      split_failure, symmetric_gaussian_noise)


class CovarianceConfigError(ValueError):
    """The confidence ellipsoid collapsed: the noise swamps the regime's eta."""


@dataclass(frozen=True)
class CovarianceState:
    A: np.ndarray
    L: np.ndarray
    Z: np.ndarray | None = None

    def __post_init__(self):
        for name in ("L", "Z"):
            M = getattr(self, name)
            if M is not None and not np.allclose(M, M.T, atol=1e-10, rtol=0):
                raise ValueError(f"{name} must be symmetric")


@dataclass(frozen=True)
class CovConfig:
    """Iteration count, budget and the practical tuning knobs.

    ``shrink_aggressiveness`` scales (eta, nu) when forming the next ellipsoid
    pair; ``clip_multiplier`` scales the clipping radius (privacy noise is
    always calibrated to the radius actually used); ``clamp_negative`` forms
    the upper ellipsoid from the PSD part of Z, which keeps it valid and
    always invertible.  Defaults reproduce the textbook algorithm.
    """

    t: int
    budget: PrivacyBudget
    beta: float = 0.1
    shrink_aggressiveness: float = 1.0
    clip_multiplier: float = 1.0
    clamp_negative: bool = False
    psd_output: bool = False

    def __post_init__(self):
        if self.budget.t != self.t:
            raise ValueError(f"budget has {self.budget.t} steps, expected t={self.t}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not 0 < self.shrink_aggressiveness <= 1:
            raise ValueError("shrink_aggressiveness must lie in (0, 1]")
        if not 0 < self.clip_multiplier <= 1:
            raise ValueError("clip_multiplier must lie in (0, 1]")


@dataclass
class CovRun:
    estimate: np.ndarray
    states: list[CovarianceState]  # states[0] is the initial (A0, L0); one per loop step after
    final_Z: np.ndarray
    rho_spent: float


def cov_sensitivity(T: float, n: int) -> Sensitivity:
    """Frobenius sensitivity of (1/n) sum D_i D_i^T when every ||D_i||^2 <= T."""
    if not T > 0 or n < 1:
        raise ValueError(f"need T > 0 and n >= 1, got T={T!r}, n={n!r}")
    return Sensitivity(math.sqrt(2) * T / n)


def noisy_second_moment(X: np.ndarray, A: np.ndarray, rho_s: float, beta_s: float,
                        clip_multiplier: float, rng: np.random.Generator):
    """Clip rows of X A^T to B(0, clip_multiplier * gamma) and noise their second moment.

    Returns (Z, entry noise std).
    """
    n, d = X.shape
    W = X @ A.T
    radius = clip_multiplier * gamma_norm_bound(d, n, beta_s)
    W = project_to_ball(W, np.zeros(d), radius)
    sigma = NoiseScale.from_sensitivity(cov_sensitivity(radius * radius, n), rho_s)
    Z = W.T @ W / n + symmetric_gaussian_noise(d, sigma, rng)
    return Z, sigma.sigma


def mvc_step(samples, state: CovarianceState, rho_s: float, beta_s: float, shrink: float,
             rng: np.random.Generator, clip_multiplier: float = 1.0,
             clamp_negative: bool = False) -> CovarianceState:
    X = _matrix(samples)
    n, d = X.shape
    if d < 2:
        raise ValueError("covariance steps need d >= 2")
    A = np.asarray(state.A, dtype=float)
    if A.shape != (d, d):
        raise ValueError(f"A is {A.shape}, data has d={d}")
    Z, sigma = noisy_second_moment(X, A, rho_s, beta_s, clip_multiplier, rng)
    eta = shrink * eta_empirical_cov_bound(d, n, beta_s)
    nu = shrink * sigma * gauss_spec_factor(d, beta_s)
    upper = (psd_part(Z) if clamp_negative else Z) + eta * np.eye(d)
    try:
        Ui = sym_inv_sqrt(upper, what="Z + eta I")
    except NotPositiveDefinite as exc:
        raise CovarianceConfigError(
            f"{exc}; eta={eta:.4g} is too small for this noise level "
            "(increase n or rho, reduce t, or enable clamp_negative)") from exc
    L_new = symmetrize(Ui @ (Z - (eta + nu) * np.eye(d)) @ Ui)
    return CovarianceState(Ui @ A, L_new, symmetrize(Z))


def mvc_path(samples, L0, u: float, config: CovConfig,
             rng: np.random.Generator) -> CovRun:
    X = _matrix(samples)
    n, d = X.shape
    if not u > 0:
        raise ValueError(f"u must be positive, got {u!r}")
    L0 = np.eye(d) if L0 is None else np.asarray(L0, dtype=float)
    acct = ZCDPAccountant()
    states = [CovarianceState(np.eye(d) / math.sqrt(u), L0 / u)]
    rhos, betas = config.budget.per_step, split_failure(config.beta, config.t)
    for rho_s, beta_s in zip(rhos[:-1], betas[:-1]):
        states.append(mvc_step(X, states[-1], rho_s, beta_s, config.shrink_aggressiveness,
                               rng, config.clip_multiplier, config.clamp_negative))
        acct.spend(rho_s)
    # the final step's updated ellipsoids are never used, only its noisy Z
    A = states[-1].A
    Z, _ = noisy_second_moment(X, A, rhos[-1], betas[-1], config.clip_multiplier, rng)
    acct.spend(rhos[-1])
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise CovarianceConfigError("scaling matrix became singular") from exc
    est = symmetrize(Ainv @ Z @ Ainv.T)
    if config.psd_output:
        est = psd_part(est)
    return CovRun(est, states, Z, acct.spent)


def mvc_rec(samples, L0, u: float, config: CovConfig, rng: np.random.Generator) -> np.ndarray:
    """Private covariance estimate given L0 <= Sigma <= u I.

    With t = 1 this is the naive clip-and-noise ("Analyze Gauss") estimator.
    """
    return mvc_path(samples, L0, u, config, rng).estimate


def cov_halving_n(d: int, rho_s: float, beta_s: float, C: float = 0.25) -> int:
    """Smallest n with 2 eta + nu <= (1 - C)/2, the per-direction halving condition."""
    target = 0.5 * (1 - C)
    return smallest_n(lambda n: 2 * eta_empirical_cov_bound(d, n, beta_s)
                      + nu_noise_spectral_bound(d, n, rho_s, beta_s) <= target)


def reduce_general_covariance(samples, A_prior, K: float):
    """Rescale data by A_prior^{-1/2} when A_prior <= Sigma <= K A_prior.

    Returns the rescaled samples and u = K; map an estimate back with
    :func:`restore_covariance`.
    """
    if not K >= 1:
        raise ValueError(f"K must be >= 1, got {K!r}")
    W = sym_inv_sqrt(A_prior, floor=1e-10, what="A_prior")
    X = _matrix(samples)
    if W.shape[0] != X.shape[1]:
        raise ValueError("A_prior dimension does not match the data")
    return X @ W, float(K)


def restore_covariance(estimate, A_prior) -> np.ndarray:
    S = sym_sqrt(A_prior, floor=1e-10, what="A_prior")
    return symmetrize(S @ np.asarray(estimate, float) @ S)
