"""Private multivariate mean estimation by iteratively shrinking a confidence ball.

Data are assumed to have identity covariance; :func:`whiten` and
:func:`mean_with_cov_proxy` handle a known covariance proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import gamma_norm_bound, smallest_n
from .linalg import sym_inv_sqrt, sym_sqrt
from .privacy import PrivacyBudget, ZCDPAccountant, gaussian_mechanism, split_failure


@dataclass(frozen=True)
class ConfidenceBall:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise ValueError("ball center must be a finite vector")
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ValueError(f"ball radius must be finite and nonnegative, got {self.radius!r}")
        object.__setattr__(self, "center", c)

    def __contains__(self, x) -> bool:
        return bool(np.linalg.norm(np.asarray(x, float) - self.center) <= self.radius)


@dataclass(frozen=True)
class MeanConfig:
    t: int
    budget: PrivacyBudget
    beta: float = 0.1
    clip_multiplier: float = 1.0

    def __post_init__(self):
        if self.budget.t != self.t:
            raise ValueError(f"budget has {self.budget.t} steps, expected t={self.t}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not 0 < self.clip_multiplier <= 1:
            raise ValueError(f"clip_multiplier must lie in (0, 1], got {self.clip_multiplier!r}")


@dataclass
class MeanRun:
    estimate: np.ndarray
    balls: list[ConfidenceBall]  # balls[0] is the input ball
    rho_spent: float


def _matrix(samples) -> np.ndarray:
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("samples must be a nonempty n x d array")
    if not np.all(np.isfinite(X)):
        raise ValueError("samples must be finite")
    return X


def project_to_ball(X: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Move rows outside B(center, radius) radially onto its surface."""
    D = X - center
    norms = np.linalg.norm(D, axis=1)
    scale = np.ones_like(norms)
    outside = norms > radius
    scale[outside] = radius / norms[outside]
    return center + D * scale[:, None]


def step_radius(r: float, d: int, n: int, rho_s: float, beta_s: float,
                clip_multiplier: float = 1.0) -> float:
    """Radius of the ball returned by one step; depends on no data."""
    g1 = gamma_norm_bound(d, n, beta_s)
    g2 = gamma_norm_bound(d, 1, beta_s)
    clip = r + clip_multiplier * g1
    return g2 * math.sqrt(1 / n + 2 * clip * clip / (n * n * rho_s))


def mvm_step(samples, ball: ConfidenceBall, rho_s: float, beta_s: float,
             clip_multiplier: float, rng: np.random.Generator) -> ConfidenceBall:
    X = _matrix(samples)
    n, d = X.shape
    if ball.center.shape != (d,):
        raise ValueError(f"ball center has dimension {ball.center.shape[0]}, data has {d}")
    clip = ball.radius + clip_multiplier * gamma_norm_bound(d, n, beta_s)
    clipped = project_to_ball(X, ball.center, clip)
    z = gaussian_mechanism(clipped.mean(axis=0), 2 * clip / n, rho_s, rng)
    return ConfidenceBall(z, step_radius(ball.radius, d, n, rho_s, beta_s, clip_multiplier))


def mvm_path(samples, ball: ConfidenceBall, config: MeanConfig,
             rng: np.random.Generator) -> MeanRun:
    X = _matrix(samples)
    acct = ZCDPAccountant()
    balls = [ball]
    for rho_s, beta_s in zip(config.budget.per_step, split_failure(config.beta, config.t)):
        balls.append(mvm_step(X, balls[-1], rho_s, beta_s, config.clip_multiplier, rng))
        acct.spend(rho_s)
    return MeanRun(balls[-1].center, balls, acct.spent)


def mvm_rec(samples, ball: ConfidenceBall, config: MeanConfig,
            rng: np.random.Generator) -> np.ndarray:
    """Private mean estimate: center of the ball after ``config.t`` steps.

    With t = 1 this is the naive clip-then-noise estimator.
    """
    return mvm_path(samples, ball, config, rng).estimate


def radius_recurrence(r0: float, d: int, n: int, budget: PrivacyBudget, beta: float,
                      clip_multiplier: float = 1.0) -> list[float]:
    """[r_0, ..., r_t]: the radii ``mvm_path`` will produce, computed without data.

    Useful for choosing t before touching the data.
    """
    radii = [float(r0)]
    for rho_s, beta_s in zip(budget.per_step, split_failure(beta, budget.t)):
        radii.append(step_radius(radii[-1], d, n, rho_s, beta_s, clip_multiplier))
    return radii


def mean_halving_n(d: int, rho_s: float, beta_s: float, floor: float,
                   clip_multiplier: float = 1.0) -> int:
    """Smallest n at which a step at least halves every radius above ``floor``."""
    return smallest_n(
        lambda n: step_radius(floor, d, n, rho_s, beta_s, clip_multiplier) <= floor / 2)


def whiten(samples, cov_proxy) -> np.ndarray:
    """Rescale rows by cov_proxy^{-1/2} so they have roughly identity covariance."""
    X = _matrix(samples)
    W = sym_inv_sqrt(cov_proxy, floor=1e-10, what="covariance proxy")
    if W.shape[0] != X.shape[1]:
        raise ValueError(f"covariance proxy is {W.shape[0]}x{W.shape[0]}, data has d={X.shape[1]}")
    return X @ W


def mean_with_cov_proxy(samples, ball: ConfidenceBall, cov_proxy, config: MeanConfig,
                        rng: np.random.Generator) -> np.ndarray:
    """Run :func:`mvm_rec` in whitened coordinates and map the estimate back.

    The ball is mapped conservatively: its radius grows by ||cov_proxy^{-1/2}||_2.
    """
    W = sym_inv_sqrt(cov_proxy, floor=1e-10, what="covariance proxy")
    S = sym_sqrt(cov_proxy, floor=1e-10, what="covariance proxy")
    white_ball = ConfidenceBall(W @ ball.center, ball.radius * float(np.linalg.norm(W, 2)))
    est = mvm_rec(whiten(samples, cov_proxy), white_ball, config, rng)
    return S @ est
