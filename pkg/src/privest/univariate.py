"""Iterative private confidence intervals for a univariate Gaussian.

``uvm_*`` estimate the mean given the variance; ``uvv_*`` estimate the
variance of zero-mean data (use :func:`difference_pairs` when the mean is
unknown).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import smallest_n
from .privacy import PrivacyBudget, ZCDPAccountant, gaussian_mechanism, split_failure


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo!r}, {self.hi!r}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class UnivariateConfig:
    t: int
    budget: PrivacyBudget
    beta: float = 0.1
    sigma2: float | None = None

    def __post_init__(self):
        if self.budget.t != self.t:
            raise ValueError(f"budget has {self.budget.t} steps, expected t={self.t}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")


@dataclass
class IntervalRun:
    estimate: float
    intervals: list[Interval]  # intervals[0] is the input interval
    rho_spent: float


def _samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    return x


def difference_pairs(samples) -> np.ndarray:
    """(x[2i] - x[2i+1]) / sqrt(2): zero-mean samples with the same variance."""
    x = np.asarray(samples, dtype=float)
    if x.shape[0] % 2:
        raise ValueError(f"difference_pairs needs an even number of samples, got {x.shape[0]}")
    return (x[0::2] - x[1::2]) / math.sqrt(2)


# ---------------------------------------------------------------- mean

def _uvm_pad(sigma2: float, n: int, beta_s: float) -> float:
    return math.sqrt(sigma2) * math.sqrt(2 * math.log(2 * n / beta_s))


def uvm_half_width(width: float, sigma2: float, n: int, rho_s: float, beta_s: float) -> float:
    """Half-width of the interval returned by one mean step; independent of the data."""
    delta = (width + 2 * _uvm_pad(sigma2, n, beta_s)) / n
    noise_var = delta * delta / (2 * rho_s)
    return math.sqrt(2 * (sigma2 / n + noise_var) * math.log(2 / beta_s))


def uvm_step(samples, interval: Interval, sigma2: float, rho_s: float, beta_s: float,
             rng: np.random.Generator) -> Interval:
    x = _samples(samples)
    n = x.size
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2!r}")
    pad = _uvm_pad(sigma2, n, beta_s)
    clipped = np.clip(x, interval.lo - pad, interval.hi + pad)
    delta = (interval.width + 2 * pad) / n
    z = float(gaussian_mechanism(clipped.mean(), delta, rho_s, rng))
    half = uvm_half_width(interval.width, sigma2, n, rho_s, beta_s)
    return Interval(z - half, z + half)


def uvm_path(samples, interval: Interval, sigma2: float, config: UnivariateConfig,
             rng: np.random.Generator) -> IntervalRun:
    x = _samples(samples)
    acct = ZCDPAccountant()
    intervals = [interval]
    for rho_s, beta_s in zip(config.budget.per_step, split_failure(config.beta, config.t)):
        intervals.append(uvm_step(x, intervals[-1], sigma2, rho_s, beta_s, rng))
        acct.spend(rho_s)
    return IntervalRun(intervals[-1].midpoint, intervals, acct.spent)


def uvm_rec(samples, interval: Interval, sigma2: float, config: UnivariateConfig,
            rng: np.random.Generator) -> float:
    """Private mean: midpoint of the last of ``t`` shrinking confidence intervals."""
    return uvm_path(samples, interval, sigma2, config, rng).estimate


def uvm_halving_n(sigma2: float, rho_s: float, beta_s: float, floor: float) -> int:
    """Smallest n at which one step at least halves every interval wider than ``floor``.

    The ratio new_width/width decreases in width, so checking at ``floor`` suffices.
    """
    return smallest_n(
        lambda n: 2 * uvm_half_width(floor, sigma2, n, rho_s, beta_s) <= floor / 2)


# ------------------------------------------------------------ variance

def _uvv_clip_factor(beta_s: float) -> float:
    lg = math.log(1 / beta_s)
    return 1 + 2 * math.sqrt(lg) + 2 * lg


def uvv_width_factor(n: int, rho_s: float, beta_s: float) -> float:
    """Width of one variance step's confidence interval (before intersection) over u."""
    k = _uvv_clip_factor(beta_s)
    lg = math.log(4 / beta_s)
    return 2 * k * math.sqrt(lg) / (n * math.sqrt(rho_s)) + 4 * math.sqrt(lg / n) + 2 * lg / n


def uvv_step(samples, interval: Interval, rho_s: float, beta_s: float,
             rng: np.random.Generator) -> Interval:
    """One private refinement of an interval [l, u] containing the variance.

    ``samples`` must be zero-mean.
    """
    x = _samples(samples)
    n = x.size
    lo, u = interval.lo, interval.hi
    if not lo > 0:
        raise ValueError(f"variance interval must have a positive lower end, got {lo!r}")
    cap = u * _uvv_clip_factor(beta_s)
    w = np.clip(x * x, 0.0, cap)
    delta = cap / n
    z = float(gaussian_mechanism(w.mean(), delta, rho_s, rng))
    lg = math.log(4 / beta_s)
    noise_term = delta * math.sqrt(lg) / math.sqrt(rho_s)
    new_lo = z - noise_term - 2 * u * (math.sqrt(lg / n) + lg / n)
    new_hi = z + noise_term + 2 * u * math.sqrt(lg / n)
    # clamping both ends keeps the order, so a miss collapses onto an endpoint
    return Interval(min(max(new_lo, lo), u), min(max(new_hi, lo), u))


def uvv_path(samples, interval: Interval, config: UnivariateConfig,
             rng: np.random.Generator) -> IntervalRun:
    x = _samples(samples)
    acct = ZCDPAccountant()
    intervals = [interval]
    for rho_s, beta_s in zip(config.budget.per_step, split_failure(config.beta, config.t)):
        intervals.append(uvv_step(x, intervals[-1], rho_s, beta_s, rng))
        acct.spend(rho_s)
    return IntervalRun(intervals[-1].midpoint, intervals, acct.spent)


def uvv_rec(samples, interval: Interval, config: UnivariateConfig,
            rng: np.random.Generator) -> float:
    """Private variance of zero-mean data: midpoint of the final interval."""
    return uvv_path(samples, interval, config, rng).estimate


def uvv_halving_n(rho_s: float, beta_s: float, ratio_floor: float) -> int:
    """Smallest n at which a step halves the width whenever u/l >= ``ratio_floor``.

    Uses width >= u (1 - 1/ratio_floor) for such intervals.
    """
    if not ratio_floor > 1:
        raise ValueError("ratio_floor must exceed 1")
    target = 0.5 * (1 - 1 / ratio_floor)
    return smallest_n(lambda n: uvv_width_factor(n, rho_s, beta_s) <= target)
