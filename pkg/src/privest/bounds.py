"""Tail and spectral-norm bounds used to size clipping regions and confidence sets.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class TailParams:
    d: int
    n: int
    beta: float

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError(f"d and n must be >= 1, got d={self.d}, n={self.n}")
        _check_beta(self.beta)


def _check_beta(beta: float, allow_one: bool = False) -> float:
    beta = float(beta)
    ok = 0 < beta <= 1 if allow_one else 0 < beta < 1
    if not ok:
        raise ValueError(f"beta must lie in (0, 1{']' if allow_one else ')'}, got {beta!r}")
    return beta


def gamma_norm_bound(d: int, m: float, beta: float) -> float:
    """sqrt(d + 2 sqrt(d log(m/beta)) + 2 log(m/beta)).

    With m = n this bounds the norms of all n standard Gaussian samples at
    once; with m = 1 it bounds a single one.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d!r}")
    beta = _check_beta(beta, allow_one=True)
    ratio = float(m) / beta
    if not ratio >= 1:
        raise ValueError(f"m/beta must be >= 1, got m={m!r}, beta={beta!r}")
    lg = math.log(ratio)
    return math.sqrt(d + 2 * math.sqrt(d * lg) + 2 * lg)


def chi2_upper_tail(k: float, beta: float) -> float:
    """Laurent-Massart: P(chi2_k >= k + 2 sqrt(k log 1/beta) + 2 log 1/beta) <= beta."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    lg = math.log(1 / _check_beta(beta, allow_one=True))
    return k + 2 * math.sqrt(k * lg) + 2 * lg


def univariate_gaussian_tail(sigma: float, beta: float) -> float:
    """P(|X - mu| >= sigma sqrt(2 log(2/beta))) <= beta."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma * math.sqrt(2 * math.log(2 / _check_beta(beta)))


def eta_empirical_cov_bound(d: int, n: int, beta: float) -> float:
    """Relative spectral error of the empirical second-moment matrix.

    ``2s + s^2`` with ``s = sqrt(d/n) + sqrt(2 log(2/beta)/n)``; holds with
    probability 1 - beta for Gaussian data.
    """
    p = TailParams(d, n, beta)
    s = math.sqrt(p.d / p.n) + math.sqrt(2 * math.log(2 / p.beta) / p.n)
    return 2 * s + s * s


def gauss_spec_factor(d: int, beta: float) -> float:
    """Spectral-norm bound of a symmetric Gaussian matrix, per unit entry std.

    Holds with probability 1 - beta.  Requires d >= 2 (the log d terms
    degenerate at d = 1).
    """
    if d < 2:
        raise ValueError(f"the symmetric Gaussian spectral bound needs d >= 2, got {d!r}")
    beta = _check_beta(beta)
    ld = math.log(d)
    q = (ld / d) ** (1 / 3)
    return (2 * math.sqrt(d)
            + 2 * d ** (1 / 6) * ld ** (1 / 3)
            + 6 * (1 + q) * math.sqrt(ld) / math.sqrt(math.log(1 + q))
            + 2 * math.sqrt(2 * math.log(1 / beta)))


def nu_noise_spectral_bound(d: int, n: int, rho: float, beta: float) -> float:
    """Spectral bound on the privacy noise matrix added to the clipped covariance.

    The entry std is gamma^2 / (n sqrt(rho)) where gamma = gamma_norm_bound(d, n, beta).
    """
    p = TailParams(d, n, beta)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    g = gamma_norm_bound(p.d, p.n, p.beta)
    return g * g / (p.n * math.sqrt(rho)) * gauss_spec_factor(p.d, p.beta)


def smallest_n(pred, n_max: int = 10**12) -> int:
    """Smallest integer n >= 1 with ``pred(n)`` true, for predicates monotone in n."""
    hi = 1
    while not pred(hi):
        hi *= 2
        if hi > n_max:
            raise ValueError(f"no n <= {n_max} satisfies the condition")
    lo = hi // 2
    # invariant: pred(hi) true, pred(lo) false (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi
