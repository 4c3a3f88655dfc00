"""zCDP budgets, accounting and the Gaussian mechanism.

Every function that draws noise takes an explicit ``numpy.random.Generator``;
nothing here touches global random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class PrivacyError(ValueError):
    """Invalid privacy parameter or budget overrun."""


def _check_rho(rho: float, name: str = "rho") -> float:
    rho = float(rho)
    if not rho > 0 or math.isnan(rho):
        raise PrivacyError(f"{name} must be positive, got {rho!r}")
    return rho


@dataclass(frozen=True)
class PrivacyBudget:
    """A total zCDP budget and its per-iteration schedule."""

    rho_total: float
    per_step: tuple[float, ...]

    def __post_init__(self):
        _check_rho(self.rho_total, "rho_total")
        if len(self.per_step) == 0:
            raise PrivacyError("per_step must be nonempty")
        for r in self.per_step:
            _check_rho(r, "per_step entry")
        total = math.fsum(self.per_step)
        if not math.isclose(total, self.rho_total, rel_tol=1e-12):
            raise PrivacyError(
                f"per_step sums to {total!r}, expected rho_total={self.rho_total!r}")

    @property
    def t(self) -> int:
        return len(self.per_step)

    @classmethod
    def from_steps(cls, steps: Sequence[float]) -> "PrivacyBudget":
        steps = tuple(float(s) for s in steps)
        return cls(math.fsum(steps), steps)


def split_budget(rho_total: float, t: int) -> PrivacyBudget:
    """Give 3/4 of the budget to the final step and split the rest evenly.

    With ``t == 1`` the whole budget goes to the single step.
    """
    rho_total = _check_rho(rho_total, "rho_total")
    if int(t) != t or t < 1:
        raise PrivacyError(f"t must be a positive integer, got {t!r}")
    t = int(t)
    if t == 1:
        return PrivacyBudget(rho_total, (rho_total,))
    early = rho_total / (4 * (t - 1))
    return PrivacyBudget(rho_total, (early,) * (t - 1) + (3 * rho_total / 4,))


def split_failure(beta: float, t: int) -> list[float]:
    """Per-step failure probabilities: beta/4(t-1) in the loop, beta/4 at the end."""
    beta = float(beta)
    if not 0 < beta < 1:
        raise PrivacyError(f"beta must lie in (0, 1), got {beta!r}")
    if t < 1:
        raise PrivacyError(f"t must be a positive integer, got {t!r}")
    if t == 1:
        return [beta / 4]
    return [beta / (4 * (t - 1))] * (t - 1) + [beta / 4]


class ZCDPAccountant:
    """Additive zCDP composition: running ``rho`` values are summed."""

    def __init__(self, limit: float | None = None):
        self.limit = None if limit is None else _check_rho(limit, "limit")
        self._spent: list[float] = []

    def spend(self, rho: float) -> None:
        rho = _check_rho(rho)
        if self.limit is not None and math.fsum(self._spent + [rho]) > self.limit * (1 + 1e-12):
            raise PrivacyError(
                f"spending {rho!r} would exceed the limit {self.limit!r}")
        self._spent.append(rho)

    @property
    def spent(self) -> float:
        return math.fsum(self._spent)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(self._spent)


@dataclass(frozen=True)
class Sensitivity:
    """l2 sensitivity of a statistic, in data units."""

    l2: float

    def __post_init__(self):
        if not (math.isfinite(self.l2) and self.l2 >= 0):
            raise PrivacyError(f"sensitivity must be finite and nonnegative, got {self.l2!r}")


@dataclass(frozen=True)
class NoiseScale:
    sigma: float = field()

    def __post_init__(self):
        if not (self.sigma >= 0 and not math.isnan(self.sigma)):
            raise PrivacyError(f"noise scale must be nonnegative, got {self.sigma!r}")

    @classmethod
    def from_sensitivity(cls, delta: Sensitivity | float, rho: float) -> "NoiseScale":
        """Standard deviation ``delta / sqrt(2 rho)`` giving rho-zCDP.

        ``rho = inf`` is accepted and yields zero noise (debugging only).
        """
        l2 = delta.l2 if isinstance(delta, Sensitivity) else Sensitivity(float(delta)).l2
        rho = _check_rho(rho)
        return cls(l2 / math.sqrt(2 * rho))


def gaussian_mechanism(value, delta: Sensitivity | float, rho: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Release ``value`` plus i.i.d. N(0, (delta/sqrt(2 rho))^2) noise per coordinate."""
    value = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(value)):
        raise PrivacyError("gaussian_mechanism received non-finite values")
    sigma = NoiseScale.from_sensitivity(delta, rho).sigma
    noise = rng.normal(0.0, 1.0, size=value.shape)
    return value + sigma * noise


def symmetric_gaussian_noise(d: int, sigma: NoiseScale | float,
                             rng: np.random.Generator) -> np.ndarray:
    """Symmetric d x d matrix with i.i.d. N(0, sigma^2) upper triangle and diagonal.

    Entries are drawn in row-major order of the upper triangle.
    """
    if int(d) != d or d < 1:
        raise PrivacyError(f"d must be a positive integer, got {d!r}")
    d = int(d)
    s = sigma.sigma if isinstance(sigma, NoiseScale) else NoiseScale(float(sigma)).sigma
    iu = np.triu_indices(d)
    Y = np.zeros((d, d))
    Y[iu] = s * rng.normal(0.0, 1.0, size=len(iu[0]))
    return Y + np.triu(Y, 1).T


def zcdp_to_approx_dp(rho: float, delta: float) -> float:
    """epsilon such that rho-zCDP implies (epsilon, delta)-DP."""
    rho, delta = float(rho), float(delta)
    if not 0 < delta < 1:
        raise PrivacyError(f"delta must lie in (0, 1), got {delta!r}")
    if rho < 0:
        raise PrivacyError(f"rho must be nonnegative, got {rho!r}")
    return rho + 2 * math.sqrt(rho * math.log(1 / delta))


def pure_dp_to_zcdp(epsilon: float) -> float:
    """(epsilon, 0)-DP implies (epsilon^2 / 2)-zCDP."""
    epsilon = float(epsilon)
    if epsilon < 0:
        raise PrivacyError(f"epsilon must be nonnegative, got {epsilon!r}")
    return 0.5 * epsilon * epsilon
