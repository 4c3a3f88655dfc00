"""Seeded synthetic data for the benchmark experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Kind = Literal["gaussian", "laplace", "student_t3"]
KINDS = ("gaussian", "laplace", "student_t3")


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix, signs fixed by diag(R)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d!r}")
    G = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def skewed_covariance(d: int, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """Randomly rotated diag(kappa, ..., kappa, 1, ..., 1) with d/2 of each."""
    if d % 2:
        raise ValueError(f"skewed covariance needs even d, got {d}")
    if not kappa >= 1:
        raise ValueError(f"kappa must be >= 1, got {kappa!r}")
    Q = random_rotation(d, rng)
    ev = np.r_[np.full(d // 2, float(kappa)), np.ones(d // 2)]
    S = (Q * ev) @ Q.T
    return (S + S.T) / 2


def planted_covariance(d: int, top, tail, rng: np.random.Generator) -> np.ndarray:
    """Randomly rotated covariance with spectrum ``top`` followed by ``tail``."""
    ev = np.r_[np.asarray(top, float), np.asarray(tail, float)]
    if ev.size != d:
        raise ValueError(f"spectrum has {ev.size} entries, expected {d}")
    Q = random_rotation(d, rng)
    S = (Q * ev) @ Q.T
    return (S + S.T) / 2


@dataclass
class DistributionSpec:
    """What to sample: a coordinatewise unit-variance law, shifted and correlated.

    ``cov_shape`` is "identity", "skewed" (needs ``kappa``) or "explicit"
    (needs ``cov``).  A skewed covariance is drawn from the same generator as
    the data, once per :func:`materialize` call.
    """

    kind: Kind = "gaussian"
    d: int = 2
    mean: np.ndarray | None = None
    cov_shape: str = "identity"
    kappa: float | None = None
    cov: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.cov_shape not in ("identity", "skewed", "explicit"):
            raise ValueError(f"unknown cov_shape {self.cov_shape!r}")
        if self.cov_shape == "skewed":
            if self.d % 2:
                raise ValueError("skewed covariance needs even d")
            if self.kappa is None:
                raise ValueError("skewed covariance needs kappa")
        if self.cov_shape == "explicit":
            C = np.asarray(self.cov, dtype=float)
            if C.shape != (self.d, self.d) or not np.allclose(C, C.T):
                raise ValueError("explicit covariance must be a symmetric d x d matrix")
            if np.linalg.eigvalsh(C)[0] <= 0:
                raise ValueError("explicit covariance must be positive definite")
            self.cov = C
        if self.mean is not None:
            self.mean = np.asarray(self.mean, dtype=float)
            if self.mean.shape != (self.d,):
                raise ValueError("mean has the wrong dimension")

    def covariance(self, rng: np.random.Generator | None = None) -> np.ndarray:
        if self.cov_shape == "identity":
            return np.eye(self.d)
        if self.cov_shape == "explicit":
            return self.cov
        if rng is None:
            raise ValueError("a skewed covariance needs a generator")
        return skewed_covariance(self.d, self.kappa, rng)


def _unit_noise(kind: str, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "gaussian":
        return rng.standard_normal((n, d))
    if kind == "laplace":
        return rng.laplace(0.0, 1 / math.sqrt(2), size=(n, d))
    # Var(t_3) = 3
    return rng.standard_t(3, size=(n, d)) / math.sqrt(3)


def sample(spec: DistributionSpec, n: int, rng: np.random.Generator,
           cov: np.ndarray | None = None) -> np.ndarray:
    """n rows drawn from ``spec``; pass ``cov`` to reuse a materialized covariance."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if cov is None:
        cov = spec.covariance(rng)
    X = _unit_noise(spec.kind, n, spec.d, rng)
    if not np.array_equal(cov, np.eye(spec.d)):
        X = X @ np.linalg.cholesky(cov).T
    if spec.mean is not None:
        X = X + spec.mean
    return X


def materialize(spec: DistributionSpec, n: int, rng: np.random.Generator):
    """Draw the covariance (if random) and then the data; returns (X, mean, cov)."""
    cov = spec.covariance(rng)
    X = sample(spec, n, rng, cov=cov)
    mean = np.zeros(spec.d) if spec.mean is None else spec.mean
    return X, mean, cov
