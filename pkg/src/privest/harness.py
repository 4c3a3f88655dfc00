"""Monte Carlo sweeps over the synthetic benchmark settings.

Every trial draws its data and noise from streams derived from
``(seed, sweep index, trial index, ...)`` with :class:`numpy.random.SeedSequence`,
so results do not depend on the number of workers or on scheduling order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .covariance import CovConfig, mvc_path
from .datagen import DistributionSpec, materialize, planted_covariance
from .linalg import NotPositiveDefinite
from .mean import ConfidenceBall, MeanConfig, mvm_path
from .metrics import l2_error, mahalanobis_cov_error, trimmed_mean
from .pca import private_pca
from .privacy import split_budget

SQRT = math.sqrt

# name -> (estimator family, swept axis, defaults)
EXPERIMENTS: dict[str, tuple[str, str, dict]] = {
    "mean_vs_n": ("mean", "n", dict(
        d=50, rho=0.5, scale=10 * SQRT(50), t_list=[1, 2, 3, 4, 10],
        sweep=[1000 * i for i in range(1, 11)])),
    "mean_vs_R": ("mean", "scale", dict(
        d=50, n=1000, rho=0.5, t_list=[1, 2, 4, 10],
        sweep=[SQRT(50) * r for r in (10, 100, 1000, 10000)])),
    "mean_vs_rho": ("mean", "rho", dict(
        d=50, n=2000, scale=10 * SQRT(50), t_list=[1, 2, 4, 10],
        sweep=[0.01, 0.02, 0.04, 0.1, 0.2, 0.5])),
    "heavy_tails": ("mean", "n", dict(
        d=50, rho=0.5, scale=10 * SQRT(50), t_list=[2], dist="laplace",
        metric="l2_excess", sweep=[1000 * i for i in range(1, 11)])),
    "cov_vs_n": ("cov", "n", dict(
        d=10, rho=0.5, scale=10 * SQRT(10), t_list=[1, 2, 3, 4, 5],
        sweep=[1000 * i for i in range(2, 11)])),
    "cov_vs_kappa": ("cov", "scale", dict(
        d=10, n=7000, rho=0.5, t_list=[1, 2, 3, 4, 5],
        sweep=[10.0, 100.0, 1000.0, 10000.0])),
    "cov_vs_rho": ("cov", "rho", dict(
        d=10, n=8000, scale=10 * SQRT(10), t_list=[1, 2, 3, 4, 5],
        sweep=[0.01, 0.05, 0.1, 0.25, 0.5])),
    "pca": ("pca", "n", dict(
        d=20, rho=0.5, scale=30.0, t_list=[1, 3, 5], metric="alignment_pc1",
        trials=50, sweep=[1387])),
}

DEFAULT_METRIC = {"mean": "l2", "cov": "mahalanobis", "pca": "alignment_pc1"}
METRICS = {"mean": ("l2", "l2_excess"), "cov": ("mahalanobis",),
           "pca": ("alignment_pc1", "alignment_pc2")}

# data-side constants for the private PCA benchmark (spectrum after scaling)
PCA_SCALE_FACTOR = 20.0
PCA_TOP = (4.8, 1.2)


@dataclass
class ExperimentConfig:
    """A sweep over one axis (n, rho or the prior scale R/kappa)."""

    experiment: str
    d: int = 0
    n: int = 0
    rho: float = 0.0
    scale: float = 0.0  # R for mean experiments, kappa for covariance/PCA
    sweep: list = field(default_factory=list)
    t_list: list[int] = field(default_factory=list)
    beta: float = 0.1
    trials: int = 100
    trim: float = 0.1
    seed: int = 0
    dist: str = "gaussian"
    cov_shape: str = "identity"
    metric: str = ""
    # practical tuning knobs; set faithful=True for the textbook constants
    mean_clip: float = 0.6
    cov_clip: float = 0.5
    cov_shrink: float = 0.5
    cov_clamp: bool = True

    @property
    def family(self) -> str:
        return EXPERIMENTS[self.experiment][0]

    @property
    def axis(self) -> str:
        return EXPERIMENTS[self.experiment][1]

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {', '.join(EXPERIMENTS)}")
        if not self.sweep or not self.t_list:
            raise ValueError("sweep values and t_list must be nonempty")
        if any(int(t) != t or t < 1 for t in self.t_list):
            raise ValueError(f"t values must be positive integers, got {self.t_list}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.trim < 0.5:
            raise ValueError("trim must lie in [0, 0.5)")
        if self.metric not in METRICS[self.family]:
            raise ValueError(f"metric {self.metric!r} is not available for {self.experiment}")
        for v in self.sweep:
            if not v > 0:
                raise ValueError(f"sweep values must be positive, got {v!r}")
        return self

    def at(self, value) -> "ExperimentConfig":
        """Copy with the swept axis pinned to ``value``."""
        v = int(value) if self.axis == "n" else float(value)
        return replace(self, **{self.axis: v})


def make_config(experiment: str, faithful: bool = False, **overrides) -> ExperimentConfig:
    """Defaults for ``experiment``, updated by any non-None ``overrides``."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    family, _, defaults = EXPERIMENTS[experiment]
    kw = dict(defaults)
    kw.setdefault("metric", DEFAULT_METRIC[family])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(experiment, **kw)
    if faithful:
        cfg = replace(cfg, mean_clip=1.0, cov_clip=1.0, cov_shrink=1.0, cov_clamp=False)
    return cfg.validate()


@dataclass
class ResultRow:
    experiment: str
    method: str
    t: int | str
    n: int
    d: int
    rho: float
    R_or_kappa: float
    error_metric: str
    error_value: float
    trials: int
    seed: int
    rho_spent: float | str = ""
    failures: int = 0
    error: str = ""


COLUMNS = [f.name for f in fields(ResultRow)]


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


_FAILURES = (ValueError, NotPositiveDefinite)


def _mean_trial(cfg: ExperimentConfig, data_rng, est_rng_for):
    spec = DistributionSpec(cfg.dist, cfg.d)
    X, mu, _ = materialize(spec, cfg.n, data_rng)
    base = l2_error(X.mean(axis=0), mu)
    out = {("nonprivate", ""): (base, "")}
    ball = ConfidenceBall(np.zeros(cfg.d), cfg.scale)
    for t in cfg.t_list:
        config = MeanConfig(t, split_budget(cfg.rho, t), cfg.beta, cfg.mean_clip)
        try:
            run = mvm_path(X, ball, config, est_rng_for(t))
        except _FAILURES as exc:
            out[("private", t)] = (exc, "")
            continue
        err = l2_error(run.estimate, mu)
        out[("private", t)] = (err - base if cfg.metric == "l2_excess" else err, run.rho_spent)
    return out


def _cov_trial(cfg: ExperimentConfig, data_rng, est_rng_for):
    spec = DistributionSpec(cfg.dist, cfg.d, cov_shape=cfg.cov_shape, kappa=cfg.scale)
    X, _, Sigma = materialize(spec, cfg.n, data_rng)
    out = {("nonprivate", ""): (mahalanobis_cov_error(X.T @ X / cfg.n, Sigma), "")}
    for t in cfg.t_list:
        config = CovConfig(t, split_budget(cfg.rho, t), cfg.beta,
                           shrink_aggressiveness=cfg.cov_shrink,
                           clip_multiplier=cfg.cov_clip, clamp_negative=cfg.cov_clamp)
        try:
            run = mvc_path(X, None, cfg.scale, config, est_rng_for(t))
        except _FAILURES as exc:
            out[("private", t)] = (exc, "")
            continue
        out[("private", t)] = (mahalanobis_cov_error(run.estimate, Sigma), run.rho_spent)
    return out


def pca_benchmark_data(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Raw data whose covariance, after scaling by PCA_SCALE_FACTOR, has a planted top-2 spectrum."""
    tail = np.linspace(0.5, 0.05, d - len(PCA_TOP))
    cov = planted_covariance(d, PCA_TOP, tail, rng) / PCA_SCALE_FACTOR ** 2
    return rng.standard_normal((n, d)) @ np.linalg.cholesky(cov).T


def _pca_trial(cfg: ExperimentConfig, data_rng, est_rng_for):
    X = pca_benchmark_data(cfg.d, cfg.n, data_rng)
    comp = 0 if cfg.metric == "alignment_pc1" else 1
    out = {("nonprivate", ""): (1.0, "")}
    for t in cfg.t_list:
        try:
            res = private_pca(X, scale_factor=PCA_SCALE_FACTOR, kappa=cfg.scale, rho=cfg.rho,
                              t=t, k=comp + 1, rng=est_rng_for(t), beta=cfg.beta,
                              reference=True, shrink=cfg.cov_shrink,
                              clip_multiplier=cfg.cov_clip, clamp_negative=cfg.cov_clamp)
        except _FAILURES as exc:
            out[("private", t)] = (exc, "")
            continue
        out[("private", t)] = (res.alignments[comp], cfg.rho)
    return out


_TRIAL = {"mean": _mean_trial, "cov": _cov_trial, "pca": _pca_trial}


def run_trial(cfg: ExperimentConfig, sweep_index: int, trial: int) -> dict:
    """Errors of every method on one freshly drawn dataset."""
    pinned = cfg.at(cfg.sweep[sweep_index])
    data_rng = trial_rng(cfg.seed, sweep_index, trial, 0)
    return _TRIAL[cfg.family](
        pinned, data_rng, lambda t: trial_rng(cfg.seed, sweep_index, trial, 1, t))


def _run_task(args):
    cfg, i, k = args
    return (i, k), run_trial(cfg, i, k)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    cfg.validate()
    tasks = [(cfg, i, k) for i in range(len(cfg.sweep)) for k in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = dict(map(_run_task, tasks))

    rows = []
    for i, value in enumerate(cfg.sweep):
        pinned = cfg.at(value)
        per_method: dict = {}
        for k in range(cfg.trials):
            for key, val in results[(i, k)].items():
                per_method.setdefault(key, []).append(val)
        for (method, t), vals in per_method.items():
            errs = [v for v, _ in vals if not isinstance(v, Exception)]
            fails = [v for v, _ in vals if isinstance(v, Exception)]
            spent = [s for v, s in vals if not isinstance(v, Exception) and s != ""]
            metric = "l2" if (method == "nonprivate" and cfg.metric == "l2_excess") else cfg.metric
            rows.append(ResultRow(
                experiment=cfg.experiment, method=method, t=t, n=pinned.n, d=pinned.d,
                rho=pinned.rho, R_or_kappa=pinned.scale, error_metric=metric,
                error_value=trimmed_mean(errs, cfg.trim) if errs and not fails else math.nan,
                trials=cfg.trials, seed=cfg.seed,
                rho_spent=max(spent) if spent else "",
                failures=len(fails),
                error=f"{type(fails[0]).__name__}: {fails[0]}" if fails else ""))
    rows.sort(key=lambda r: (r.method, getattr(r, _ROW_AXIS[cfg.axis]), -1 if r.t == "" else r.t))
    return rows


_ROW_AXIS = {"n": "n", "rho": "rho", "scale": "R_or_kappa"}


def format_results(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in asdict(row).values()])
    return buf.getvalue()


def read_results(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def aggregate(rows: list[ResultRow], method: str = "private", t=None, **where) -> dict:
    """Map swept value -> error_value for one method (and t) from a result list."""
    out = {}
    for r in rows:
        if r.method != method or (t is not None and r.t != t):
            continue
        if any(getattr(r, k) != v for k, v in where.items()):
            continue
        out[(r.n, r.rho, r.R_or_kappa)] = r.error_value
    return out
