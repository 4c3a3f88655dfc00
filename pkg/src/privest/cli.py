"""``privest`` command line: single-shot estimates on CSV files and benchmark sweeps."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import harness
from .covariance import CovConfig, CovarianceConfigError, mvc_path, reduce_general_covariance, restore_covariance
from .csvio import CSVError, format_matrix, read_matrix, write_matrix
from .datagen import DistributionSpec, materialize
from .linalg import NotPositiveDefinite
from .mean import ConfidenceBall, MeanConfig, mean_with_cov_proxy, mvm_path, radius_recurrence
from .pca import private_pca
from .privacy import PrivacyError, split_budget
from .univariate import Interval, UnivariateConfig, difference_pairs, uvm_path, uvv_path

DIST_NAMES = {"gaussian": "gaussian", "laplace": "laplace", "student-t": "student_t3"}

# practical defaults used unless --faithful is given
PRACTICAL = {"mean_clip": 0.6, "cov_clip": 0.5, "cov_shrink": 0.5}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, message: str, code: int = 1):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _int_list(s: str) -> list[int]:
    return [_positive_int(x) for x in s.split(",") if x.strip()]


def _float_list(s: str) -> list[float]:
    return [_positive_float(x) for x in s.split(",") if x.strip()]


def _fmt(x: float) -> str:
    return repr(float(x))


def _data(args, cov_shape_ok: bool = True) -> np.ndarray:
    """Samples from --input, or synthetic draws from --n/--d/--dist when no file is given."""
    if args.input:
        return read_matrix(args.input)
    if args.n is None or args.d is None:
        raise UsageError("give --input, or --n and --d for synthetic data")
    spec = DistributionSpec(DIST_NAMES[args.dist], args.d,
                            cov_shape=args.cov_shape if cov_shape_ok else "identity",
                            kappa=getattr(args, "kappa", None))
    X, _, _ = materialize(spec, args.n, harness.trial_rng(args.seed, 0))
    return X


def _estimator_rng(args) -> np.random.Generator:
    return harness.trial_rng(args.seed, 1)


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands

def cmd_mean(args) -> int:
    X = _data(args, cov_shape_ok=False)
    n, d = X.shape
    clip = args.clip_multiplier or (1.0 if args.faithful else PRACTICAL["mean_clip"])
    config = MeanConfig(args.t, split_budget(args.rho, args.t), args.beta, clip)
    ball = ConfidenceBall(np.zeros(d), args.radius)
    schedule = radius_recurrence(args.radius, d, n, config.budget, args.beta, clip)
    rng = _estimator_rng(args)
    if args.cov_proxy:
        P = read_matrix(args.cov_proxy)
        if P.shape != (d, d):
            raise ValueError(f"covariance proxy is {P.shape[0]}x{P.shape[1]}, data has d={d}")
        est = mean_with_cov_proxy(X, ball, P, config, rng)
        rho_spent = args.rho
    else:
        run = mvm_path(X, ball, config, rng)
        est, rho_spent = run.estimate, run.rho_spent
    print("radius_schedule," + ",".join(_fmt(r) for r in schedule))
    print(f"rho_spent,{_fmt(rho_spent)}")
    print("estimate," + ",".join(_fmt(v) for v in est))
    if args.output:
        write_matrix(args.output, est[None, :])
    return 0


def cmd_cov(args) -> int:
    X = _data(args)
    if not args.mean_known:
        X = difference_pairs(X[: X.shape[0] - X.shape[0] % 2])
    n, d = X.shape
    faithful = args.faithful
    config = CovConfig(
        args.t, split_budget(args.rho, args.t), args.beta,
        shrink_aggressiveness=args.shrink or (1.0 if faithful else PRACTICAL["cov_shrink"]),
        clip_multiplier=args.clip_multiplier or (1.0 if faithful else PRACTICAL["cov_clip"]),
        clamp_negative=not faithful, psd_output=args.psd)
    prior = None
    if args.prior_cov:
        prior = read_matrix(args.prior_cov)
        if prior.shape != (d, d):
            raise ValueError(f"prior covariance is {prior.shape[0]}x{prior.shape[1]}, data has d={d}")
        X, u = reduce_general_covariance(X, prior, args.kappa)
    else:
        u = args.kappa
    run = mvc_path(X, None, u, config, _estimator_rng(args))
    est = run.estimate if prior is None else restore_covariance(run.estimate, prior)
    _emit(args, format_matrix(est))
    print(f"rho_spent,{_fmt(run.rho_spent)}", file=sys.stderr)
    return 0


def _univariate_input(args) -> np.ndarray:
    if args.input:
        X = read_matrix(args.input)
        if X.shape[1] != 1:
            raise ValueError(f"univariate input must have one column, got {X.shape[1]}")
        return X[:, 0]
    if args.n is None:
        raise UsageError("give --input, or --n for synthetic data")
    rng = harness.trial_rng(args.seed, 0)
    return math.sqrt(args.sigma2 or 1.0) * rng.standard_normal(args.n) + (args.true_mean or 0.0)


def _print_intervals(run) -> None:
    for k, iv in enumerate(run.intervals):
        print(f"interval_{k},{_fmt(iv.lo)},{_fmt(iv.hi)}")
    print(f"rho_spent,{_fmt(run.rho_spent)}")
    print(f"estimate,{_fmt(run.estimate)}")


def cmd_uv_mean(args) -> int:
    if args.sigma2 is None:
        raise UsageError("uv-mean needs --sigma2")
    x = _univariate_input(args)
    config = UnivariateConfig(args.t, split_budget(args.rho, args.t), args.beta, args.sigma2)
    _print_intervals(uvm_path(x, Interval(args.lo, args.hi), args.sigma2, config, _estimator_rng(args)))
    return 0


def cmd_uv_var(args) -> int:
    x = _univariate_input(args)
    if not args.mean_known:
        x = difference_pairs(x[: x.size - x.size % 2])
    config = UnivariateConfig(args.t, split_budget(args.rho, args.t), args.beta)
    _print_intervals(uvv_path(x, Interval(args.lo, args.hi), config, _estimator_rng(args)))
    return 0


def cmd_experiment(args) -> int:
    family = harness.EXPERIMENTS.get(args.name, ("",))[0]
    scale = args.radius if family == "mean" else args.kappa
    overrides = dict(d=args.d, n=args.n, rho=args.rho, scale=scale, t_list=args.t,
                     sweep=args.sweep, beta=args.beta, trials=args.trials, trim=args.trim,
                     seed=args.seed, dist=DIST_NAMES[args.dist] if args.dist else None,
                     cov_shape=args.cov_shape, metric=args.metric)
    cfg = harness.make_config(args.name, faithful=args.faithful, **overrides)
    rows = harness.run_experiment(cfg, workers=args.workers)
    _emit(args, harness.format_results(rows))
    return 0


def cmd_pca(args) -> int:
    if args.input:
        X = read_matrix(args.input)
    else:
        if args.n is None or args.d is None:
            raise UsageError("give --input, or --n and --d for the planted-spectrum benchmark")
        X = harness.pca_benchmark_data(args.d, args.n, harness.trial_rng(args.seed, 0))
    faithful = args.faithful
    res = private_pca(
        X, scale_factor=args.scale_factor, kappa=args.kappa,
        rho=math.inf if args.noiseless else args.rho, t=args.t, k=args.k,
        rng=_estimator_rng(args), beta=args.beta, mean_known=args.mean_known,
        reference=args.reference,
        shrink=args.shrink or (1.0 if faithful else PRACTICAL["cov_shrink"]),
        clip_multiplier=args.clip_multiplier or (1.0 if faithful else PRACTICAL["cov_clip"]),
        clamp_negative=not faithful)
    _emit(args, format_matrix(res.components.T))
    if res.alignments is not None:
        for i, a in enumerate(res.alignments):
            print(f"alignment_pc{i + 1},{_fmt(a)}", file=sys.stderr)
    if args.projection_output:
        write_matrix(args.projection_output, res.projection)
    return 0


# ------------------------------------------------------------------ parser

def _common(p: argparse.ArgumentParser, t_default=2, t_list=False) -> None:
    p.add_argument("--input", help="numeric CSV, one sample per row (header optional)")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--n", type=_positive_int, help="synthetic sample size when --input is absent")
    p.add_argument("--d", type=_positive_int, help="synthetic dimension when --input is absent")
    p.add_argument("--rho", type=_positive_float, default=None if t_list else 0.5,
                   help="total zCDP budget")
    p.add_argument("--beta", type=float, default=0.1, help="failure probability")
    if t_list:
        p.add_argument("--t", type=_int_list, help="comma-separated iteration counts")
    else:
        p.add_argument("--t", type=_positive_int, default=t_default, help="number of steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", choices=list(DIST_NAMES), default=None if t_list else "gaussian")
    p.add_argument("--cov-shape", choices=["identity", "skewed"], default=None if t_list else "identity")
    p.add_argument("--faithful", action="store_true",
                   help="use the textbook constants instead of the tuned practical ones")
    p.add_argument("--clip-multiplier", type=_positive_float,
                   help="scale of the clipping radius, in (0, 1]")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="privest", description="Iterative private mean and covariance estimation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mean-est", help="private mean of a CSV of samples")
    _common(p)
    p.add_argument("--radius", type=_positive_float, required=True,
                   help="the mean is known to lie within this distance of the origin")
    p.add_argument("--cov-proxy", help="CSV d x d covariance proxy; data are whitened by it")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("cov-est", help="private covariance of a CSV of samples")
    _common(p)
    p.add_argument("--kappa", type=_positive_float, required=True,
                   help="upper bound: Sigma <= kappa * I (or kappa * prior)")
    p.add_argument("--mean-known", action=argparse.BooleanOptionalAction, default=True,
                   help="data are zero-mean; otherwise consecutive pairs are differenced")
    p.add_argument("--prior-cov", help="CSV d x d matrix A with A <= Sigma <= kappa A")
    p.add_argument("--shrink", type=_positive_float, help="shrink aggressiveness, in (0, 1]")
    p.add_argument("--psd", action="store_true", help="project the estimate onto the PSD cone")
    p.set_defaults(func=cmd_cov)

    for name, func, help_ in (("uv-mean", cmd_uv_mean, "private mean of a univariate Gaussian"),
                              ("uv-var", cmd_uv_var, "private variance of a univariate Gaussian")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--lo", type=float, required=True, help="lower end of the prior interval")
        p.add_argument("--hi", type=float, required=True, help="upper end of the prior interval")
        p.add_argument("--sigma2", type=_positive_float, help="known variance (uv-mean)")
        p.add_argument("--true-mean", type=float, help="mean of synthetic data")
        if name == "uv-var":
            p.add_argument("--mean-known", action=argparse.BooleanOptionalAction, default=True)
        p.set_defaults(func=func)

    p = sub.add_parser("experiment", help="run a benchmark sweep and write a CSV table")
    p.add_argument("name", choices=list(harness.EXPERIMENTS))
    _common(p, t_list=True)
    p.add_argument("--radius", type=_positive_float, help="R for mean experiments")
    p.add_argument("--kappa", type=_positive_float, help="kappa for covariance experiments")
    p.add_argument("--sweep", type=_float_list, help="comma-separated values of the swept axis")
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--trim", type=float)
    p.add_argument("--metric", help="error metric (default depends on the experiment)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("pca", help="top-k private principal components")
    _common(p, t_default=5)
    p.add_argument("--scale-factor", type=_positive_float, default=20.0)
    p.add_argument("--kappa", type=_positive_float, default=30.0)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--mean-known", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--shrink", type=_positive_float)
    p.add_argument("--reference", action="store_true",
                   help="report alignment with non-private PCA (on stderr)")
    p.add_argument("--noiseless", action="store_true", help="switch privacy noise off (debugging)")
    p.add_argument("--projection-output", help="CSV for the data projected on the components")
    p.set_defaults(func=cmd_pca)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), 2)
    except CSVError as exc:
        return _fail("CSVError", str(exc))
    except (CovarianceConfigError, NotPositiveDefinite, PrivacyError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
