import math

import numpy as np
import pytest

from privest.bounds import eta_empirical_cov_bound, gamma_norm_bound, nu_noise_spectral_bound
from privest.covariance import (CovarianceConfigError, CovarianceState, CovConfig,
                                cov_halving_n, cov_sensitivity, mvc_path, mvc_rec, mvc_step,
                                noisy_second_moment, reduce_general_covariance,
                                restore_covariance)
from privest.datagen import skewed_covariance
from privest.mean import project_to_ball
from privest.privacy import split_budget


def _identity_moment_data(n, d):
    # rows sqrt(d) e_i cycled: second moment exactly I, every norm sqrt(d)
    X = np.zeros((n, d))
    X[np.arange(n), np.arange(n) % d] = math.sqrt(d)
    return X


def test_sensitivity_value_and_witness():
    assert cov_sensitivity(1.0, 1).l2 == math.sqrt(2)
    x, y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    gap = np.linalg.norm(np.outer(x, x) - np.outer(y, y), "fro")
    assert abs(gap - cov_sensitivity(1.0, 1).l2) <= 1e-12


def test_sensitivity_random_pairs(rng):
    T, n, d = 2.5, 7, 6
    bound = cov_sensitivity(T, n).l2
    for _ in range(10_000):
        x, y = rng.normal(size=(2, d)) * rng.uniform(0.1, 3)
        x, y = project_to_ball(np.array([x, y]), np.zeros(d), math.sqrt(T))
        assert np.linalg.norm(np.outer(x, x) - np.outer(y, y), "fro") / n <= bound * (1 + 1e-12)


def test_noise_calibration_example():
    X = _identity_moment_data(3000, 10)
    _, sigma = noisy_second_moment(X, np.eye(10), 0.125, 0.05, 1.0, np.random.default_rng(0))
    g = gamma_norm_bound(10, 3000, 0.05)
    assert math.isclose(g, 7.2788995507771447, rel_tol=1e-13)
    assert math.isclose(sigma, math.sqrt(2) * g * g / 3000 / math.sqrt(0.25), rel_tol=1e-13)
    assert math.isclose(sigma, 0.04995226565488701, rel_tol=1e-12)


def test_sensitivity_honesty_of_clipped_moment(rng):
    d, n = 4, 30
    g = gamma_norm_bound(d, n, 0.1)
    for _ in range(10_000):
        D = rng.normal(size=(n, d)) * 3
        D2 = D.copy()
        D2[rng.integers(n)] = rng.normal(size=d) * 5
        Z1 = sum(np.outer(w, w) for w in project_to_ball(D, np.zeros(d), g)) / n
        Z2 = sum(np.outer(w, w) for w in project_to_ball(D2, np.zeros(d), g)) / n
        assert np.linalg.norm(Z1 - Z2, "fro") <= math.sqrt(2) * g * g / n * (1 + 1e-12)


def test_noiseless_step():
    n, d = 5000, 4
    X = _identity_moment_data(n, d)
    st = CovarianceState(np.eye(d), np.eye(d) / 2)
    out = mvc_step(X, st, math.inf, 0.1, 1.0, np.random.default_rng(0))
    eta = eta_empirical_cov_bound(d, n, 0.1)
    assert np.allclose(out.L, (1 - eta) / (1 + eta) * np.eye(d), atol=1e-12)
    assert np.allclose(out.A, np.eye(d) / math.sqrt(1 + eta), atol=1e-12)
    assert np.allclose(out.Z, np.eye(d), atol=1e-12)


def test_state_invariants():
    with pytest.raises(ValueError):
        CovarianceState(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_config_validation():
    with pytest.raises(ValueError):
        CovConfig(2, split_budget(0.5, 3))
    with pytest.raises(ValueError):
        CovConfig(2, split_budget(0.5, 2), shrink_aggressiveness=0.0)


def test_sandwich_maintained():
    d, n, u = 6, 20_000, 50.0
    hits = 0
    for s in range(300):
        rng = np.random.default_rng(s)
        S = skewed_covariance(d, u, rng)
        X = rng.standard_normal((n, d)) @ np.linalg.cholesky(S).T
        st = CovarianceState(np.eye(d) / math.sqrt(u), np.eye(d) / u)
        out = mvc_step(X, st, 0.125, 0.05, 1.0, rng)
        M = out.A @ S @ out.A.T
        assert np.linalg.eigvalsh(out.L)[-1] <= 1 + 1e-8
        hits += (np.linalg.eigvalsh(M)[-1] <= 1 + 1e-12
                 and np.linalg.eigvalsh(M - out.L)[0] >= -1e-12)
    assert hits >= 300 * (1 - 2 * 0.05)


def test_rec_t1_is_naive():
    d, n, u = 5, 2000, 30.0
    rng = np.random.default_rng(1)
    X = rng.standard_normal((n, d)) * 2
    est = mvc_rec(X, None, u, CovConfig(1, split_budget(0.5, 1)), np.random.default_rng(3))
    b = 0.1 / 4
    g = gamma_norm_bound(d, n, b)
    W = X / math.sqrt(u)
    norms = np.linalg.norm(W, axis=1, keepdims=True)
    W = np.where(norms > g, W * (g / norms), W)
    sigma = math.sqrt(2) * g * g / n / math.sqrt(2 * 0.5)
    E = np.zeros((d, d))
    iu = np.triu_indices(d)
    E[iu] = np.random.default_rng(3).normal(0, 1, len(iu[0])) * sigma
    E = E + np.triu(E, 1).T
    naive = u * (W.T @ W / n + E)
    assert np.allclose(est, naive, rtol=1e-12, atol=1e-13)
    assert np.array_equal(est, est.T)


def test_rec_improves_on_naive_and_is_symmetric():
    d, n, u = 10, 8000, 10 * math.sqrt(10)
    errs = {1: [], 3: []}
    from privest.metrics import mahalanobis_cov_error
    for s in range(20):
        X = np.random.default_rng(s).standard_normal((n, d))
        for t in errs:
            cfg = CovConfig(t, split_budget(0.5, t), shrink_aggressiveness=0.5,
                            clip_multiplier=0.5, clamp_negative=True)
            est = mvc_rec(X, None, u, cfg, np.random.default_rng(100 + s))
            assert np.array_equal(est, est.T) and np.all(np.isfinite(est))
            errs[t].append(mahalanobis_cov_error(est, np.eye(d)))
    assert np.median(errs[3]) < np.median(errs[1])
    assert np.median(errs[3]) <= 2.0


def test_faithful_step_fails_loudly_when_underpowered():
    X = np.random.default_rng(0).standard_normal((300, 10))
    with pytest.raises(CovarianceConfigError):
        mvc_rec(X, None, 100.0, CovConfig(3, split_budget(0.5, 3)), np.random.default_rng(0))


def test_psd_output():
    X = np.random.default_rng(0).standard_normal((200, 6))
    cfg = CovConfig(1, split_budget(0.05, 1), psd_output=True)
    est = mvc_rec(X, None, 10.0, cfg, np.random.default_rng(0))
    assert np.linalg.eigvalsh(est)[0] >= -1e-12


def test_path_accounting():
    X = np.random.default_rng(0).standard_normal((5000, 4))
    cfg = CovConfig(4, split_budget(0.5, 4), shrink_aggressiveness=0.5, clip_multiplier=0.5,
                    clamp_negative=True)
    run = mvc_path(X, None, 20.0, cfg, np.random.default_rng(0))
    assert math.isclose(run.rho_spent, 0.5, rel_tol=1e-12)
    assert len(run.states) == 4  # initial state plus t - 1 refinements


def test_reduce_general_covariance():
    X = np.random.default_rng(0).normal(size=(10, 3))
    Y, u = reduce_general_covariance(X, np.eye(3), 7.0)
    assert np.allclose(Y, X) and u == 7.0
    Y, u = reduce_general_covariance(X, 4 * np.eye(3), 10.0)
    assert np.allclose(Y, X / 2) and u == 10.0
    assert np.allclose(restore_covariance(np.eye(3), 4 * np.eye(3)), 4 * np.eye(3))
    with pytest.raises(ValueError):
        reduce_general_covariance(X, np.eye(3), 0.5)
    with pytest.raises(np.linalg.LinAlgError):
        reduce_general_covariance(X, np.diag([1.0, 1.0, 0.0]), 2.0)


def test_reduce_round_trip():
    rng = np.random.default_rng(2)
    G = rng.normal(size=(4, 4))
    A = G @ G.T + np.eye(4)
    X = rng.multivariate_normal(np.zeros(4), 2 * A, 3000)
    cfg = CovConfig(2, split_budget(0.5, 2), clamp_negative=True, shrink_aggressiveness=0.5)
    Y, u = reduce_general_covariance(X, A, 3.0)
    est = restore_covariance(mvc_rec(Y, None, u, cfg, np.random.default_rng(1)), A)
    w, V = np.linalg.eigh(A)
    Ymanual = X @ ((V / np.sqrt(w)) @ V.T)
    direct = mvc_rec(Ymanual, None, 3.0, cfg, np.random.default_rng(1))
    S = (V * np.sqrt(w)) @ V.T
    assert np.allclose(est, S @ direct @ S, rtol=1e-9, atol=1e-12)


def test_halving_condition():
    d, rs, bs = 10, 0.0625, 0.0125
    n = cov_halving_n(d, rs, bs)
    total = lambda m: 2 * eta_empirical_cov_bound(d, m, bs) + nu_noise_spectral_bound(d, m, rs, bs)
    assert total(n) <= 0.5 * (1 - 0.25) < total(n - 1)
