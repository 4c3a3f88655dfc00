import math

import numpy as np
import pytest

from privest.metrics import trimmed_mean
from privest.privacy import split_budget, split_failure
from privest.univariate import (Interval, UnivariateConfig, _uvv_clip_factor, difference_pairs,
                                uvm_half_width, uvm_path, uvm_rec, uvm_step, uvv_path, uvv_rec,
                                uvv_step, uvv_width_factor)


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    iv = Interval(-1.0, 3.0)
    assert iv.width == 4.0 and iv.midpoint == 1.0 and 0.0 in iv and 5.0 not in iv


def test_uvm_half_width_value():
    # mpmath: Delta = (20 + 2 sqrt(2 ln 40000))/1000, half = sqrt(2 (1e-3 + Delta^2/0.5) ln 40)
    assert math.isclose(uvm_half_width(20.0, 1.0, 1000, 0.25, 0.05), 0.14129803375282404,
                        rel_tol=1e-12)


def test_uvm_half_width_vanishes():
    widths = [uvm_half_width(20.0, 1.0, n, 0.25, 0.05) for n in (10**3, 10**5, 10**7)]
    assert widths[0] > widths[1] > widths[2] and widths[2] < 1e-3


def test_uvm_step_clips_and_noises():
    # with rho = inf there is no noise: the output is centered at the clipped mean
    x = np.array([-100.0, 0.0, 0.5, 100.0])
    out = uvm_step(x, Interval(-1.0, 1.0), 1.0, math.inf, 0.1, np.random.default_rng(0))
    pad = math.sqrt(2 * math.log(2 * 4 / 0.1))
    assert math.isclose(out.midpoint, (0.5 + 0.0) / 4, abs_tol=1e-12)
    assert out.width == pytest.approx(2 * math.sqrt(2 * (1 / 4) * math.log(2 / 0.1)))
    assert pad > 1  # both outliers were clipped symmetrically


def test_uvm_step_coverage():
    hits = 0
    for s in range(500):
        rng = np.random.default_rng(s)
        x = rng.standard_normal(1000)
        hits += 0.0 in uvm_step(x, Interval(-10, 10), 1.0, 0.25, 0.05, rng)
    assert hits >= 500 * (1 - 2 * 0.05)


def test_uvm_rec_t1_is_naive():
    rng = np.random.default_rng(3)
    x = rng.normal(2.0, 1.0, 500)
    est = uvm_rec(x, Interval(-50, 50), 1.0, UnivariateConfig(1, split_budget(0.5, 1)),
                  np.random.default_rng(9))
    b = 0.1 / 4
    pad = math.sqrt(2 * math.log(2 * 500 / b))
    delta = (100 + 2 * pad) / 500
    naive = np.clip(x, -50 - pad, 50 + pad).mean() + delta / math.sqrt(2 * 0.5) * np.random.default_rng(9).normal(0, 1, ())
    assert math.isclose(est, naive, rel_tol=1e-12, abs_tol=1e-14)


def test_uvm_rec_accuracy():
    cfg = UnivariateConfig(8, split_budget(0.5, 8))
    priv, base = [], []
    for s in range(500):
        rng = np.random.default_rng(s)
        x = rng.standard_normal(2000)
        priv.append(abs(uvm_rec(x, Interval(-100, 100), 1.0, cfg, rng)))
        base.append(abs(x.mean()))
    assert trimmed_mean(priv) <= 1.5 * trimmed_mean(base)


def test_uvm_scale_equivariance():
    x = np.random.default_rng(1).standard_normal(300)
    cfg = UnivariateConfig(3, split_budget(0.5, 3))
    a = uvm_rec(x, Interval(-20, 20), 1.0, cfg, np.random.default_rng(4))
    c = 8.0  # power of two keeps the arithmetic exact
    b = uvm_rec(c * x, Interval(-20 * c, 20 * c), c * c, cfg, np.random.default_rng(4))
    assert math.isclose(b, c * a, rel_tol=1e-12)


def test_uvm_accounting():
    x = np.random.default_rng(1).standard_normal(300)
    cfg = UnivariateConfig(6, split_budget(0.7, 6))
    run = uvm_path(x, Interval(-5, 5), 1.0, cfg, np.random.default_rng(0))
    assert math.isclose(run.rho_spent, 0.7, rel_tol=1e-12)
    assert len(run.intervals) == 7


def test_uvv_clip_constants():
    k = _uvv_clip_factor(0.05)
    assert math.isclose(100 * k, 1045.3101312312553, rel_tol=1e-12)
    assert math.isclose(100 * k / 4000, 0.26132753280781, rel_tol=1e-12)


def test_uvv_step_output_inside_input():
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = rng.normal(0, math.sqrt(rng.uniform(0.1, 50)), 100)
        iv = Interval(1.0, 100.0)
        out = uvv_step(x, iv, 0.05, 0.05, rng)
        assert iv.lo <= out.lo <= out.hi <= iv.hi


def test_uvv_step_rejects_nonpositive_lower():
    with pytest.raises(ValueError):
        uvv_step(np.ones(4), Interval(0.0, 1.0), 0.5, 0.1, np.random.default_rng(0))


def test_uvv_step_coverage():
    hits = 0
    for s in range(500):
        rng = np.random.default_rng(s)
        x = rng.normal(0, math.sqrt(5), 4000)
        hits += 5.0 in uvv_step(x, Interval(1, 100), 0.25, 0.05, rng)
    assert hits >= 500 * (1 - 2 * 0.05)


def test_uvv_width_factor_matches_step():
    # with rho = inf only the sampling terms remain; before clamping the width is u * factor
    n, b = 10**6, 0.05
    x = np.random.default_rng(0).normal(0, 1, n)
    out = uvv_step(x, Interval(0.5, 2.0), math.inf, b, np.random.default_rng(0))
    lg = math.log(4 / b)
    assert math.isclose(out.width, 2.0 * (4 * math.sqrt(lg / n) + 2 * lg / n), rel_tol=1e-9)
    assert math.isclose(uvv_width_factor(n, 1e300, b), 4 * math.sqrt(lg / n) + 2 * lg / n,
                        rel_tol=1e-9)


def test_uvv_rec_t1_is_naive():
    x = np.random.default_rng(5).normal(0, 2, 800)
    est = uvv_rec(x, Interval(0.5, 50), UnivariateConfig(1, split_budget(0.5, 1)),
                  np.random.default_rng(7))
    b = 0.1 / 4
    cap = 50 * (1 + 2 * math.sqrt(math.log(1 / b)) + 2 * math.log(1 / b))
    delta = cap / 800
    z = np.clip(x * x, 0, cap).mean() + delta / math.sqrt(1.0) * np.random.default_rng(7).normal(0, 1, ())
    lg = math.log(4 / b)
    lo = z - delta * math.sqrt(lg / 0.5) - 2 * 50 * (math.sqrt(lg / 800) + lg / 800)
    hi = z + delta * math.sqrt(lg / 0.5) + 2 * 50 * math.sqrt(lg / 800)
    lo, hi = min(max(lo, 0.5), 50), min(max(hi, 0.5), 50)
    assert math.isclose(est, (lo + hi) / 2, rel_tol=1e-12)


def test_uvv_rec_accuracy():
    cfg = UnivariateConfig(10, split_budget(0.5, 10))
    errs = []
    for s in range(500):
        rng = np.random.default_rng(s)
        x = rng.normal(0, math.sqrt(3), 5000)
        errs.append(abs(uvv_rec(x, Interval(0.1, 100), cfg, rng) / 3 - 1))
    assert trimmed_mean(errs) <= 0.1


def test_uvv_ratio_shrinks():
    rng = np.random.default_rng(11)
    x = rng.normal(0, math.sqrt(3), 5000)
    run = uvv_path(x, Interval(0.1, 100), UnivariateConfig(10, split_budget(0.5, 10)), rng)
    ratios = [iv.hi / iv.lo for iv in run.intervals]
    C = 4.0
    for a, b in zip(ratios, ratios[1:]):
        if a > C:
            assert b < a
    assert ratios[-1] <= C


def test_difference_pairs():
    assert np.array_equal(difference_pairs([2.5, 2.5]), [0.0])
    assert math.isclose(difference_pairs([3.0, 1.0])[0], math.sqrt(2))
    with pytest.raises(ValueError):
        difference_pairs([1.0, 2.0, 3.0])
    x = np.random.default_rng(0).normal(7.0, 2.0, 200_000)
    assert abs(difference_pairs(x).var() / 4.0 - 1) < 0.05


def test_split_failure_used_in_path():
    # (t-1) * beta/(4(t-1)) + beta/4: the literal split only uses half the failure mass
    assert math.isclose(sum(split_failure(0.1, 6)), 0.05)
