import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schatte.blocks import (BlockingPlan, block_correlation, block_sums, block_sums_streaming,
                            build_plan, jackknife_se, variance_profile)
from schatte.blocks import _sum_var_and_se
from schatte.covariance import CovarianceModel
from schatte.errors import ConfigurationError, DomainError
from schatte.walk import IncrementDistribution, WalkConfig

U01 = IncrementDistribution.uniform(0, 1)
U05 = IncrementDistribution.uniform(0, 0.5)


def test_plan_examples():
    p = build_plan(100, 0.5, 0.25)
    assert (p.long_len, p.short_len, p.ell, len(p.tail)) == (10, 3, 7, 9)
    p = build_plan(16, 0.5, 0.5)
    assert (p.long_len, p.short_len, p.ell, len(p.tail)) == (4, 4, 2, 0)


def test_plan_rejects():
    with pytest.raises(ConfigurationError):
        build_plan(100, 0.25, 0.5)
    with pytest.raises(ConfigurationError):
        build_plan(100, 0.5, 0.0)
    with pytest.raises(ConfigurationError):
        build_plan(0, 0.5, 0.25)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 5000), alpha=st.floats(0.05, 0.95), frac=st.floats(0.01, 1.0))
def test_plan_partitions(n, alpha, frac):
    beta = alpha * frac
    try:
        p = build_plan(n, alpha, beta)
    except ConfigurationError:
        return
    idx = [i for r in p.blocks() for i in r]
    assert idx == list(range(1, n + 1))
    assert p.m(p.ell) <= n < p.m(p.ell + 1)


def test_block_sums_examples():
    v = np.random.default_rng(0).random(100)
    p = build_plan(100, 0.5, 0.25)
    for t in (0.0, 1.0):
        long, short = block_sums(v, p, t)
        assert np.all(long == 0) and np.all(short == 0)
    one = BlockingPlan(4, 1.0, 0.0, 4, 0, 1)
    long, short = block_sums([0.1, 0.3, 0.5, 0.7], one, 0.5)
    assert long.tolist() == [1.0] and short.tolist() == [0.0]
    with pytest.raises(DomainError):
        block_sums(v[:50], p, 0.5)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(10, 600), seed=st.integers(0, 2**32), t=st.floats(0, 1))
def test_streaming_matches_vectorised(n, seed, t):
    v = np.random.default_rng(seed).random(n)
    p = build_plan(n, 0.6, 0.3)
    a = block_sums(v, p, t)
    b = block_sums_streaming(v, p, t)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_jackknife_closed_form():
    x = np.random.default_rng(3).normal(size=(40, 5))
    total, se = _sum_var_and_se(x)
    assert total == pytest.approx(np.var(x, axis=0, ddof=1).sum())
    ref = jackknife_se(x, lambda y: np.var(y, axis=0, ddof=1).sum())
    assert se == pytest.approx(ref, rel=1e-10)
    assert _sum_var_and_se(x[:2])[1] == math.inf


def test_iid_variance_profile():
    n = 4096
    plan = build_plan(n, 0.8, 0.2)
    prof = variance_profile(WalkConfig(U01, 1.0, n, seed=0), plan, 0.5, 2000, threads=4)
    # Var(T_k) = |I_k| A, and A = 1/4 for independent uniforms
    covered = plan.ell * plan.long_len
    assert abs(prof.sum_var_long / covered - 0.25) <= 3 * prof.se / covered
    assert prof.sum_var_short / (plan.ell * plan.short_len) == pytest.approx(0.25, rel=0.1)


def test_degenerate_level_profile():
    plan = build_plan(512, 0.5, 0.25)
    svl, svs, se = variance_profile(WalkConfig(U05, 1.0, 512, seed=1), plan, 0.0, 20)
    assert svl == 0.0 and svs == 0.0 and se == 0.0


def test_dependent_variance_profile():
    n = 8192
    plan = build_plan(n, 0.8, 0.2)
    prof = variance_profile(WalkConfig(U05, 1.0, n, seed=0), plan, 0.5, 2000, threads=4)
    A = CovarianceModel.from_dist(U05, 1.0).a_functional(0.5)
    covered = plan.ell * plan.long_len
    assert abs(prof.sum_var_long / covered - A) <= 3 * prof.se / covered


def test_iid_correlations_vanish():
    R = 1000
    plan = build_plan(4096, 0.6, 0.2)
    corr = block_correlation(WalkConfig(U01, 1.0, 4096, seed=0), plan, 0.5, R, threads=4)
    assert corr.shape == (plan.ell - 1,)
    # Fisher: se of a null correlation is about 1 / sqrt(R); allow for the max over blocks
    assert np.max(np.abs(corr)) <= 4 / math.sqrt(R)


def test_longer_gaps_do_not_increase_correlation():
    R, n = 1000, 4096
    cfg = WalkConfig(U05, 1.0, n, seed=0)
    short = block_correlation(cfg, build_plan(n, 0.5, 1 / 12), 0.3, R, threads=4)
    long_gap = block_correlation(cfg, build_plan(n, 0.5, 5 / 12), 0.3, R, threads=4)
    assert np.max(np.abs(long_gap)) <= np.max(np.abs(short)) + 3 / math.sqrt(R)


def test_single_block_has_no_correlations():
    plan = build_plan(12, 0.9, 0.3)
    assert plan.ell == 1
    assert block_correlation(WalkConfig(U05, 1.0, 12), plan, 0.5, 5).size == 0
