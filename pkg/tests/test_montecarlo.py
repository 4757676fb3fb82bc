import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfcp.montecarlo import (
    chunk_sizes,
    correlation_with_se,
    empirical_pmf,
    mean_with_se,
    run_chunks,
    sample_chunks,
    tv_between,
    tv_to_pmf,
)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    assert chunk_sizes(0, 4) == []


def test_results_do_not_depend_on_threads():
    fn = lambda g, n: g.standard_normal(n)
    a = sample_chunks(fn, 10_001, seed=42, threads=1, chunk=1_000)
    b = sample_chunks(fn, 10_001, seed=42, threads=8, chunk=1_000)
    np.testing.assert_array_equal(a, b)
    assert a.size == 10_001
    c = sample_chunks(fn, 10_001, seed=43, threads=1, chunk=1_000)
    assert not np.array_equal(a, c)


def test_run_chunks_order():
    out = run_chunks(lambda g, n: n, 25, seed=0, threads=3, chunk=10)
    assert out == [10, 10, 5]


def test_empirical_pmf_and_tv():
    samples = np.array([0, 1, 1, 2, 5])
    np.testing.assert_allclose(empirical_pmf(samples, 2), [0.2, 0.4, 0.2])
    d = tv_to_pmf(samples, [0.2, 0.4, 0.2])
    # tail cell: empirical 0.2 vs reference 0.2
    assert d.tv == pytest.approx(0.0, abs=1e-15)
    d = tv_to_pmf(np.zeros(10, dtype=int), [0.5, 0.5])
    assert d.tv == pytest.approx(0.5) and d.sup_gap == pytest.approx(0.5)
    assert tv_between(np.array([0, 0]), np.array([1, 1]), 3) == pytest.approx(1.0)


def test_tv_standard_error_covers_sampling_noise():
    g = np.random.default_rng(0)
    pmf = np.array([0.2, 0.5, 0.3])
    tvs = [tv_to_pmf(g.choice(3, size=20_000, p=pmf), pmf) for _ in range(5)]
    for d in tvs:
        assert d.tv < 6 * d.tv_se + 0.01


def test_mean_and_correlation_se():
    g = np.random.default_rng(1)
    x = g.standard_normal(100_000)
    y = 0.6 * x + 0.8 * g.standard_normal(100_000)
    m, se = mean_with_se(x)
    assert abs(m) < 4 * se and se == pytest.approx(1 / math.sqrt(1e5), rel=0.02)
    r, rse = correlation_with_se(x, y)
    assert abs(r - 0.6) < 4 * rse
    # bivariate normal: se of r is (1 - rho^2) / sqrt(n)
    assert rse == pytest.approx(0.64 / math.sqrt(1e5), rel=0.05)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=50), st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4))
def test_tv_bounds(samples, weights):
    w = np.asarray(weights)
    if w.sum() == 0:
        w = np.ones(4)
    pmf = w / w.sum()
    d = tv_to_pmf(np.asarray(samples), pmf)
    assert 0.0 <= d.tv <= 1.0 + 1e-12
    assert d.sup_gap <= 2 * d.tv + 1e-12
