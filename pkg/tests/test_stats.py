import math
from datetime import date, timedelta

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, strategies as st

from topicflux.dynamics import build_series
from topicflux.stats import (
    DegenerateTiesError,
    StatsError,
    WindowTooNarrowError,
    chi2_sf,
    kruskal_wallis,
    rank_with_ties,
)
from topicflux.stats import test_topic_windows as window_test

ORIGIN = date(2020, 1, 1)


# --- ranking ----------------------------------------------------------------


def test_rank_with_ties_fixture():
    ranked = rank_with_ties([1, 2, 2, 3])
    np.testing.assert_allclose(ranked.ranks, [1, 2.5, 2.5, 4])
    assert ranked.tie_groups == [2]


def test_rank_strictly_increasing():
    ranked = rank_with_ties([10, 20, 30, 40, 50])
    np.testing.assert_allclose(ranked.ranks, [1, 2, 3, 4, 5])
    assert ranked.tie_groups == []


def test_rank_all_equal():
    ranked = rank_with_ties([5, 5, 5])
    np.testing.assert_allclose(ranked.ranks, [2, 2, 2])
    assert ranked.tie_groups == [3]


def test_rank_rejects_nan():
    with pytest.raises(StatsError):
        rank_with_ties([1.0, float("nan")])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60))
def test_rank_sum_identity(values):
    ranked = rank_with_ties(values)
    n = len(values)
    assert ranked.ranks.sum() == pytest.approx(n * (n + 1) / 2)
    assert all(t >= 2 for t in ranked.tie_groups)


# --- chi-square -------------------------------------------------------------


def test_chi2_sf_at_zero():
    assert chi2_sf(0.0, 1) == 1.0


def test_chi2_sf_paper_value():
    assert chi2_sf(12.89752, 1) == pytest.approx(0.00033, abs=1e-5)


def test_chi2_sf_df2_closed_form():
    x = 2 * math.log(20)
    assert chi2_sf(x, 2) == pytest.approx(0.05, abs=1e-4)
    for xv in (0.5, 1.0, 3.3, 10.0):
        assert chi2_sf(xv, 2) == pytest.approx(math.exp(-xv / 2), abs=1e-12)


def test_chi2_sf_negative_error():
    with pytest.raises(StatsError):
        chi2_sf(-1.0, 1)


@given(st.floats(0.0, 200.0), st.integers(1, 30))
def test_chi2_sf_matches_scipy(x, df):
    ours = chi2_sf(x, df)
    reference = float(scipy.special.gammaincc(df / 2.0, x / 2.0))
    assert ours == pytest.approx(reference, abs=1e-10)


# --- kruskal-wallis -----------------------------------------------------------


def test_kw_separated_fixture():
    result = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
    assert result.h == pytest.approx(27 / 7, abs=1e-9)
    assert result.p_value == pytest.approx(0.0495, abs=1e-3)
    assert result.df == 1
    assert result.rank_sums == [6.0, 15.0]
    assert result.significant  # H above the ~3.84 critical value


def test_kw_interleaved_fixture():
    result = kruskal_wallis([[1, 3, 5], [2, 4, 6]])
    assert result.h == pytest.approx(3 / 7, abs=1e-9)
    assert result.p_value == pytest.approx(0.513, abs=1e-3)
    assert not result.significant


def test_kw_all_tied_is_error():
    with pytest.raises(DegenerateTiesError):
        kruskal_wallis([[2, 2], [2, 2]])


def test_kw_empty_group_error():
    with pytest.raises(StatsError):
        kruskal_wallis([[1, 2], []])


def test_kw_needs_two_groups():
    with pytest.raises(StatsError):
        kruskal_wallis([[1, 2, 3]])


def test_kw_swap_groups_invariant():
    a = kruskal_wallis([[1, 5, 9], [2, 2, 7]])
    b = kruskal_wallis([[2, 2, 7], [1, 5, 9]])
    assert a.h == pytest.approx(b.h, abs=1e-12)
    assert a.p_value == pytest.approx(b.p_value, abs=1e-12)


def test_kw_monotone_transform_invariant():
    groups = [[0.1, 0.5, 0.9], [0.2, 1.7, 2.5]]
    base = kruskal_wallis(groups)
    warped = kruskal_wallis([[math.exp(v) for v in g] for g in groups])
    assert warped.h == pytest.approx(base.h, abs=1e-12)


def test_kw_duplication_sanity():
    base = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
    doubled = kruskal_wallis([[1, 1, 2, 2, 3, 3], [4, 4, 5, 5, 6, 6]])
    assert doubled.h >= base.h


def test_kw_no_ties_correction_is_one():
    # without ties, H equals the uncorrected statistic exactly
    groups = [[1, 4, 7], [2, 5, 8], [3, 6, 9]]
    result = kruskal_wallis(groups)
    n = 9
    raw = (12.0 / (n * (n + 1))) * sum(
        rs * rs / sz for rs, sz in zip(result.rank_sums, result.group_sizes)
    ) - 3 * (n + 1)
    assert result.h == pytest.approx(raw, abs=1e-12)
    assert result.df == 2


def test_kw_k_groups_against_scipy():
    rng = np.random.default_rng(5)
    for _ in range(20):
        k = rng.integers(2, 5)
        groups = [rng.normal(size=rng.integers(3, 12)).round(1).tolist() for _ in range(k)]
        flat = [v for g in groups for v in g]
        if len(set(flat)) <= 1:
            continue
        ours = kruskal_wallis(groups)
        h_ref, p_ref = scipy.stats.kruskal(*groups)
        assert ours.h == pytest.approx(float(h_ref), abs=1e-10)
        assert ours.p_value == pytest.approx(float(p_ref), abs=1e-10)


def test_kw_alpha_controls_significance():
    result = kruskal_wallis([[1, 2, 3], [4, 5, 6]], alpha=0.01)
    assert not result.significant
    assert result.alpha == 0.01


# --- window testing -----------------------------------------------------------


def step_series(low=0.001, high=0.008, bins_per_side=26, seed=0):
    """Planted step: `low` intensity for the first half, `high` after."""
    rng = np.random.default_rng(seed)
    labels, bins = [], []
    per_bin = 1000
    for b in range(bins_per_side * 2):
        p = low if b < bins_per_side else high
        hits = rng.binomial(per_bin, p)
        labels += [0] * hits + [-1] * (per_bin - hits)
        bins += [b] * per_bin
    return build_series(labels, bins, 1, origin=ORIGIN)


def test_window_test_planted_step_significant():
    ts = step_series()
    mid = ts.bin_start(26)
    end = ts.bin_start(ts.n_bins - 1)
    result = window_test(ts, 0, (ORIGIN, mid - timedelta(days=1)), (mid, end))
    assert result.significant and result.p_value < 0.01
    # matches a direct call on the same intensity groups
    direct = kruskal_wallis([ts.intensity[0, :26], ts.intensity[0, 26:]])
    assert result.h == pytest.approx(direct.h, abs=1e-12)
    assert not result.windows_overlap


def test_window_test_constant_topic_degenerate():
    labels = [0] * 40
    bins = list(np.repeat(np.arange(10), 4))
    ts = build_series(labels, bins, 1, origin=ORIGIN)
    window = (ORIGIN, ts.bin_start(ts.n_bins - 1))
    with pytest.raises(DegenerateTiesError):
        window_test(ts, 0, window, window)


def test_window_test_overlap_flagged():
    ts = step_series()
    w1 = (ORIGIN, ts.bin_start(30))
    w2 = (ts.bin_start(20), ts.bin_start(ts.n_bins - 1))
    result = window_test(ts, 0, w1, w2)
    assert result.windows_overlap


def test_window_test_too_narrow():
    ts = step_series()
    with pytest.raises(WindowTooNarrowError):
        window_test(ts, 0, (ORIGIN, ORIGIN), (ORIGIN, ts.bin_start(ts.n_bins - 1)))


def test_window_test_unknown_topic():
    ts = step_series()
    window = (ORIGIN, ts.bin_start(5))
    with pytest.raises(StatsError):
        window_test(ts, 3, window, window)


def test_window_test_stationary_monte_carlo():
    # true-null replicates: non-significant in >= 90/100
    not_significant = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        labels, bins = [], []
        for b in range(40):
            hits = rng.binomial(400, 0.01)
            labels += [0] * hits + [-1] * (400 - hits)
            bins += [b] * 400
        ts = build_series(labels, bins, 1, origin=ORIGIN)
        w1 = (ORIGIN, ts.bin_start(19))
        w2 = (ts.bin_start(20), ts.bin_start(39))
        try:
            result = window_test(ts, 0, w1, w2)
        except DegenerateTiesError:
            not_significant += 1
            continue
        not_significant += not result.significant
    assert not_significant >= 90
