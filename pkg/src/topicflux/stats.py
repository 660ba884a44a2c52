"""Rank statistics: tie-corrected Kruskal-Wallis with chi-square p-values.

The H statistic generalizes to k groups; the interactive two-window test
is the k = 2 case. p-values come from the chi-square upper tail computed
via the regularized incomplete gamma function, accurate to better than
1e-10 absolute, so no statistics dependency is needed at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .dynamics import TopicTimeSeries, bins_in_interval

DEFAULT_ALPHA = 0.05

_MAX_ITER = 500
_EPS = 1e-16
_TINY = 1e-300


class StatsError(Exception):
    pass


class DegenerateTiesError(StatsError):
    """Every pooled observation is identical: the tie correction vanishes."""


class WindowTooNarrowError(StatsError):
    """A test window covers fewer than two bins at the chosen width."""


@dataclass
class RankedSample:
    values: np.ndarray
    ranks: np.ndarray  # mean rank for ties, 1-based
    tie_groups: list[int]  # sizes t >= 2 of tied runs

    @property
    def n(self) -> int:
        return self.values.size


@dataclass
class KruskalWallisResult:
    h: float
    df: int
    p_value: float
    group_sizes: list[int]
    rank_sums: list[float]
    alpha: float
    significant: bool
    windows_overlap: bool = False


def rank_with_ties(values) -> RankedSample:
    """Ascending 1-based ranks; tied runs share the mean of their ranks."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise StatsError("cannot rank an empty sample")
    if not np.isfinite(values).all():
        raise StatsError("values must be finite")
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    tie_groups: list[int] = []
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        ranks[order[i : j + 1]] = mean_rank
        if j > i:
            tie_groups.append(j - i + 1)
        i = j + 1
    return RankedSample(values=values, ranks=ranks, tie_groups=tie_groups)


def kruskal_wallis(groups: list, alpha: float = DEFAULT_ALPHA) -> KruskalWallisResult:
    """Tie-corrected H over k >= 2 groups, p from chi-square at df = k - 1.

    H = [12/(N(N+1)) * sum R_i^2/n_i - 3(N+1)] / [1 - sum T/(N^3 - N)]
    with T = (t-1)t(t+1) per tied run. All-identical input is an error,
    not a non-significant result.
    """
    if len(groups) < 2:
        raise StatsError("need at least 2 groups")
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    sizes = [a.size for a in arrays]
    if any(s == 0 for s in sizes):
        raise StatsError("empty group")

    pooled = np.concatenate(arrays)
    ranked = rank_with_ties(pooled)
    n_total = ranked.n

    tie_sum = sum((t - 1) * t * (t + 1) for t in ranked.tie_groups)
    correction = 1.0 - tie_sum / (n_total**3 - n_total)
    if correction <= 0.0:
        raise DegenerateTiesError("degenerate: all values tied")

    rank_sums = []
    offset = 0
    for s in sizes:
        rank_sums.append(float(ranked.ranks[offset : offset + s].sum()))
        offset += s

    raw = (12.0 / (n_total * (n_total + 1))) * sum(
        r * r / s for r, s in zip(rank_sums, sizes)
    ) - 3.0 * (n_total + 1)
    h = raw / correction
    h = max(h, 0.0)  # guard tiny negative round-off
    df = len(groups) - 1
    p = chi2_sf(h, df)
    return KruskalWallisResult(
        h=h,
        df=df,
        p_value=p,
        group_sizes=sizes,
        rank_sums=rank_sums,
        alpha=alpha,
        significant=p < alpha,
    )


def chi2_sf(x: float, df: int) -> float:
    """Chi-square upper-tail probability Q(df/2, x/2)."""
    if df < 1:
        raise StatsError("df must be >= 1")
    if not math.isfinite(x):
        raise StatsError("x must be finite")
    if x < 0:
        raise StatsError("x must be non-negative")
    if x == 0.0:
        return 1.0
    return _gammaincc_upper(df / 2.0, x / 2.0)


def _gammaincc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x).

    Series for the lower function when x < a + 1, Lentz continued fraction
    otherwise; both converge to near machine precision.
    """
    if x <= 0.0:  # subnormal x/2 can round to exactly 0
        return 1.0
    if x < a + 1.0:
        # P(a, x) by power series, then Q = 1 - P
        term = 1.0 / a
        total = term
        k = 1
        while k < _MAX_ITER:
            term *= x / (a + k)
            total += term
            if abs(term) < abs(total) * _EPS:
                break
            k += 1
        log_prefix = -x + a * math.log(x) - math.lgamma(a)
        return max(0.0, min(1.0, 1.0 - total * math.exp(log_prefix)))

    # Q(a, x) by continued fraction (modified Lentz)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    f = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_prefix = -x + a * math.log(x) - math.lgamma(a)
    return max(0.0, min(1.0, f * math.exp(log_prefix)))


def test_topic_windows(
    ts: TopicTimeSeries,
    topic_id: int,
    window1: tuple[date, date],
    window2: tuple[date, date],
    alpha: float = DEFAULT_ALPHA,
) -> KruskalWallisResult:
    """Kruskal-Wallis over a topic's bin intensities in two date windows.

    Each window must cover at least two bin starts. Overlapping windows
    are allowed and flagged on the result.
    """
    if not 0 <= topic_id < ts.n_topics:
        raise StatsError(f"unknown topic: {topic_id}")
    idx1 = bins_in_interval(ts, window1)
    idx2 = bins_in_interval(ts, window2)
    for name, idx in (("window1", idx1), ("window2", idx2)):
        if len(idx) < 2:
            raise WindowTooNarrowError(
                f"{name} covers {len(idx)} bins; too narrow for {ts.bin_width_weeks}-week bins"
            )
    g1 = ts.intensity[topic_id, idx1]
    g2 = ts.intensity[topic_id, idx2]
    result = kruskal_wallis([g1, g2], alpha=alpha)
    result.windows_overlap = bool(set(idx1) & set(idx2))
    return result
