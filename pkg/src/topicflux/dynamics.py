"""Topic dynamics: time binning, per-bin intensities, and overlays.

Bins are half-open [start, start + 7*width_weeks) intervals anchored at
the corpus window start. A topic's intensity in a bin is its document
count divided by all documents published in that bin, outliers included,
which makes intensities comparable across topics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .cluster import OUTLIER

BIN_WIDTHS = (1, 2, 3, 4)


class DynamicsError(Exception):
    pass


@dataclass
class TopicTimeSeries:
    bin_width_weeks: int
    origin: date
    counts: np.ndarray  # (topics, bins) int64
    outlier_counts: np.ndarray  # (bins,) int64
    intensity: np.ndarray  # (topics, bins) float64

    @property
    def n_topics(self) -> int:
        return self.counts.shape[0]

    @property
    def n_bins(self) -> int:
        return self.counts.shape[1]

    @property
    def bin_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0) + self.outlier_counts

    def bin_start(self, index: int) -> date:
        return self.origin + timedelta(days=7 * self.bin_width_weeks * index)

    def bin_starts(self) -> list[date]:
        return [self.bin_start(i) for i in range(self.n_bins)]


@dataclass
class OverlaySeries:
    case_counts: list[tuple[date, float]] = field(default_factory=list)
    events: list[tuple[date, str]] = field(default_factory=list)

    def validate(self) -> None:
        for seq, kind in ((self.case_counts, "case count"), (self.events, "event")):
            for i in range(1, len(seq)):
                if seq[i][0] < seq[i - 1][0]:
                    raise DynamicsError(f"{kind} dates not ascending")
        for _, value in self.case_counts:
            if value < 0:
                raise DynamicsError("case counts must be non-negative")


def assign_bins(dates: list[date], bin_width_weeks: int, origin: date) -> np.ndarray:
    """floor(days since origin / (7 * width)) per date; pre-origin is an error."""
    if bin_width_weeks not in BIN_WIDTHS:
        raise DynamicsError(f"bin width must be one of {BIN_WIDTHS}, got {bin_width_weeks}")
    out = np.empty(len(dates), dtype=np.int64)
    span = 7 * bin_width_weeks
    for i, d in enumerate(dates):
        days = (d - origin).days
        if days < 0:
            raise DynamicsError(f"date {d.isoformat()} precedes origin {origin.isoformat()}")
        out[i] = days // span
    return out


def build_series(
    labels,
    bins,
    bin_width_weeks: int,
    origin: date,
    window_end: date | None = None,
) -> TopicTimeSeries:
    """Tally (topic, bin) counts and normalize into intensities.

    Trailing bins up to `window_end` are materialized with zero counts so
    series for the same window always share a bin axis. Empty bins get
    intensity 0, not NaN.
    """
    labels = np.asarray(labels)
    bins = np.asarray(bins)
    if labels.size != bins.size:
        raise DynamicsError(f"{labels.size} labels vs {bins.size} bin indices")

    n_bins = int(bins.max()) + 1 if bins.size else 0
    if window_end is not None:
        if window_end < origin:
            raise DynamicsError("window end precedes origin")
        n_bins = max(n_bins, (window_end - origin).days // (7 * bin_width_weeks) + 1)
    n_topics = int(labels.max()) + 1 if (labels >= 0).any() else 0

    counts = np.zeros((n_topics, n_bins), dtype=np.int64)
    outliers = np.zeros(n_bins, dtype=np.int64)
    for label, b in zip(labels, bins):
        if label == OUTLIER:
            outliers[b] += 1
        else:
            counts[label, b] += 1

    totals = counts.sum(axis=0) + outliers
    with np.errstate(divide="ignore", invalid="ignore"):
        intensity = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
    return TopicTimeSeries(
        bin_width_weeks=bin_width_weeks,
        origin=origin,
        counts=counts,
        outlier_counts=outliers,
        intensity=intensity,
    )


def series_for_topics(
    ts: TopicTimeSeries,
    topic_ids: list[int],
    date_range: tuple[date, date] | None = None,
) -> dict[int, list[tuple[date, float, int]]]:
    """Per-topic (bin_start, intensity, count) triples for bins starting in range."""
    for t in topic_ids:
        if not 0 <= t < ts.n_topics:
            raise DynamicsError(f"unknown topic: {t}")
    starts = ts.bin_starts()
    if date_range is None:
        keep = list(range(ts.n_bins))
    else:
        lo, hi = date_range
        keep = [i for i, s in enumerate(starts) if lo <= s <= hi]
    return {
        t: [(starts[i], float(ts.intensity[t, i]), int(ts.counts[t, i])) for i in keep]
        for t in topic_ids
    }


def bins_in_interval(ts: TopicTimeSeries, interval: tuple[date, date]) -> list[int]:
    lo, hi = interval
    return [i for i, s in enumerate(ts.bin_starts()) if lo <= s <= hi]


def interval_median(ts: TopicTimeSeries, topic_id: int, interval: tuple[date, date]) -> float:
    """Median intensity over the bins whose start falls in the interval."""
    if not 0 <= topic_id < ts.n_topics:
        raise DynamicsError(f"unknown topic: {topic_id}")
    idx = bins_in_interval(ts, interval)
    if not idx:
        raise DynamicsError(
            f"no bins start within [{interval[0].isoformat()}, {interval[1].isoformat()}]"
        )
    return float(np.median(ts.intensity[topic_id, idx]))


def export_heatmap_csv(ts: TopicTimeSeries, intervals: list[tuple[date, date]]) -> str:
    """CSV of median intensity x 1000 per topic per interval."""
    header = ["topic_id"] + [f"{lo.isoformat()}..{hi.isoformat()}" for lo, hi in intervals]
    lines = [",".join(header)]
    for t in range(ts.n_topics):
        cells = [str(t)]
        for interval in intervals:
            cells.append(f"{interval_median(ts, t, interval) * 1000:.6g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _read_rows(path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return [row for row in csv.reader(f) if row]


def load_overlays(cases_path=None, events_path=None) -> OverlaySeries:
    """Read `date,value` case counts and `date,label` event timelines.

    Rows arrive in any order and are sorted; a malformed row is fatal with
    its line number.
    """
    overlays = OverlaySeries()
    if cases_path is not None:
        for line_no, row in enumerate(_read_rows(cases_path), start=1):
            try:
                if len(row) != 2:
                    raise ValueError(f"expected 2 columns, got {len(row)}")
                overlays.case_counts.append((date.fromisoformat(row[0]), float(row[1])))
            except ValueError as exc:
                raise DynamicsError(f"{cases_path}:{line_no}: {exc}") from exc
        overlays.case_counts.sort(key=lambda p: p[0])
    if events_path is not None:
        for line_no, row in enumerate(_read_rows(events_path), start=1):
            try:
                if len(row) != 2:
                    raise ValueError(f"expected 2 columns, got {len(row)}")
                overlays.events.append((date.fromisoformat(row[0]), row[1]))
            except ValueError as exc:
                raise DynamicsError(f"{events_path}:{line_no}: {exc}") from exc
        overlays.events.sort(key=lambda p: p[0])
    overlays.validate()
    return overlays
