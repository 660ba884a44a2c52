/**
 * SVG charts: intensity lines over a stacked count histogram, with the
 * case-count area in gray underneath and labeled vertical event lines.
 *
 * Everything here is a pure function from API payloads to markup; no
 * value displayed is computed client-side beyond pixel scaling.
 */

import type { OverlayPayload, SeriesPoint } from "./api.js";
import { escapeXml } from "./wordcloud.js";

export interface TopicSeries {
  topicId: number;
  points: SeriesPoint[];
}

export interface ChartOptions {
  width: number;
  height: number;
  marginLeft?: number;
  marginBottom?: number;
}

export const TOPIC_COLORS = [
  "#1666b0",
  "#1a8a5a",
  "#b05216",
  "#7a3fa0",
  "#a01640",
  "#4a6472",
];

export function topicColor(index: number): string {
  return TOPIC_COLORS[index % TOPIC_COLORS.length];
}

function dayNumber(iso: string): number {
  return Date.parse(`${iso}T00:00:00Z`) / 86_400_000;
}

interface Scale {
  (value: number): number;
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

function binDomain(series: TopicSeries[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      const d = dayNumber(p.bin_start);
      if (d < lo) lo = d;
      if (d > hi) hi = d;
    }
  }
  if (lo > hi) return [0, 1];
  return [lo, hi];
}

/** Line plot of per-bin intensities plus overlays. */
export function renderIntensityChart(
  series: TopicSeries[],
  overlays: OverlayPayload,
  options: ChartOptions,
): string {
  const { width, height } = options;
  const left = options.marginLeft ?? 42;
  const bottom = options.marginBottom ?? 22;
  const plotW = width - left - 8;
  const plotH = height - bottom - 8;
  const [d0, d1] = binDomain(series);
  const x = linearScale(d0, d1, left, left + plotW);

  const maxIntensity = Math.max(
    1e-9,
    ...series.flatMap((s) => s.points.map((p) => p.intensity)),
  );
  const y = linearScale(0, maxIntensity, 8 + plotH, 8);

  const parts = [
    `<svg viewBox="0 0 ${width} ${height}" class="chart chart-intensity" role="img">`,
  ];

  // gray active-case area on its own scale, underneath the lines
  const cases = overlays.case_counts.filter((c) => {
    const d = dayNumber(c.date);
    return d >= d0 && d <= d1;
  });
  if (cases.length > 1) {
    const maxCases = Math.max(...cases.map((c) => c.value), 1);
    const yc = linearScale(0, maxCases, 8 + plotH, 8);
    const top = cases
      .map((c) => `${x(dayNumber(c.date)).toFixed(1)},${yc(c.value).toFixed(1)}`)
      .join(" ");
    const baseline = `${x(dayNumber(cases[cases.length - 1].date)).toFixed(1)},${(
      8 + plotH
    ).toFixed(1)} ${x(dayNumber(cases[0].date)).toFixed(1)},${(8 + plotH).toFixed(1)}`;
    parts.push(`<polygon class="case-area" points="${top} ${baseline}" />`);
  }

  for (const event of overlays.events) {
    const d = dayNumber(event.date);
    if (d < d0 || d > d1) continue;
    const ex = x(d).toFixed(1);
    parts.push(
      `<line class="event-line" x1="${ex}" y1="8" x2="${ex}" y2="${8 + plotH}" ` +
        `data-date="${event.date}" />` +
        `<text class="event-label" x="${ex}" y="16" data-date="${event.date}">` +
        `${escapeXml(event.label)}</text>`,
    );
  }

  series.forEach((s, i) => {
    const path = s.points
      .map((p) => `${x(dayNumber(p.bin_start)).toFixed(1)},${y(p.intensity).toFixed(1)}`)
      .join(" ");
    parts.push(
      `<polyline class="topic-line" data-topic="${s.topicId}" fill="none" ` +
        `stroke="${topicColor(i)}" stroke-width="1.8" points="${path}" />`,
    );
  });

  parts.push(axisMarkup(left, plotH, maxIntensity, "intensity"));
  parts.push("</svg>");
  return parts.join("");
}

/** Stacked histogram of per-bin absolute counts for the same topics. */
export function renderCountHistogram(series: TopicSeries[], options: ChartOptions): string {
  const { width, height } = options;
  const left = options.marginLeft ?? 42;
  const bottom = options.marginBottom ?? 22;
  const plotW = width - left - 8;
  const plotH = height - bottom - 8;

  const bins = series.length ? series[0].points.map((p) => p.bin_start) : [];
  const totals = bins.map((_, b) =>
    series.reduce((acc, s) => acc + (s.points[b]?.count ?? 0), 0),
  );
  const maxTotal = Math.max(1, ...totals);
  const y = linearScale(0, maxTotal, 8 + plotH, 8);
  const barW = bins.length ? Math.max(1, (plotW / bins.length) * 0.85) : 0;

  const parts = [
    `<svg viewBox="0 0 ${width} ${height}" class="chart chart-counts" role="img">`,
  ];
  bins.forEach((bin, b) => {
    let cursor = 8 + plotH;
    const bx = left + (plotW * b) / Math.max(1, bins.length);
    series.forEach((s, i) => {
      const count = s.points[b]?.count ?? 0;
      if (count === 0) return;
      const h = 8 + plotH - y(count);
      cursor -= h;
      parts.push(
        `<rect class="count-bar" data-topic="${s.topicId}" data-bin="${bin}" ` +
          `x="${bx.toFixed(1)}" y="${cursor.toFixed(1)}" ` +
          `width="${barW.toFixed(1)}" height="${h.toFixed(1)}" fill="${topicColor(i)}" />`,
      );
    });
  });
  parts.push(axisMarkup(left, plotH, maxTotal, "count"));
  parts.push("</svg>");
  return parts.join("");
}

function axisMarkup(left: number, plotH: number, maxValue: number, kind: string): string {
  const label =
    kind === "intensity" ? `${(maxValue * 1000).toFixed(2)}‰` : String(maxValue);
  return (
    `<line class="axis" x1="${left}" y1="8" x2="${left}" y2="${8 + plotH}" />` +
    `<text class="axis-max" x="${left - 4}" y="14" text-anchor="end">${label}</text>` +
    `<text class="axis-zero" x="${left - 4}" y="${8 + plotH}" text-anchor="end">0</text>`
  );
}
