/**
 * Two-window significance panel: pick one of the selected topics, set two
 * date windows with paired sliders, run the backend test, and mirror its
 * verdict (H, p, significant) verbatim.
 */

import { ApiError, type TestResult } from "./api.js";
import { formatStatistic } from "./format.js";
import { clampRange, type DateRange } from "./state.js";

export interface SliderPair {
  start: HTMLInputElement;
  end: HTMLInputElement;
}

/** Map a slider's 0..1000 integer position into the corpus date range. */
export function sliderToDate(position: number, corpus: DateRange): string {
  const t0 = Date.parse(`${corpus[0]}T00:00:00Z`);
  const t1 = Date.parse(`${corpus[1]}T00:00:00Z`);
  const t = t0 + (Math.min(1000, Math.max(0, position)) / 1000) * (t1 - t0);
  return new Date(t).toISOString().slice(0, 10);
}

export function dateToSlider(date: string, corpus: DateRange): number {
  const t0 = Date.parse(`${corpus[0]}T00:00:00Z`);
  const t1 = Date.parse(`${corpus[1]}T00:00:00Z`);
  if (t1 === t0) return 0;
  const t = Date.parse(`${date}T00:00:00Z`);
  return Math.round(((t - t0) / (t1 - t0)) * 1000);
}

/** Handles may not cross: moving one pushes the boundary, never past it. */
export function resolveHandles(
  startPos: number,
  endPos: number,
  moved: "start" | "end",
): [number, number] {
  if (startPos <= endPos) return [startPos, endPos];
  return moved === "start" ? [startPos, startPos] : [endPos, endPos];
}

export function windowFromSliders(pair: SliderPair, corpus: DateRange): DateRange {
  const start = sliderToDate(Number(pair.start.value), corpus);
  const end = sliderToDate(Number(pair.end.value), corpus);
  return clampRange([start, end], corpus);
}

export function renderTestResult(container: HTMLElement, result: TestResult): void {
  const verdict = result.significant ? "check" : "cross";
  const mark = result.significant ? "✓" : "✗";
  container.innerHTML =
    `<div class="test-verdict ${verdict}">` +
    `<span class="mark" data-significant="${result.significant}">${mark}</span>` +
    `<dl>` +
    `<dt>H</dt><dd class="stat-h">${formatStatistic(result.h)}</dd>` +
    `<dt>p</dt><dd class="stat-p">${formatStatistic(result.p_value)}</dd>` +
    `<dt>df</dt><dd class="stat-df">${result.df}</dd>` +
    `</dl>` +
    `<p class="verdict-text">${
      result.significant
        ? `Significant difference between the two windows at α = ${result.alpha}.`
        : `No significant difference at α = ${result.alpha}.`
    }</p>` +
    (result.windows_overlap ? `<p class="verdict-note">Note: the windows overlap.</p>` : "") +
    `</div>`;
}

export function renderTestError(container: HTMLElement, error: unknown): void {
  let message = "Test failed.";
  if (error instanceof ApiError) {
    if (error.code === "degenerate_ties") {
      message =
        "Every bin in both windows has the same intensity, so ranks carry no " +
        "information; pick windows where the topic actually varies.";
    } else if (error.code === "window_too_narrow") {
      message = "A window covers fewer than two bins; widen it or use narrower bins.";
    } else {
      message = error.message;
    }
  }
  container.innerHTML = `<p class="test-error">${message}</p>`;
}
