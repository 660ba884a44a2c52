import { describe, expect, it } from "vitest";

import { ApiError, type TestResult } from "../src/api.js";
import { formatStatistic } from "../src/format.js";
import {
  dateToSlider,
  renderTestError,
  renderTestResult,
  resolveHandles,
  sliderToDate,
} from "../src/testpanel.js";

function fixtureResult(overrides: Partial<TestResult> = {}): TestResult {
  return {
    topic_id: 320,
    bin_weeks: 2,
    window1: ["2020-03-01", "2020-09-01"],
    window2: ["2021-06-01", "2021-12-01"],
    alpha: 0.05,
    h: 12.89752,
    df: 1,
    p_value: 0.00033,
    significant: true,
    group_sizes: [13, 13],
    rank_sums: [100, 251],
    windows_overlap: false,
    ...overrides,
  };
}

describe("renderTestResult", () => {
  it("mirrors the backend H and p exactly (documented formatting)", () => {
    const host = document.createElement("div");
    const result = fixtureResult();
    renderTestResult(host, result);
    expect(host.querySelector(".stat-h")?.textContent).toBe(formatStatistic(result.h));
    expect(host.querySelector(".stat-p")?.textContent).toBe(formatStatistic(result.p_value));
    expect(host.querySelector(".stat-h")?.textContent).toBe("12.89752");
    expect(host.querySelector(".stat-p")?.textContent).toBe("0.00033");
  });

  it("shows the green check when significant", () => {
    const host = document.createElement("div");
    renderTestResult(host, fixtureResult({ significant: true }));
    expect(host.querySelector(".test-verdict")?.classList.contains("check")).toBe(true);
    expect(host.querySelector(".mark")?.textContent).toBe("✓");
  });

  it("shows the red cross when not significant", () => {
    const host = document.createElement("div");
    renderTestResult(host, fixtureResult({ significant: false, p_value: 0.4 }));
    expect(host.querySelector(".test-verdict")?.classList.contains("cross")).toBe(true);
    expect(host.querySelector(".mark")?.textContent).toBe("✗");
  });

  it("notes overlapping windows", () => {
    const host = document.createElement("div");
    renderTestResult(host, fixtureResult({ windows_overlap: true }));
    expect(host.textContent).toContain("windows overlap");
  });
});

describe("renderTestError", () => {
  it("explains degenerate ties inline", () => {
    const host = document.createElement("div");
    renderTestError(host, new ApiError(422, "degenerate_ties", "degenerate: all values tied"));
    expect(host.querySelector(".test-error")?.textContent).toContain("same intensity");
  });

  it("explains too-narrow windows inline", () => {
    const host = document.createElement("div");
    renderTestError(host, new ApiError(422, "window_too_narrow", "window1 covers 1 bins"));
    expect(host.textContent).toContain("fewer than two bins");
  });
});

describe("slider handles", () => {
  it("cannot cross: the moved handle pushes the pair together", () => {
    expect(resolveHandles(300, 700, "start")).toEqual([300, 700]);
    expect(resolveHandles(800, 700, "start")).toEqual([800, 800]);
    expect(resolveHandles(800, 700, "end")).toEqual([700, 700]);
  });

  it("maps positions to corpus dates and back", () => {
    const corpus: [string, string] = ["2020-01-01", "2022-06-30"];
    expect(sliderToDate(0, corpus)).toBe("2020-01-01");
    expect(sliderToDate(1000, corpus)).toBe("2022-06-30");
    // dates quantize positions to whole days: round-trip within one tick
    const mid = sliderToDate(500, corpus);
    expect(Math.abs(dateToSlider(mid, corpus) - 500)).toBeLessThanOrEqual(1);
  });
});
