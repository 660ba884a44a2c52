import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { SearchResponse } from "../src/api.js";
import { debounce, renderSearchResults, SEARCH_DEBOUNCE_MS } from "../src/search.js";

function response(n: number): SearchResponse {
  return {
    status: "ok",
    results: Array.from({ length: n }, (_, i) => ({
      topic_id: i,
      size: 100 + i,
      similarity: 1 - i * 0.1,
      terms: [
        { term: `kw${i}`, weight: 1 },
        { term: "shared", weight: 0.4 },
      ],
    })),
  };
}

describe("debounce", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("fires once, 300 ms after the last keystroke", () => {
    const spy = vi.fn();
    const run = debounce(spy, SEARCH_DEBOUNCE_MS);
    run();
    vi.advanceTimersByTime(200);
    run(); // restarts the clock
    vi.advanceTimersByTime(299);
    expect(spy).not.toHaveBeenCalled();
    vi.advanceTimersByTime(1);
    expect(spy).toHaveBeenCalledTimes(1);
  });
});

describe("renderSearchResults", () => {
  it("renders at most six cards", () => {
    const host = document.createElement("div");
    renderSearchResults(host, response(9), [], { onToggle: () => {} });
    expect(host.querySelectorAll(".topic-card").length).toBe(6);
  });

  it("renders the no-topics state for empty results", () => {
    const host = document.createElement("div");
    renderSearchResults(host, { status: "ok", results: [] }, [], { onToggle: () => {} });
    expect(host.querySelector(".empty-state")?.textContent).toContain("No topics matched");
  });

  it("labels the all-unknown state distinctly", () => {
    const host = document.createElement("div");
    renderSearchResults(
      host,
      { status: "all_terms_unknown", results: [] },
      [],
      { onToggle: () => {} },
    );
    expect(host.textContent).toContain("vocabulary");
  });

  it("marks selected cards and wires the toggle callback", () => {
    const host = document.createElement("div");
    const toggled: number[] = [];
    renderSearchResults(host, response(3), [1], { onToggle: (id) => toggled.push(id) });
    const cards = host.querySelectorAll(".topic-card");
    expect(cards[1].classList.contains("selected")).toBe(true);
    const box = cards[2].querySelector("input") as HTMLInputElement;
    box.checked = true;
    box.dispatchEvent(new Event("change"));
    expect(toggled).toEqual([2]);
  });

  it("embeds a word-cloud svg per card", () => {
    const host = document.createElement("div");
    renderSearchResults(host, response(2), [], { onToggle: () => {} });
    expect(host.querySelectorAll("svg.wordcloud").length).toBe(2);
  });
});
