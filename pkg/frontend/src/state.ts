/**
 * ViewState: everything needed to restore a session, encoded in the URL.
 *
 * Windows are always clamped to the model's corpus window and kept
 * ordered (start <= end), so slider handles cannot cross and a shared
 * link cannot request out-of-range data.
 */

export type DateRange = [string, string];

export interface ViewState {
  query: string;
  selected: number[];
  binWeeks: number;
  window1: DateRange;
  window2: DateRange;
  testTopic: number | null;
}

export const BIN_WIDTHS = [1, 2, 3, 4];
export const MAX_SELECTED = 6;

function clampDate(value: string, lo: string, hi: string): string {
  if (value < lo) return lo;
  if (value > hi) return hi;
  return value;
}

/** Clamp into the corpus window and enforce start <= end. */
export function clampRange(range: DateRange, corpus: DateRange): DateRange {
  let [start, end] = range;
  start = clampDate(start, corpus[0], corpus[1]);
  end = clampDate(end, corpus[0], corpus[1]);
  if (start > end) [start, end] = [end, start];
  return [start, end];
}

export function defaultState(corpus: DateRange): ViewState {
  return {
    query: "",
    selected: [],
    binWeeks: 2,
    window1: [corpus[0], corpus[0]],
    window2: [corpus[1], corpus[1]],
    testTopic: null,
  };
}

/** Keep only topics that are still in the latest search results. */
export function restrictSelection(selected: number[], resultIds: number[]): number[] {
  const allowed = new Set(resultIds);
  return selected.filter((id) => allowed.has(id)).slice(0, MAX_SELECTED);
}

export function toggleSelection(selected: number[], topicId: number): number[] {
  if (selected.includes(topicId)) return selected.filter((id) => id !== topicId);
  if (selected.length >= MAX_SELECTED) return selected;
  return [...selected, topicId];
}

const ISO_DATE = /^\d{4}-\d{2}-\d{2}$/;

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.selected.length) params.set("topics", state.selected.join(","));
  params.set("bins", String(state.binWeeks));
  params.set("w1", state.window1.join(".."));
  params.set("w2", state.window2.join(".."));
  if (state.testTopic !== null) params.set("test", String(state.testTopic));
  return params.toString();
}

export function decodeState(encoded: string, corpus: DateRange): ViewState {
  const params = new URLSearchParams(encoded);
  const state = defaultState(corpus);

  state.query = params.get("q") ?? "";

  const topics = params.get("topics");
  if (topics) {
    state.selected = topics
      .split(",")
      .map((t) => Number.parseInt(t, 10))
      .filter((t) => Number.isInteger(t) && t >= 0)
      .slice(0, MAX_SELECTED);
  }

  const bins = Number.parseInt(params.get("bins") ?? "", 10);
  if (BIN_WIDTHS.includes(bins)) state.binWeeks = bins;

  for (const [key, field] of [
    ["w1", "window1"],
    ["w2", "window2"],
  ] as const) {
    const raw = params.get(key);
    if (!raw) continue;
    const parts = raw.split("..");
    if (parts.length === 2 && ISO_DATE.test(parts[0]) && ISO_DATE.test(parts[1])) {
      state[field] = clampRange([parts[0], parts[1]], corpus);
    }
  }

  const testTopic = Number.parseInt(params.get("test") ?? "", 10);
  if (Number.isInteger(testTopic) && testTopic >= 0) state.testTopic = testTopic;
  if (state.testTopic !== null && !state.selected.includes(state.testTopic)) {
    state.testTopic = null;
  }
  return state;
}
