/**
 * Dashboard controller: wires the search, series, and test panels to the
 * API client, keeps the ViewState in the URL, and enforces one in-flight
 * request per panel with latest-wins cancellation.
 */

import { ApiClient, LatestWins, isAbort, type SeriesResponse } from "./api.js";
import { renderCountHistogram, renderIntensityChart, topicColor } from "./charts.js";
import { debounce, renderSearchResults, SEARCH_DEBOUNCE_MS } from "./search.js";
import {
  BIN_WIDTHS,
  decodeState,
  encodeState,
  restrictSelection,
  toggleSelection,
  type DateRange,
  type ViewState,
} from "./state.js";
import {
  dateToSlider,
  renderTestError,
  renderTestResult,
  resolveHandles,
  windowFromSliders,
  type SliderPair,
} from "./testpanel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export async function startApp(client: ApiClient): Promise<void> {
  const info = await client.modelInfo();
  const corpus: DateRange = info.window;
  let state: ViewState = decodeState(location.search.replace(/^\?/, ""), corpus);
  let lastResults: Awaited<ReturnType<ApiClient["searchTopics"]>> | null = null;

  const searchGate = new LatestWins();
  const seriesGate = new LatestWins();
  const testGate = new LatestWins();

  const searchBox = el<HTMLInputElement>("search-box");
  const cardsHost = el<HTMLElement>("search-results");
  const chartsHost = el<HTMLElement>("charts");
  const legendHost = el<HTMLElement>("chart-legend");
  const testHost = el<HTMLElement>("test-result");
  const topicPicker = el<HTMLSelectElement>("test-topic");
  const runButton = el<HTMLButtonElement>("run-test");

  el<HTMLElement>("model-facts").textContent =
    `${info.documents.toLocaleString()} documents, ${info.topics} topics, ` +
    `${corpus[0]} to ${corpus[1]}`;

  const sliders: Record<"w1" | "w2", SliderPair> = {
    w1: { start: el("w1-start"), end: el("w1-end") },
    w2: { start: el("w2-start"), end: el("w2-end") },
  };

  function pushUrl(): void {
    history.replaceState(null, "", `?${encodeState(state)}`);
  }

  function syncSliders(): void {
    for (const key of ["w1", "w2"] as const) {
      const window = key === "w1" ? state.window1 : state.window2;
      sliders[key].start.value = String(dateToSlider(window[0], corpus));
      sliders[key].end.value = String(dateToSlider(window[1], corpus));
      el<HTMLElement>(`${key}-label`).textContent = `${window[0]} .. ${window[1]}`;
    }
  }

  function syncTopicPicker(): void {
    topicPicker.replaceChildren();
    for (const id of state.selected) {
      const option = document.createElement("option");
      option.value = String(id);
      option.textContent = `Topic ${id}`;
      topicPicker.appendChild(option);
    }
    if (state.testTopic !== null && state.selected.includes(state.testTopic)) {
      topicPicker.value = String(state.testTopic);
    } else {
      state.testTopic = state.selected.length ? state.selected[0] : null;
    }
    runButton.disabled = state.testTopic === null;
  }

  async function refreshSeries(): Promise<void> {
    if (!state.selected.length) {
      chartsHost.replaceChildren();
      legendHost.replaceChildren();
      return;
    }
    try {
      const responses = await seriesGate.run((signal) =>
        Promise.all(state.selected.map((id) => client.topicSeries(id, state.binWeeks, signal))),
      );
      renderCharts(responses);
    } catch (error) {
      if (!isAbort(error)) throw error;
    }
  }

  function renderCharts(responses: SeriesResponse[]): void {
    const series = responses.map((r) => ({ topicId: r.topic_id, points: r.series }));
    const overlays = responses[0]?.overlays ?? { case_counts: [], events: [] };
    chartsHost.innerHTML =
      renderIntensityChart(series, overlays, { width: 920, height: 260 }) +
      renderCountHistogram(series, { width: 920, height: 170 });
    legendHost.replaceChildren();
    series.forEach((s, i) => {
      const chip = document.createElement("span");
      chip.className = "legend-chip";
      chip.style.setProperty("--chip", topicColor(i));
      chip.textContent = `Topic ${s.topicId}`;
      legendHost.appendChild(chip);
    });
  }

  async function runSearch(): Promise<void> {
    const query = state.query.trim();
    if (!query) {
      lastResults = null;
      renderSearchResults(cardsHost, null, state.selected, { onToggle });
      return;
    }
    try {
      lastResults = await searchGate.run((signal) => client.searchTopics(query, 6, signal));
    } catch (error) {
      if (isAbort(error)) return;
      cardsHost.innerHTML = `<p class="empty-state">Search failed: ${(error as Error).message}</p>`;
      return;
    }
    state.selected = restrictSelection(
      state.selected,
      lastResults.results.map((r) => r.topic_id),
    );
    renderSearchResults(cardsHost, lastResults, state.selected, { onToggle });
    syncTopicPicker();
    pushUrl();
    void refreshSeries();
  }

  function onToggle(topicId: number): void {
    state.selected = toggleSelection(state.selected, topicId);
    if (lastResults) renderSearchResults(cardsHost, lastResults, state.selected, { onToggle });
    syncTopicPicker();
    pushUrl();
    void refreshSeries();
  }

  const debouncedSearch = debounce(() => void runSearch(), SEARCH_DEBOUNCE_MS);
  searchBox.value = state.query;
  searchBox.addEventListener("input", () => {
    state.query = searchBox.value;
    pushUrl();
    debouncedSearch();
  });

  for (const width of BIN_WIDTHS) {
    const radio = el<HTMLInputElement>(`bins-${width}`);
    radio.checked = width === state.binWeeks;
    radio.addEventListener("change", () => {
      if (!radio.checked) return;
      state.binWeeks = width;
      pushUrl();
      void refreshSeries();
    });
  }

  for (const key of ["w1", "w2"] as const) {
    const pair = sliders[key];
    for (const which of ["start", "end"] as const) {
      pair[which].addEventListener("input", () => {
        const [s, e] = resolveHandles(
          Number(pair.start.value),
          Number(pair.end.value),
          which,
        );
        pair.start.value = String(s);
        pair.end.value = String(e);
        const range = windowFromSliders(pair, corpus);
        if (key === "w1") state.window1 = range;
        else state.window2 = range;
        el<HTMLElement>(`${key}-label`).textContent = `${range[0]} .. ${range[1]}`;
        pushUrl();
      });
    }
  }

  topicPicker.addEventListener("change", () => {
    state.testTopic = Number(topicPicker.value);
    pushUrl();
  });

  runButton.addEventListener("click", () => void runTest());

  async function runTest(): Promise<void> {
    if (state.testTopic === null) return;
    try {
      const result = await testGate.run((signal) =>
        client.runTest(
          {
            topic_id: state.testTopic as number,
            window1: state.window1,
            window2: state.window2,
            bin_weeks: state.binWeeks,
          },
          signal,
        ),
      );
      renderTestResult(testHost, result);
    } catch (error) {
      if (isAbort(error)) return;
      renderTestError(testHost, error);
    }
  }

  // initial render from the (possibly shared) URL state
  syncSliders();
  syncTopicPicker();
  pushUrl();
  if (state.query) await runSearch();
}

if (typeof document !== "undefined" && document.body?.hasAttribute("data-topicflux-app")) {
  void startApp(new ApiClient(""));
}
