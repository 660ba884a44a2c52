/**
 * Search panel: debounced keyword queries, six ranked word-cloud cards,
 * checkbox multi-select feeding the chart and test panels.
 */

import type { SearchResponse, TopicCard } from "./api.js";
import { layoutWordCloud, renderWordCloudSvg } from "./wordcloud.js";

export const SEARCH_DEBOUNCE_MS = 300;
export const MAX_CARDS = 6;

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}

export interface SearchCallbacks {
  onToggle: (topicId: number) => void;
}

export function renderSearchResults(
  container: HTMLElement,
  response: SearchResponse | null,
  selected: number[],
  callbacks: SearchCallbacks,
): void {
  container.replaceChildren();
  if (!response) return;

  if (!response.results.length) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent =
      response.status === "all_terms_unknown"
        ? "No topics matched: none of the query terms are in the vocabulary."
        : "No topics matched.";
    container.appendChild(empty);
    return;
  }

  for (const card of response.results.slice(0, MAX_CARDS)) {
    container.appendChild(renderCard(card, selected.includes(card.topic_id), callbacks));
  }
}

function renderCard(
  card: TopicCard,
  isSelected: boolean,
  callbacks: SearchCallbacks,
): HTMLElement {
  const root = document.createElement("article");
  root.className = `topic-card${isSelected ? " selected" : ""}`;
  root.dataset.topicId = String(card.topic_id);

  const header = document.createElement("header");
  const checkbox = document.createElement("input");
  checkbox.type = "checkbox";
  checkbox.checked = isSelected;
  checkbox.setAttribute("aria-label", `select topic ${card.topic_id}`);
  checkbox.addEventListener("change", () => callbacks.onToggle(card.topic_id));
  header.appendChild(checkbox);

  const title = document.createElement("span");
  title.className = "card-title";
  title.textContent = `Topic ${card.topic_id}`;
  header.appendChild(title);

  const similarity = document.createElement("span");
  similarity.className = "card-similarity";
  similarity.textContent = card.similarity.toFixed(2);
  header.appendChild(similarity);
  root.appendChild(header);

  const cloud = document.createElement("div");
  cloud.className = "card-cloud";
  const size = { width: 260, height: 150, seed: card.topic_id + 1, maxWords: 25 };
  cloud.innerHTML = renderWordCloudSvg(layoutWordCloud(card.terms, size), size);
  root.appendChild(cloud);

  const footer = document.createElement("footer");
  footer.textContent = `${card.size} documents`;
  root.appendChild(footer);
  return root;
}
