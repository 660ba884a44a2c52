/**
 * Client-side word-cloud layout from the (term, weight) wire format.
 *
 * Greedy placement in descending weight order along an Archimedean
 * spiral: each word walks outward from the center until its box stops
 * colliding with already-placed boxes. Font size scales linearly with
 * weight, with the heaviest term pinned to a reference size. Purely
 * arithmetic, so a fixed seed and viewport give an identical layout.
 */

import type { TermWeight } from "./api.js";

export interface PlacedWord {
  term: string;
  x: number; // box center
  y: number;
  size: number; // font px
  width: number;
  height: number;
}

export interface CloudOptions {
  width: number;
  height: number;
  maxWords?: number;
  referenceSize?: number; // font px of the heaviest term
  minSize?: number;
  seed?: number;
}

// average glyph advance relative to font size for common sans faces
const GLYPH_ASPECT = 0.6;

function mulberry(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

interface Box {
  left: number;
  top: number;
  right: number;
  bottom: number;
}

function collides(box: Box, placed: Box[]): boolean {
  for (const other of placed) {
    if (
      box.left < other.right &&
      box.right > other.left &&
      box.top < other.bottom &&
      box.bottom > other.top
    ) {
      return true;
    }
  }
  return false;
}

export function layoutWordCloud(terms: TermWeight[], options: CloudOptions): PlacedWord[] {
  const {
    width,
    height,
    maxWords = 30,
    referenceSize = 28,
    minSize = 9,
    seed = 1,
  } = options;
  const sorted = [...terms]
    .sort((a, b) => b.weight - a.weight || (a.term < b.term ? -1 : 1))
    .slice(0, maxWords);
  if (!sorted.length) return [];

  const heaviest = sorted[0].weight || 1;
  const rand = mulberry(seed);
  const placed: PlacedWord[] = [];
  const boxes: Box[] = [];
  const cx = width / 2;
  const cy = height / 2;

  for (const { term, weight } of sorted) {
    const size = Math.max(minSize, referenceSize * (weight / heaviest));
    const w = Math.max(4, term.length * size * GLYPH_ASPECT);
    const h = size * 1.2;

    const angle0 = rand() * 2 * Math.PI;
    let placedWord: PlacedWord | null = null;
    for (let step = 0; step < 2000; step++) {
      const radius = 0.9 * step * 0.5;
      const angle = angle0 + step * 0.35;
      const x = cx + radius * Math.cos(angle);
      const y = cy + radius * Math.sin(angle) * (height / width);
      const box: Box = {
        left: x - w / 2,
        top: y - h / 2,
        right: x + w / 2,
        bottom: y + h / 2,
      };
      if (box.left < 0 || box.top < 0 || box.right > width || box.bottom > height) continue;
      if (collides(box, boxes)) continue;
      placedWord = { term, x, y, size, width: w, height: h };
      boxes.push(box);
      break;
    }
    if (placedWord) placed.push(placedWord);
  }
  return placed;
}

const PALETTE = ["#1666b0", "#1a8a5a", "#b05216", "#7a3fa0", "#a01640", "#4a6472"];

export function renderWordCloudSvg(words: PlacedWord[], options: CloudOptions): string {
  const parts = [
    `<svg viewBox="0 0 ${options.width} ${options.height}" class="wordcloud" role="img">`,
  ];
  words.forEach((word, i) => {
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<text x="${word.x.toFixed(1)}" y="${word.y.toFixed(1)}" ` +
        `font-size="${word.size.toFixed(1)}" fill="${color}" ` +
        `text-anchor="middle" dominant-baseline="middle">${escapeXml(word.term)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

export function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
