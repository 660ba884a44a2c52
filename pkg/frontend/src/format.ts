/**
 * Display formatting for statistics.
 *
 * The dashboard never recomputes statistics; it renders exactly what the
 * backend sent. The one documented transformation is fixed 5-decimal
 * formatting, matching how H and p are quoted elsewhere (e.g. H 12.89752,
 * p 0.00033).
 */

export function formatStatistic(value: number): string {
  return value.toFixed(5);
}

export function formatIntensity(value: number): string {
  // per-mille with two decimals reads better than raw fractions
  return `${(value * 1000).toFixed(2)}‰`;
}

export function formatCount(value: number): string {
  return String(value);
}
