/**
 * Typed client for the read-only topic API under /api/v1.
 *
 * Every panel owns a `LatestWins` gate: starting a new request aborts the
 * panel's in-flight one, so a stale response can never overwrite a newer
 * view.
 */

export interface TermWeight {
  term: string;
  weight: number;
}

export interface TopicCard {
  topic_id: number;
  size: number;
  similarity: number;
  terms: TermWeight[];
}

export interface SearchResponse {
  status: "ok" | "all_terms_unknown";
  results: TopicCard[];
}

export interface SeriesPoint {
  bin_start: string;
  intensity: number;
  count: number;
}

export interface OverlayPayload {
  case_counts: { date: string; value: number }[];
  events: { date: string; label: string }[];
}

export interface SeriesResponse {
  topic_id: number;
  bin_weeks: number;
  from: string;
  to: string;
  series: SeriesPoint[];
  overlays: OverlayPayload;
}

export interface ModelInfo {
  documents: number;
  topics: number;
  vocabulary: number;
  window: [string, string];
  bin_widths: number[];
  topic_sizes: number[];
}

export interface TestRequest {
  topic_id: number;
  window1: [string, string];
  window2: [string, string];
  bin_weeks: number;
  alpha?: number;
}

export interface TestResult {
  topic_id: number;
  bin_weeks: number;
  window1: [string, string];
  window2: [string, string];
  alpha: number;
  h: number;
  df: number;
  p_value: number;
  significant: boolean;
  group_sizes: number[];
  rank_sums: number[];
  windows_overlap: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseJson(response: Response): Promise<unknown> {
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const envelope = body as { error?: { code?: string; message?: string } } | null;
    throw new ApiError(
      response.status,
      envelope?.error?.code ?? "unknown_error",
      envelope?.error?.message ?? `HTTP ${response.status}`,
    );
  }
  return body;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get(path: string, signal?: AbortSignal): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, { signal });
    return parseJson(response);
  }

  modelInfo(signal?: AbortSignal): Promise<ModelInfo> {
    return this.get("/api/v1/model", signal) as Promise<ModelInfo>;
  }

  searchTopics(query: string, n = 6, signal?: AbortSignal): Promise<SearchResponse> {
    const params = new URLSearchParams({ q: query, n: String(n) });
    return this.get(`/api/v1/topics/search?${params}`, signal) as Promise<SearchResponse>;
  }

  topicSeries(
    topicId: number,
    binWeeks: number,
    signal?: AbortSignal,
  ): Promise<SeriesResponse> {
    const params = new URLSearchParams({ bin_weeks: String(binWeeks) });
    return this.get(
      `/api/v1/topics/${topicId}/series?${params}`,
      signal,
    ) as Promise<SeriesResponse>;
  }

  overlays(signal?: AbortSignal): Promise<OverlayPayload> {
    return this.get("/api/v1/overlays", signal) as Promise<OverlayPayload>;
  }

  async runTest(request: TestRequest, signal?: AbortSignal): Promise<TestResult> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1/tests`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
      signal,
    });
    return parseJson(response) as Promise<TestResult>;
  }
}

/** One in-flight request per panel; a newer call aborts the older one. */
export class LatestWins {
  private controller: AbortController | null = null;

  async run<T>(job: (signal: AbortSignal) => Promise<T>): Promise<T> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      return await job(controller.signal);
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === "AbortError";
}
