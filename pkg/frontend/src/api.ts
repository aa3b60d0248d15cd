// Thin fetch client for the exploration service. At most one exploration
// request is in flight; a new submit cancels the previous one.

import type { ExplorationResult, GraphDocument, SearchFilters } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body.detail) detail = String(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async explore(
    query: string,
    filters: SearchFilters,
    limit: number,
  ): Promise<ExplorationResult> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      return await this.request<ExplorationResult>("/api/explore", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ query, limit, filters }),
        signal: controller.signal,
      });
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  graph(queryId: string): Promise<GraphDocument> {
    return this.request<GraphDocument>(`/api/graph/${queryId}`);
  }

  health(): Promise<{ status: string; papers: number }> {
    return this.request("/api/health");
  }
}
