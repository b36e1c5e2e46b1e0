/** Thin typed client for the exploration service endpoints. */

import type { ExpandDelta, GraphDocument, StatsDocument } from "./types.js";

export type ApiErrorKind =
  | "target-not-found"
  | "dependency"
  | "http"
  | "unreachable";

export class ApiError extends Error {
  readonly kind: ApiErrorKind;
  readonly status: number | null;
  readonly prerequisites: string[];

  constructor(kind: ApiErrorKind, message: string, status: number | null = null,
              prerequisites: string[] = []) {
    super(message);
    this.kind = kind;
    this.status = status;
    this.prerequisites = prerequisites;
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError("unreachable", `service unreachable: ${err}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through to the generic branches below
    }
    if (response.ok) {
      return body as T;
    }
    const doc = (body ?? {}) as { message?: string; prerequisites?: string[] };
    const message = doc.message ?? `HTTP ${response.status}`;
    if (response.status === 404) {
      throw new ApiError("target-not-found", message, 404);
    }
    if (response.status === 409 && Array.isArray(doc.prerequisites)) {
      throw new ApiError("dependency", message, 409, doc.prerequisites);
    }
    throw new ApiError("http", message, response.status);
  }

  network(): Promise<GraphDocument> {
    return this.request<GraphDocument>("/api/network");
  }

  stats(): Promise<StatsDocument> {
    return this.request<StatsDocument>("/api/stats");
  }

  expand(target: string): Promise<ExpandDelta> {
    return this.request<ExpandDelta>("/api/expand", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ target }),
    });
  }

  undo(): Promise<ExpandDelta> {
    return this.request<ExpandDelta>("/api/undo", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
  }
}
