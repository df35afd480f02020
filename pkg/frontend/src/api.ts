import type {
  DartResult,
  Geometry,
  Heatmap,
  Recommendation,
  SessionState,
  SolutionInfo,
  WhatIfQuery,
} from "./types.js";

/** Minimal slice of the fetch contract, so tests can inject a fake. */
export interface FetchLike {
  (url: string, init?: RequestOptions): Promise<ResponseLike>;
}

export interface RequestOptions {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export interface RequestLogEntry {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly path: string,
    detail: string,
  ) {
    super(`${status} on ${path}: ${detail}`);
  }
}

const MUTATING_PATHS = [/\/dart$/, /^\/sessions$/];

/**
 * Typed client for the advisor service.  Every request is appended to
 * `log`, so tests (and the what-if flow audit) can assert which endpoints
 * a UI interaction touched.
 */
export class ApiClient {
  readonly log: RequestLogEntry[] = [];

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  /** True if the logged request can change server-side session state. */
  static isMutating(entry: RequestLogEntry): boolean {
    if (entry.method === "GET") return false;
    return MUTATING_PATHS.some((re) => re.test(entry.path));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.log.push({ method, path });
    const init: RequestOptions = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.baseUrl + path, init);
    const payload = await res.json();
    if (!res.ok) {
      const detail =
        typeof payload === "object" && payload !== null && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : "request failed";
      throw new ApiError(res.status, path, detail);
    }
    return payload as T;
  }

  geometry(): Promise<Geometry> {
    return this.request("GET", "/geometry");
  }

  solutions(): Promise<SolutionInfo[]> {
    return this.request("GET", "/solutions");
  }

  createSession(
    solutionA: string,
    solutionB: string,
    nLegs: number,
  ): Promise<{ id: string; state: SessionState }> {
    return this.request("POST", "/sessions", {
      solutionA,
      solutionB,
      n_legs: nLegs,
    });
  }

  sessionState(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}`);
  }

  recommendation(id: string): Promise<Recommendation> {
    return this.request("GET", `/sessions/${id}/recommendation`);
  }

  heatmap(id: string, downsample?: number): Promise<Heatmap> {
    const q = downsample ? `?downsample=${downsample}` : "";
    return this.request("GET", `/sessions/${id}/heatmap${q}`);
  }

  postDart(id: string, outcome: string): Promise<DartResult> {
    return this.request("POST", `/sessions/${id}/dart`, { outcome });
  }

  postDartAt(id: string, x: number, y: number): Promise<DartResult> {
    return this.request("POST", `/sessions/${id}/dart`, { x, y });
  }

  whatIf(id: string, query: WhatIfQuery): Promise<Recommendation> {
    return this.request("POST", `/sessions/${id}/whatif`, query);
  }
}
