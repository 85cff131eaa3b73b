import type {
  CorrectionAck,
  IterateResult,
  SliceDoc,
  StateDoc,
  TagsetDoc,
} from "./types";

/** Error from the service carrying the HTTP status and the error document. */
export class ApiError extends Error {
  status: number;
  pending: string[];

  constructor(status: number, message: string, pending: string[] = []) {
    super(message);
    this.status = status;
    this.pending = pending;
  }

  /** Conflict (409) means state clashed; anything else from the API is a bug or bad input. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

async function request<T>(base: string, method: string, path: string, body?: unknown): Promise<T> {
  const init: RequestInit = { method };
  if (body !== undefined) {
    init.headers = { "Content-Type": "application/json" };
    init.body = JSON.stringify(body);
  }
  const response = await fetch(base + path, init);
  const text = await response.text();
  if (!response.ok) {
    let message = `${response.status} on ${path}`;
    let pending: string[] = [];
    try {
      const doc = JSON.parse(text);
      if (doc.error) message = doc.error;
      if (Array.isArray(doc.pending)) pending = doc.pending;
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(response.status, message, pending);
  }
  return JSON.parse(text) as T;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  getState(): Promise<StateDoc> {
    return request(this.base, "GET", "/api/state");
  }

  getTagset(): Promise<TagsetDoc> {
    return request(this.base, "GET", "/api/tagset");
  }

  getSlice(iteration: number): Promise<SliceDoc> {
    return request(this.base, "GET", `/api/slice?iter=${iteration}`);
  }

  postCorrections(verseId: string, corrections: [number, string][]): Promise<CorrectionAck> {
    return request(this.base, "POST", "/api/corrections", {
      verse_id: verseId,
      corrections,
    });
  }

  postIterate(): Promise<IterateResult> {
    return request(this.base, "POST", "/api/iterate", {});
  }

  /** Raw CSV text; the chart consumes these bytes without recomputing anything. */
  async getMetricsCsv(): Promise<string> {
    const response = await fetch(this.base + "/api/metrics.csv");
    if (!response.ok) {
      throw new ApiError(response.status, `metrics.csv fetch failed (${response.status})`);
    }
    return response.text();
  }
}
