/** Thin typed client over the elicitation endpoints.
 *
 * Every method either resolves with a parsed payload or throws `ApiError`
 * (HTTP failure, with the server's `detail` when present) / the underlying
 * `TypeError` (network failure). Callers decide how to recover; `isStale`
 * identifies the answer-conflict that means "refetch the current query".
 */

import type {
  AnswerResponse,
  BeliefSummary,
  Label,
  QueryResponse,
  SessionCreated,
} from "./types.js";

/** What the controller needs from the transport; `ApiClient` is the real one. */
export interface ElicitationApi {
  createSession(seed?: number): Promise<SessionCreated>;
  getQuery(sessionId: string): Promise<QueryResponse>;
  postAnswer(sessionId: string, queryId: string, label: Label): Promise<AnswerResponse>;
  getBelief(sessionId: string): Promise<BeliefSummary>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

/** True when an answer was rejected because its query_id is no longer pending. */
export function isStale(err: unknown): boolean {
  return err instanceof ApiError && err.status === 409 && err.detail.includes("refetch");
}

async function parse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (body && body.detail !== undefined) detail = JSON.stringify(body.detail);
      if (typeof body?.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status text */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient implements ElicitationApi {
  constructor(readonly base: string = "") {}

  async createSession(seed?: number): Promise<SessionCreated> {
    const response = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(seed === undefined ? {} : { seed }),
    });
    return parse<SessionCreated>(response);
  }

  async getQuery(sessionId: string): Promise<QueryResponse> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/query`);
    return parse<QueryResponse>(response);
  }

  async postAnswer(sessionId: string, queryId: string, label: Label): Promise<AnswerResponse> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ query_id: queryId, label }),
    });
    return parse<AnswerResponse>(response);
  }

  async getBelief(sessionId: string): Promise<BeliefSummary> {
    const response = await fetch(`${this.base}/sessions/${sessionId}/belief`);
    return parse<BeliefSummary>(response);
  }
}
