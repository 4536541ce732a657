/** Thin typed client over the elicitation endpoints.
 *
 * Every method either resolves with a parsed payload or throws `ApiError`
 * (HTTP failure, with the server's `detail` when present) / the underlying
 * `TypeError` (network failure). Callers decide how to recover; `isStale`
 * identifies the answer-conflict that means "refetch the current query".
 */
export class ApiError extends Error {
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
        this.name = "ApiError";
    }
}
/** True when an answer was rejected because its query_id is no longer pending. */
export function isStale(err) {
    return err instanceof ApiError && err.status === 409 && err.detail.includes("refetch");
}
async function parse(response) {
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = (await response.json());
            if (body && body.detail !== undefined)
                detail = JSON.stringify(body.detail);
            if (typeof body?.detail === "string")
                detail = body.detail;
        }
        catch {
            /* non-JSON error body; keep the status text */
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json());
}
export class ApiClient {
    constructor(base = "") {
        this.base = base;
    }
    async createSession(seed) {
        const response = await fetch(`${this.base}/sessions`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(seed === undefined ? {} : { seed }),
        });
        return parse(response);
    }
    async getQuery(sessionId) {
        const response = await fetch(`${this.base}/sessions/${sessionId}/query`);
        return parse(response);
    }
    async postAnswer(sessionId, queryId, label) {
        const response = await fetch(`${this.base}/sessions/${sessionId}/answer`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ query_id: queryId, label }),
        });
        return parse(response);
    }
    async getBelief(sessionId) {
        const response = await fetch(`${this.base}/sessions/${sessionId}/belief`);
        return parse(response);
    }
}
