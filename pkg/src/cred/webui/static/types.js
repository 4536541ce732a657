/** Wire types for the elicitation HTTP API. The UI renders these payloads
 * verbatim; it never recomputes rewards, features, or beliefs. */
export function isComplete(r) {
    return "status" in r && r.status === "complete";
}
