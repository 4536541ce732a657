/** Session state machine: fetch a query, collect one choice, submit, repeat.
 *
 * The controller owns all mutation: one pending query at a time, submit
 * disabled until a side is chosen and while a POST is in flight, and a
 * query_id guard so a rapid double-click records exactly one answer.  A
 * stale-answer conflict (the server already moved on) refetches the current
 * query instead of surfacing an error; anything else shows a retry banner.
 */

import { type ElicitationApi, isStale } from "./api.js";
import { renderBeliefSummary, renderBoard, renderFeatureTable, TRAJ_COLORS } from "./render.js";
import type { BeliefSummary, Environment, Label, QueryPayload } from "./types.js";
import { isComplete } from "./types.js";

type Side = "A" | "B";
const LABEL_FOR_SIDE: Record<Side, Label> = { A: "+1", B: "-1" };

export class SessionController {
  sessionId: string | null = null;
  query: QueryPayload | null = null;
  private lastEnv: Environment | null = null;
  private chosen: Side | null = null;
  private inFlight = false;
  private answeredIds = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ElicitationApi,
  ) {}

  /** Create a session (or adopt an existing id) and render the first query. */
  async start(existingId?: string): Promise<void> {
    await this.guarded(async () => {
      if (!this.sessionId) {
        this.sessionId = existingId ?? (await this.api.createSession()).session_id;
      }
      await this.refetch();
    });
  }

  /** Pull the pending query (or the completion summary) and render it. */
  async refetch(): Promise<void> {
    const response = await this.api.getQuery(this.sessionId!);
    if (isComplete(response)) {
      this.renderComplete(response.belief_summary);
    } else {
      this.renderQuery(response);
    }
  }

  /** Selecting a side arms the submit button; it never talks to the server. */
  choose(side: Side): void {
    if (!this.query || this.inFlight) return;
    this.chosen = side;
    for (const other of ["A", "B"] as const) {
      this.button(`choice-${other.toLowerCase()}`)?.classList.toggle("selected", other === side);
    }
    const submit = this.button("submit");
    if (submit) submit.disabled = false;
  }

  /** POST the choice; re-entry and repeated ids are no-ops by construction. */
  async submit(): Promise<void> {
    const query = this.query;
    if (!query || this.chosen === null) return;
    if (this.inFlight || this.answeredIds.has(query.query_id)) return;
    this.inFlight = true;
    this.answeredIds.add(query.query_id);
    this.setControlsEnabled(false);
    try {
      const response = await this.api.postAnswer(
        this.sessionId!,
        query.query_id,
        LABEL_FOR_SIDE[this.chosen],
      );
      if (isComplete(response)) {
        this.renderComplete(response.belief_summary);
      } else {
        this.renderQuery(response.next_query, response.belief_summary);
      }
    } catch (err) {
      if (isStale(err)) {
        await this.guarded(() => this.refetch());
      } else {
        this.answeredIds.delete(query.query_id);
        this.showBanner(err, () => this.submitRetry());
      }
    } finally {
      this.inFlight = false;
    }
  }

  private async submitRetry(): Promise<void> {
    this.hideBanner();
    await this.submit();
  }

  /** Run an async step; failures become the retry banner. */
  private async guarded(step: () => Promise<void>): Promise<void> {
    try {
      this.hideBanner();
      await step();
    } catch (err) {
      this.showBanner(err, () => this.guarded(step));
    }
  }

  // -- rendering ------------------------------------------------------

  private renderQuery(query: QueryPayload, belief?: BeliefSummary): void {
    this.query = query;
    this.lastEnv = query.env;
    this.chosen = null;
    this.root.replaceChildren();

    const counter = document.createElement("div");
    counter.className = "counter";
    counter.textContent = `Question ${query.iteration} of ${query.total}`;
    this.root.appendChild(counter);

    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.innerHTML =
      `Do you prefer route <b style="color:${TRAJ_COLORS.A}">A</b> ` +
      `or route <b style="color:${TRAJ_COLORS.B}">B</b>?`;
    this.root.appendChild(prompt);

    this.root.appendChild(renderBoard(query));
    this.root.appendChild(renderFeatureTable(query));

    const controls = document.createElement("div");
    controls.className = "controls";
    for (const side of ["A", "B"] as const) {
      const pick = document.createElement("button");
      pick.className = `choice-${side.toLowerCase()}`;
      pick.textContent = `Prefer ${side}`;
      pick.style.borderColor = TRAJ_COLORS[side];
      pick.addEventListener("click", () => this.choose(side));
      controls.appendChild(pick);
    }
    const submit = document.createElement("button");
    submit.className = "submit";
    submit.textContent = "Submit";
    submit.disabled = true;
    submit.addEventListener("click", () => void this.submit());
    controls.appendChild(submit);
    this.root.appendChild(controls);

    if (belief) {
      const progress = document.createElement("p");
      progress.className = "belief-progress";
      progress.textContent =
        `belief after ${belief.answered} answers — entropy ${belief.entropy.toFixed(3)} nats`;
      this.root.appendChild(progress);
    }
  }

  private renderComplete(summary: BeliefSummary): void {
    this.query = null;
    this.root.replaceChildren(renderBeliefSummary(summary, this.lastEnv ?? undefined));
  }

  private showBanner(err: unknown, retry: () => void): void {
    this.hideBanner();
    const banner = document.createElement("div");
    banner.className = "banner";
    const message = document.createElement("span");
    message.textContent = err instanceof Error ? err.message : String(err);
    const button = document.createElement("button");
    button.className = "retry";
    button.textContent = "Retry";
    button.addEventListener("click", retry);
    banner.append(message, button);
    this.root.prepend(banner);
    this.setControlsEnabled(true);
  }

  private hideBanner(): void {
    this.root.querySelector(".banner")?.remove();
  }

  private setControlsEnabled(enabled: boolean): void {
    for (const cls of ["choice-a", "choice-b", "submit"]) {
      const button = this.button(cls);
      if (button) button.disabled = !enabled;
    }
  }

  private button(cls: string): HTMLButtonElement | null {
    return this.root.querySelector<HTMLButtonElement>(`button.${cls}`);
  }
}
