/** Entry point: bind the controller to the page and start (or resume via
 * `#s=<session_id>` in the URL, which survives reloads) a session. */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";

function sessionFromHash(): string | undefined {
  const match = /[#&]s=([0-9a-f]+)/.exec(window.location.hash);
  return match?.[1];
}

export async function boot(root: HTMLElement): Promise<SessionController> {
  const controller = new SessionController(root, new ApiClient(""));
  await controller.start(sessionFromHash());
  if (controller.sessionId) window.location.hash = `s=${controller.sessionId}`;
  return controller;
}

const root = document.getElementById("app");
if (root) void boot(root);
