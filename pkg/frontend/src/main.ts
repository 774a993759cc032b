// Browser bootstrap: create a session, open its stream, and wire the
// canvas, keyboard, and summary panels to the client state machine.

import { TeleopClient } from "./client.js";
import { ActionMessage, EpisodeResultPayload } from "./protocol.js";
import { CanvasSurface, renderView } from "./renderer.js";
import { episodeSummary, suiteSummaryLines } from "./summary.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("no 2d context");
  const surface = new CanvasSurface(ctx);
  const banner = el<HTMLDivElement>("banner");
  const overlay = el<HTMLDivElement>("overlay");

  const operator =
    new URLSearchParams(window.location.search).get("operator") ?? "human";
  const created = await fetch("/sessions", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ operator }),
  }).then((r) => r.json());
  const sessionId: string = created.session_id;

  const wsProto = window.location.protocol === "https:" ? "wss" : "ws";
  const ws = new WebSocket(
    `${wsProto}://${window.location.host}/sessions/${sessionId}/stream`,
  );

  const showLines = (
    title: string,
    lines: { label: string; value: string }[],
    footer: string,
  ) => {
    overlay.innerHTML =
      `<h2>${title}</h2>` +
      lines.map((l) => `<div><span>${l.label}</span><b>${l.value}</b></div>`).join("") +
      `<p>${footer}</p>`;
    overlay.style.display = "block";
  };

  const client = new TeleopClient({
    send(msg: ActionMessage) {
      ws.send(JSON.stringify(msg));
    },
    render(obs, meta) {
      overlay.style.display = "none";
      banner.textContent = "";
      renderView(surface, obs, meta);
    },
    showEpisodeEnd(result: EpisodeResultPayload) {
      showLines(
        result.success ? "Episode complete" : "Episode failed",
        episodeSummary(result),
        "press Space for the next episode",
      );
    },
    showSessionEnd() {
      fetch(`/results?session=${sessionId}`)
        .then((r) => r.json())
        .then((body) => {
          const lines = body.summary
            ? suiteSummaryLines(body.summary)
            : [{ label: "episodes", value: "0" }];
          showLines("Suite complete", lines, "you can close this tab");
        });
    },
    showError(message: string) {
      banner.textContent = `protocol: ${message}`;
    },
  });

  ws.onmessage = (event) => client.onServerFrame(String(event.data));
  ws.onclose = () => {
    if (!client.finished) banner.textContent = "connection closed";
  };
  window.addEventListener("keydown", (event) => {
    if (Object.keys({ ArrowUp: 1, ArrowLeft: 1, ArrowRight: 1 }).includes(event.key)) {
      event.preventDefault();
    }
    client.onKey(event.key);
  });
}

boot().catch((e) => {
  const banner = document.getElementById("banner");
  if (banner !== null) banner.textContent = String(e);
});
