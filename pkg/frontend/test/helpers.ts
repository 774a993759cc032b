import { ActionMessage, EpisodeResultPayload, ObsMessage } from "../src/protocol.js";
import { DrawSurface } from "../src/renderer.js";

/** Recording draw surface for headless rendering tests. */
export class FakeSurface implements DrawSurface {
  readonly width = 768;
  readonly height = 400;
  calls: { op: string; args: unknown[] }[] = [];
  clears = 0;

  clear(color: string): void {
    this.clears += 1;
    this.calls.push({ op: "clear", args: [color] });
  }

  fillRect(x: number, y: number, w: number, h: number, color: string): void {
    this.calls.push({ op: "fillRect", args: [x, y, w, h, color] });
  }

  fillText(text: string, x: number, y: number, color: string): void {
    this.calls.push({ op: "fillText", args: [text, x, y, color] });
  }

  line(x0: number, y0: number, x1: number, y1: number, color: string): void {
    this.calls.push({ op: "line", args: [x0, y0, x1, y1, color] });
  }

  rects(): { x: number; y: number; w: number; h: number; color: string }[] {
    return this.calls
      .filter((c) => c.op === "fillRect")
      .map((c) => {
        const [x, y, w, h, color] = c.args as [number, number, number, number, string];
        return { x, y, w, h, color };
      });
  }
}

export function obsMessage(partial: Partial<ObsMessage> = {}): ObsMessage {
  const n = 9;
  return {
    type: "obs",
    step: 0,
    depth: new Array(n).fill(2.0),
    valid: new Array(n).fill(true),
    goal: { distance: 3.0, bearing: 0.0 },
    budget_left: 500,
    ...partial,
  };
}

export function episodeStart(partial: Record<string, unknown> = {}) {
  return {
    type: "episode_start",
    episode: 0,
    n_episodes: 1,
    scenario_id: "fix-000",
    budget: 500,
    success_radius: 0.5,
    fov: Math.PI / 2,
    n_rays: 9,
    ...partial,
  };
}

export function resultPayload(
  partial: Partial<EpisodeResultPayload> = {},
): EpisodeResultPayload {
  return {
    scenario_id: "fix-000",
    agent: "human",
    success: true,
    shortest_m: 10.0,
    executed_m: 20.0,
    budget_frac: 0.2,
    steps: 100,
    reason: "Reached",
    spl_term: 0.5,
    pace_term: 0.8,
    ...partial,
  };
}

export function collectSent(): { sent: ActionMessage[]; send: (m: ActionMessage) => void } {
  const sent: ActionMessage[] = [];
  return { sent, send: (m) => sent.push(m) };
}
