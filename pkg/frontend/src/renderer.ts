// First-person rendering of the depth fan: one vertical wall column per
// ray, height inversely proportional to the perpendicular distance, plus
// the goal HUD (bearing arrow, distance readout, budget bar). Everything
// drawn derives from the last ObsMessage; there is no world state here.

import { EpisodeStartMessage, ObsMessage } from "./protocol.js";

/** Minimal draw surface so the renderer runs headlessly in tests. */
export interface DrawSurface {
  readonly width: number;
  readonly height: number;
  clear(color: string): void;
  fillRect(x: number, y: number, w: number, h: number, color: string): void;
  fillText(text: string, x: number, y: number, color: string, font?: string): void;
  line(x0: number, y0: number, x1: number, y1: number, color: string, width?: number): void;
}

export interface EpisodeMeta {
  scenarioId: string;
  episode: number;
  nEpisodes: number;
  budget: number;
  fov: number;
}

export function metaFrom(msg: EpisodeStartMessage): EpisodeMeta {
  return {
    scenarioId: msg.scenario_id,
    episode: msg.episode,
    nEpisodes: msg.n_episodes,
    budget: msg.budget,
    fov: msg.fov,
  };
}

// wall column height = WALL_SCALE / perpendicular distance, in px at a
// nominal 400 px viewport height
const WALL_SCALE = 160;
const HORIZON = 0.52; // fraction of height

function shade(distance: number, maxRange: number): string {
  const t = Math.max(0, Math.min(1, 1 - distance / maxRange));
  const v = Math.round(40 + 180 * t);
  return `rgb(${v},${v},${v + 10})`;
}

export function renderView(
  surface: DrawSurface,
  obs: ObsMessage,
  meta: EpisodeMeta,
): void {
  const w = surface.width;
  const h = surface.height;
  surface.clear("#10131a");
  // floor
  surface.fillRect(0, h * HORIZON, w, h * (1 - HORIZON), "#1d222e");

  const n = obs.depth.length;
  const colWidth = w / n;
  const maxRange = 4.0;
  for (let i = 0; i < n; i++) {
    if (!obs.valid[i]) continue; // open space beyond sensor range
    // rays come left-to-right; correct the fisheye with cos(bearing)
    const bearing = meta.fov / 2 - (i * meta.fov) / Math.max(n - 1, 1);
    const d = Math.max(obs.depth[i] * Math.cos(bearing), 0.05);
    const colH = Math.min((WALL_SCALE / d) * (h / 400), h);
    const y = (h - colH) / 2 + h * (HORIZON - 0.5);
    surface.fillRect(i * colWidth, y, Math.ceil(colWidth), colH, shade(d, maxRange));
  }

  drawHud(surface, obs, meta);
}

function drawHud(surface: DrawSurface, obs: ObsMessage, meta: EpisodeMeta): void {
  const w = surface.width;
  const h = surface.height;
  // budget bar
  const frac = Math.max(0, Math.min(1, obs.budget_left / meta.budget));
  surface.fillRect(10, 10, (w - 20) * frac, 8, "#4caf7d");
  surface.fillRect(10 + (w - 20) * frac, 10, (w - 20) * (1 - frac), 8, "#333a49");
  // goal arrow: bearing 0 points up (straight ahead), positive bearing left
  const cx = w / 2;
  const cy = h - 46;
  const r = 22;
  const a = Math.PI / 2 + obs.goal.bearing; // screen angle
  surface.line(cx, cy, cx + r * Math.cos(a), cy - r * Math.sin(a), "#ffd54f", 3);
  surface.fillText(
    `${obs.goal.distance.toFixed(2)} m`,
    cx + 30,
    cy + 4,
    "#ffd54f",
  );
  surface.fillText(
    `step ${obs.step}  budget ${obs.budget_left}  ${meta.scenarioId} ` +
      `(${meta.episode + 1}/${meta.nEpisodes})`,
    10,
    h - 12,
    "#9aa4b5",
  );
}

/** Canvas adapter used by the browser entry point. */
export class CanvasSurface implements DrawSurface {
  constructor(private ctx: CanvasRenderingContext2D) {}

  get width(): number {
    return this.ctx.canvas.width;
  }

  get height(): number {
    return this.ctx.canvas.height;
  }

  clear(color: string): void {
    this.ctx.fillStyle = color;
    this.ctx.fillRect(0, 0, this.width, this.height);
  }

  fillRect(x: number, y: number, w: number, h: number, color: string): void {
    this.ctx.fillStyle = color;
    this.ctx.fillRect(x, y, w, h);
  }

  fillText(text: string, x: number, y: number, color: string, font?: string): void {
    this.ctx.fillStyle = color;
    this.ctx.font = font ?? "13px monospace";
    this.ctx.fillText(text, x, y);
  }

  line(x0: number, y0: number, x1: number, y1: number, color: string, width = 1): void {
    this.ctx.strokeStyle = color;
    this.ctx.lineWidth = width;
    this.ctx.beginPath();
    this.ctx.moveTo(x0, y0);
    this.ctx.lineTo(x1, y1);
    this.ctx.stroke();
  }
}
