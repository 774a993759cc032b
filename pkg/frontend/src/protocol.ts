// Wire protocol types for the teleoperation stream. One JSON object per
// WebSocket text frame; field names fixed by the server's protocol document.

export type ActionName = "forward" | "left" | "right" | "done";

export interface GoalVector {
  distance: number;
  bearing: number; // radians, 0 dead ahead, positive to the left
}

export interface ObsMessage {
  type: "obs";
  step: number;
  depth: number[]; // meters per ray, left-to-right across the fov
  valid: boolean[]; // false where nothing was seen within range
  goal: GoalVector;
  budget_left: number;
}

export interface EpisodeStartMessage {
  type: "episode_start";
  episode: number;
  n_episodes: number;
  scenario_id: string;
  budget: number;
  success_radius: number;
  fov: number; // radians
  n_rays: number;
}

export interface EpisodeResultPayload {
  scenario_id: string;
  agent: string;
  success: boolean;
  shortest_m: number;
  executed_m: number;
  budget_frac: number;
  steps: number;
  reason: string;
  spl_term: number;
  pace_term: number;
}

export interface EpisodeEndMessage {
  type: "episode_end";
  result: EpisodeResultPayload;
}

export interface SessionEndMessage {
  type: "session_end";
}

export interface ErrorMessage {
  type: "error";
  message: string;
  expected_step: number;
}

export type ServerMessage =
  | ObsMessage
  | EpisodeStartMessage
  | EpisodeEndMessage
  | SessionEndMessage
  | ErrorMessage;

export interface ActionMessage {
  type: "action";
  action: ActionName;
  step: number; // echo of the obs being answered
}

export class ProtocolError extends Error {}

const SERVER_TYPES = new Set([
  "obs",
  "episode_start",
  "episode_end",
  "session_end",
  "error",
]);

/** Parse and structurally validate one server frame. */
export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new ProtocolError(`frame is not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof data !== "object" || data === null) {
    throw new ProtocolError("frame is not an object");
  }
  const msg = data as Record<string, unknown>;
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    throw new ProtocolError(`unknown message type ${String(msg.type)}`);
  }
  if (msg.type === "obs") {
    if (
      typeof msg.step !== "number" ||
      !Array.isArray(msg.depth) ||
      !Array.isArray(msg.valid) ||
      typeof msg.budget_left !== "number" ||
      typeof (msg.goal as GoalVector)?.distance !== "number" ||
      typeof (msg.goal as GoalVector)?.bearing !== "number"
    ) {
      throw new ProtocolError("malformed obs message");
    }
    if (msg.depth.length !== (msg.valid as unknown[]).length) {
      throw new ProtocolError("depth/valid length mismatch");
    }
  }
  if (msg.type === "episode_end" && typeof msg.result !== "object") {
    throw new ProtocolError("malformed episode_end message");
  }
  return msg as unknown as ServerMessage;
}
