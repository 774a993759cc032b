// Keyboard-to-action mapping with the step-echo protocol invariant: at
// most one unacknowledged action in flight; extra keypresses are dropped,
// never queued.

import { ActionMessage, ActionName } from "./protocol.js";

const KEY_BINDINGS: Record<string, ActionName> = {
  ArrowUp: "forward",
  w: "forward",
  W: "forward",
  ArrowLeft: "left",
  a: "left",
  A: "left",
  ArrowRight: "right",
  d: "right",
  D: "right",
  Enter: "done",
};

export type InputPhase = "awaiting" | "running" | "finished";

export class InputState {
  phase: InputPhase = "awaiting";
  inFlight = false;
  step = 0;
  dropped = 0; // keypresses ignored while an action was in flight

  /** Map a keypress to an ActionMessage, or null when it must be ignored
   * (unbound key, wrong phase, or an action already in flight). */
  handleKey(key: string): ActionMessage | null {
    const action = KEY_BINDINGS[key];
    if (action === undefined) return null;
    if (this.phase !== "running") return null;
    if (this.inFlight) {
      this.dropped += 1;
      return null;
    }
    this.inFlight = true;
    return { type: "action", action, step: this.step };
  }

  /** Server accepted the action (next obs arrived). */
  acknowledge(nextStep: number): void {
    this.inFlight = false;
    this.step = nextStep;
  }

  /** Server rejected the action (stale echo or protocol error). */
  resync(expectedStep: number): void {
    this.inFlight = false;
    if (expectedStep >= 0) this.step = expectedStep;
  }
}
