// Session state machine: consumes server frames, drives the renderer and
// summary views, and emits at most one ActionMessage per accepted
// keypress. Transport and DOM are injected so the whole flow runs
// headlessly in tests.

import { InputState } from "./input.js";
import {
  ActionMessage,
  EpisodeResultPayload,
  ObsMessage,
  parseServerMessage,
  ProtocolError,
} from "./protocol.js";
import { EpisodeMeta, metaFrom } from "./renderer.js";

export interface ClientHooks {
  send(msg: ActionMessage): void;
  render(obs: ObsMessage, meta: EpisodeMeta): void;
  showEpisodeEnd(result: EpisodeResultPayload): void;
  showSessionEnd(): void;
  showError(message: string): void;
}

export class TeleopClient {
  readonly input = new InputState();
  meta: EpisodeMeta | null = null;
  lastObs: ObsMessage | null = null;
  results: EpisodeResultPayload[] = [];
  framesRendered = 0;
  actionsSent = 0;
  finished = false;
  // the summary overlay pauses input until dismissed
  overlayVisible = false;

  constructor(private hooks: ClientHooks) {}

  onServerFrame(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (e) {
      this.hooks.showError(
        e instanceof ProtocolError ? e.message : String(e),
      );
      return;
    }
    switch (msg.type) {
      case "episode_start":
        this.meta = metaFrom(msg);
        break;
      case "obs":
        this.lastObs = msg;
        this.input.acknowledge(msg.step);
        if (!this.overlayVisible) {
          this.input.phase = "running";
          this.renderCurrent();
        }
        break;
      case "episode_end":
        this.results.push(msg.result);
        this.input.inFlight = false;
        this.input.phase = "awaiting";
        this.overlayVisible = true;
        this.hooks.showEpisodeEnd(msg.result);
        break;
      case "session_end":
        this.finished = true;
        this.input.phase = "finished";
        this.hooks.showSessionEnd();
        break;
      case "error":
        this.input.resync(msg.expected_step);
        this.hooks.showError(msg.message);
        break;
    }
  }

  /** Dismiss the episode summary and resume with the already-received
   * observation of the next episode. */
  dismissOverlay(): void {
    if (!this.overlayVisible) return;
    this.overlayVisible = false;
    if (this.finished) return;
    this.input.phase = "running";
    this.renderCurrent();
  }

  onKey(key: string): void {
    if (this.overlayVisible) {
      if (key === " " || key === "n") this.dismissOverlay();
      return;
    }
    const msg = this.input.handleKey(key);
    if (msg !== null) {
      this.actionsSent += 1;
      this.hooks.send(msg);
    }
  }

  private renderCurrent(): void {
    if (this.lastObs !== null && this.meta !== null) {
      this.framesRendered += 1;
      this.hooks.render(this.lastObs, this.meta);
    }
  }
}
