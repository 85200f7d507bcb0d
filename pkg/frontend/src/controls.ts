/**
 * Trial control state machine: melody/mode selection plus start/stop over
 * the `/live` connection. Exactly one control message is sent per user
 * action, and controls report themselves disabled in states where the
 * action is illegal (the caller greys out the corresponding widgets).
 */

import { ControlMessage, FeedbackMode, StreamMessage } from "./messages.js";

export type ControlState = "connected" | "running" | "stopping";

export class TrialController {
  private readonly send: (msg: ControlMessage) => void;
  state: ControlState = "connected";
  melodyId: string | null = null;
  mode: FeedbackMode = "sync";
  lastServerError: string | null = null;

  constructor(send: (msg: ControlMessage) => void) {
    this.send = send;
    this.send({ type: "hello" });
  }

  /** Mode selection is locked from start_trial until score_report. */
  canSelect(): boolean {
    return this.state === "connected";
  }

  canStart(): boolean {
    return this.state === "connected" && this.melodyId !== null;
  }

  canStop(): boolean {
    return this.state === "running";
  }

  /** Returns true if the selection was applied (false when locked mid-trial). */
  selectMelody(melodyId: string): boolean {
    if (!this.canSelect()) return false;
    this.melodyId = melodyId;
    return true;
  }

  selectMode(mode: FeedbackMode): boolean {
    if (!this.canSelect()) return false;
    this.mode = mode;
    return true;
  }

  /** Returns true if a start_trial message was sent. */
  start(): boolean {
    if (!this.canStart()) return false;
    // State changes before send: a server that replies synchronously may
    // deliver the score_report (which resets the state) during send().
    this.state = "running";
    this.send({ type: "start_trial", melody_id: this.melodyId as string, mode: this.mode });
    return true;
  }

  /** Returns true if a stop_trial message was sent. */
  stop(): boolean {
    if (!this.canStop()) return false;
    this.state = "stopping";
    this.send({ type: "stop_trial" });
    return true;
  }

  /**
   * Observe a server message. Errors are recorded for display and the
   * connection is retained; score_report unlocks the controls.
   */
  onMessage(msg: StreamMessage): void {
    if (msg.type === "error") {
      this.lastServerError = msg.message;
    } else if (msg.type === "score_report") {
      this.state = "connected";
    }
  }
}
