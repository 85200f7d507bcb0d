/**
 * Live overlay state: target curve polyline, sung trajectory, actuator
 * highlight, and trial phase badge. Pure state; rendering is elsewhere.
 *
 * Stream messages are applied in arrival order. The time axis uses server
 * t_ms exclusively, so live and replayed sessions produce identical views.
 */

import {
  FeedbackMode,
  HapticPayload,
  Melody,
  ScoreReport,
  StreamMessage,
  hzToMidi,
  parseStreamMessage,
} from "./messages.js";

/** One sung-layer sample: a plotted point, or a gap marker when unvoiced. */
export interface SungSample {
  t_ms: number;
  /** Fractional MIDI value, or null for a gap (unvoiced frame). */
  midi: number | null;
}

/** One horizontal segment of the piecewise-constant target curve. */
export interface TargetSegment {
  start_ms: number;
  end_ms: number;
  midi: number;
}

export type Phase = "idle" | "phonating" | "finalizing" | "done";

/** Build the target polyline directly from the melody's note list. */
export function targetSegments(melody: Melody): TargetSegment[] {
  return melody.notes.map((n) => ({
    start_ms: n.onset_ms,
    end_ms: n.onset_ms + n.duration_ms,
    midi: n.midi,
  }));
}

export class LiveView {
  readonly target: TargetSegment[];
  readonly mode: FeedbackMode;
  readonly layoutSize: number;

  /** Samples currently drawn in the sung layer. */
  sung: SungSample[] = [];
  /** Highlighted actuator index, or null when none is active. */
  actuatorHighlight: number | null = null;
  phase: Phase = "idle";
  score: ScoreReport | null = null;
  sessionId: string | null = null;
  lastError: string | null = null;

  /** Terminal mode: frames buffered during phonation for the post-trial reveal. */
  private buffered: SungSample[] = [];

  constructor(melody: Melody, mode: FeedbackMode, layoutSize = 18) {
    this.target = targetSegments(melody);
    this.mode = mode;
    this.layoutSize = layoutSize;
  }

  /**
   * Apply one raw message from the stream. Malformed input is dropped with
   * a console diagnostic and leaves the view unchanged. Returns the parsed
   * message, or null when it was dropped.
   */
  apply(raw: unknown): StreamMessage | null {
    const msg = parseStreamMessage(raw);
    if (msg === null) {
      console.warn("dropping malformed stream message", raw);
      return null;
    }
    switch (msg.type) {
      case "pitch_frame": {
        const sample: SungSample = {
          t_ms: msg.t_ms,
          midi: msg.f0_hz === null ? null : hzToMidi(msg.f0_hz),
        };
        if (this.mode === "terminal" && this.score === null) {
          this.buffered.push(sample);
        } else {
          this.sung.push(sample);
        }
        break;
      }
      case "feedback_event": {
        if (msg.kind === "feedback" && msg.channel === "haptic") {
          const p = msg.payload as HapticPayload;
          this.actuatorHighlight = Math.min(Math.max(p.actuator, 0), this.layoutSize - 1);
        }
        break;
      }
      case "trial_state":
        this.phase = msg.phase;
        break;
      case "score_report": {
        this.score = msg.score;
        this.sessionId = msg.session_id;
        if (this.mode === "terminal" && this.buffered.length > 0) {
          this.sung = this.sung.concat(this.buffered);
          this.buffered = [];
        }
        break;
      }
      case "error":
        this.lastError = msg.message;
        break;
    }
    return msg;
  }

  /** Plotted (voiced) points currently visible in the sung layer. */
  plottedPoints(): SungSample[] {
    return this.sung.filter((s) => s.midi !== null);
  }

  /** Gap markers currently visible in the sung layer. */
  gapMarkers(): SungSample[] {
    return this.sung.filter((s) => s.midi === null);
  }
}
