/**
 * Wire types for the `/live` websocket stream and the REST endpoints,
 * mirroring the server's JSON message shapes, plus defensive parsing.
 *
 * The UI never originates numeric results: everything here is either a
 * verbatim server value or a structural validation of one.
 */

export type FeedbackMode = "sync" | "terminal";

export interface PitchFrameMessage {
  type: "pitch_frame";
  t_ms: number;
  kind: "pitch";
  f0_hz: number | null;
  confidence: number;
  rms: number;
}

export interface HapticPayload {
  t_ms: number;
  actuator: number;
  intensity: number;
  duration_ms: number;
}

export interface FeedbackEventMessage {
  type: "feedback_event";
  t_ms: number;
  kind: "trigger" | "feedback";
  code?: number;
  channel?: "visual" | "auditory" | "haptic";
  payload?: unknown;
  mode: FeedbackMode;
}

export interface NotePerformance {
  note_index: number;
  target_midi: number;
  sung_midi: number | null;
  voiced_fraction: number;
  sung_onset_ms: number | null;
  onset_error_ms: number | null;
}

export interface ScoreReport {
  pitch_deviation_cents: number | null;
  pitch_deviation_transposed_cents: number | null;
  contour_accuracy: number;
  rhythm_error_ms: number | null;
  scored_note_count: number;
  notes: NotePerformance[];
}

export interface ScoreReportMessage {
  type: "score_report";
  session_id: string;
  score: ScoreReport;
}

export interface TrialStateMessage {
  type: "trial_state";
  phase: "idle" | "phonating" | "finalizing" | "done";
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type StreamMessage =
  | PitchFrameMessage
  | FeedbackEventMessage
  | ScoreReportMessage
  | TrialStateMessage
  | ErrorMessage;

export interface HelloMessage {
  type: "hello";
}

export interface StartTrialMessage {
  type: "start_trial";
  melody_id: string;
  mode: FeedbackMode;
}

export interface StopTrialMessage {
  type: "stop_trial";
}

export type ControlMessage = HelloMessage | StartTrialMessage | StopTrialMessage;

export interface MelodyNote {
  midi: number;
  onset_ms: number;
  duration_ms: number;
}

export interface Melody {
  id: string;
  description: string;
  notes: MelodyNote[];
}

function isNum(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function isRec(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

/**
 * Structurally validate one decoded stream message. Returns null for
 * anything malformed; callers drop those with a console diagnostic so a
 * bad message can never disturb the view.
 */
export function parseStreamMessage(raw: unknown): StreamMessage | null {
  if (!isRec(raw)) return null;
  switch (raw.type) {
    case "pitch_frame": {
      if (!isNum(raw.t_ms)) return null;
      if (!(raw.f0_hz === null || isNum(raw.f0_hz))) return null;
      if (!isNum(raw.confidence) || !isNum(raw.rms)) return null;
      return raw as unknown as PitchFrameMessage;
    }
    case "feedback_event": {
      if (!isNum(raw.t_ms)) return null;
      if (raw.kind !== "trigger" && raw.kind !== "feedback") return null;
      if (raw.mode !== "sync" && raw.mode !== "terminal") return null;
      if (raw.kind === "trigger" && !isNum(raw.code)) return null;
      if (raw.kind === "feedback") {
        const ch = raw.channel;
        if (ch !== "visual" && ch !== "auditory" && ch !== "haptic") return null;
        if (ch === "haptic") {
          const p = raw.payload;
          if (!isRec(p) || !isNum(p.actuator) || !isNum(p.intensity) || !isNum(p.duration_ms)) {
            return null;
          }
        }
      }
      return raw as unknown as FeedbackEventMessage;
    }
    case "score_report": {
      if (typeof raw.session_id !== "string" || !isRec(raw.score)) return null;
      const s = raw.score;
      if (!Number.isInteger(s.scored_note_count) || !Array.isArray(s.notes)) return null;
      return raw as unknown as ScoreReportMessage;
    }
    case "trial_state": {
      if (
        raw.phase !== "idle" &&
        raw.phase !== "phonating" &&
        raw.phase !== "finalizing" &&
        raw.phase !== "done"
      ) {
        return null;
      }
      return raw as unknown as TrialStateMessage;
    }
    case "error": {
      if (typeof raw.message !== "string") return null;
      return raw as unknown as ErrorMessage;
    }
    default:
      return null;
  }
}

/** Convert a frequency in Hz to a fractional MIDI note number. */
export function hzToMidi(hz: number): number {
  return 69 + 12 * Math.log2(hz / 440);
}
