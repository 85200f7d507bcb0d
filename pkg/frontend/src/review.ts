/**
 * Post-trial session review: fetch a stored session's log and score from
 * the server and turn them into a static trajectory plot plus a score
 * card. All metric values come verbatim from the score endpoint.
 */

import { Melody, ScoreReport, hzToMidi } from "./messages.js";
import { SungSample, TargetSegment, targetSegments } from "./liveView.js";

export interface SessionReview {
  kind: "session";
  sessionId: string;
  melody: Melody;
  target: TargetSegment[];
  /** Full stored trajectory: plotted points and gap markers, in log order. */
  trajectory: SungSample[];
  score: ScoreReport;
  /** Shown in the trajectory pane when the log has no voiced frames. */
  emptyTrajectoryMessage: string | null;
}

export interface EmptyState {
  kind: "empty";
  message: string;
}

export type ReviewResult = SessionReview | EmptyState;

type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  text(): Promise<string>;
  json(): Promise<unknown>;
}>;

/** Parse the stored log text into the embedded melody and its trajectory. */
export function parseSessionLog(text: string): { melody: Melody; trajectory: SungSample[] } {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error("empty session log");
  const header = JSON.parse(lines[0] as string) as { melody: Melody };
  const trajectory: SungSample[] = [];
  for (const line of lines.slice(1)) {
    const rec = JSON.parse(line) as { kind?: string; t_ms: number; f0_hz?: number | null };
    if (rec.kind === "pitch") {
      trajectory.push({
        t_ms: rec.t_ms,
        midi: rec.f0_hz == null ? null : hzToMidi(rec.f0_hz),
      });
    }
  }
  return { melody: header.melody, trajectory };
}

/**
 * Fetch and assemble the review for one session. An unknown id yields an
 * empty-state result rather than an exception.
 */
export async function reviewSession(
  sessionId: string,
  fetchLike: FetchLike,
  baseUrl = ""
): Promise<ReviewResult> {
  const logResp = await fetchLike(`${baseUrl}/sessions/${sessionId}/log`);
  if (!logResp.ok) {
    return { kind: "empty", message: `session ${sessionId} not found` };
  }
  const scoreResp = await fetchLike(`${baseUrl}/sessions/${sessionId}/score`);
  if (!scoreResp.ok) {
    return { kind: "empty", message: `session ${sessionId} not found` };
  }
  const { melody, trajectory } = parseSessionLog(await logResp.text());
  const score = (await scoreResp.json()) as ScoreReport;
  const voiced = trajectory.some((s) => s.midi !== null);
  return {
    kind: "session",
    sessionId,
    melody,
    target: targetSegments(melody),
    trajectory,
    score,
    emptyTrajectoryMessage: voiced ? null : "no voiced audio",
  };
}
