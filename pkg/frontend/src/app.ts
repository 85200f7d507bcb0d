/**
 * Browser entry point: wires the DOM controls, the `/live` websocket, and
 * the canvas renderer together. All trial logic lives in the tested
 * modules (LiveView, TrialController, reviewSession); this file only
 * shuttles events between them and the page.
 */

import { TrialController } from "./controls.js";
import { LiveView } from "./liveView.js";
import { FeedbackMode, Melody, ScoreReport } from "./messages.js";
import { reviewSession } from "./review.js";
import { drawActuatorStrip, drawOverlay, viewBoxFor } from "./render.js";

const LAYOUT_SIZE = 18;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function formatMetric(v: number | null, digits: number, unit: string): string {
  return v === null ? "—" : `${v.toFixed(digits)}${unit}`;
}

function renderScoreCard(container: HTMLElement, score: ScoreReport): void {
  const rows = score.notes
    .map(
      (n) =>
        `<tr><td>${n.note_index}</td><td>${n.target_midi.toFixed(2)}</td>` +
        `<td>${n.sung_midi === null ? "—" : n.sung_midi.toFixed(2)}</td>` +
        `<td>${n.voiced_fraction.toFixed(2)}</td>` +
        `<td>${n.onset_error_ms === null ? "—" : n.onset_error_ms.toFixed(1)}</td></tr>`
    )
    .join("");
  container.innerHTML = `
    <dl>
      <dt>Pitch deviation</dt><dd>${formatMetric(score.pitch_deviation_cents, 1, " cents")}</dd>
      <dt>Transposed deviation</dt><dd>${formatMetric(score.pitch_deviation_transposed_cents, 1, " cents")}</dd>
      <dt>Contour accuracy</dt><dd>${score.contour_accuracy.toFixed(3)}</dd>
      <dt>Rhythm error</dt><dd>${formatMetric(score.rhythm_error_ms, 1, " ms")}</dd>
    </dl>
    <table>
      <thead><tr><th>#</th><th>target</th><th>sung</th><th>voiced</th><th>onset err</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

async function main(): Promise<void> {
  const melodySelect = el<HTMLSelectElement>("melody");
  const modeSelect = el<HTMLSelectElement>("mode");
  const startBtn = el<HTMLButtonElement>("start");
  const stopBtn = el<HTMLButtonElement>("stop");
  const statusLine = el<HTMLElement>("status");
  const scoreCard = el<HTMLElement>("score-card");
  const overlay = el<HTMLCanvasElement>("overlay");
  const strip = el<HTMLCanvasElement>("actuators");
  const sessionInput = el<HTMLInputElement>("session-id");
  const reviewBtn = el<HTMLButtonElement>("review");

  const overlayCtx = overlay.getContext("2d");
  const stripCtx = strip.getContext("2d");
  if (!overlayCtx || !stripCtx) throw new Error("canvas 2d context unavailable");

  const melodies = (await (await fetch("/melodies")).json()) as Melody[];
  for (const m of melodies) {
    const opt = document.createElement("option");
    opt.value = m.id;
    opt.textContent = `${m.id} — ${m.description}`;
    melodySelect.appendChild(opt);
  }

  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const ws = new WebSocket(`${proto}//${location.host}/live`);
  const controller = new TrialController((msg) => ws.send(JSON.stringify(msg)));
  let view: LiveView | null = null;

  const syncControls = () => {
    startBtn.disabled = !controller.canStart();
    stopBtn.disabled = !controller.canStop();
    melodySelect.disabled = !controller.canSelect();
    modeSelect.disabled = !controller.canSelect();
    statusLine.textContent = controller.lastServerError
      ? `error: ${controller.lastServerError}`
      : view
        ? view.phase
        : "idle";
  };

  const redraw = () => {
    if (!view) return;
    drawOverlay(
      overlayCtx,
      overlay.width,
      overlay.height,
      viewBoxFor(view.target),
      view.target,
      view.sung,
      view.phase
    );
    drawActuatorStrip(stripCtx, strip.width, strip.height, LAYOUT_SIZE, view.actuatorHighlight);
  };

  ws.addEventListener("message", (ev) => {
    let raw: unknown;
    try {
      raw = JSON.parse(ev.data as string);
    } catch {
      console.warn("dropping undecodable frame", ev.data);
      return;
    }
    const msg = view ? view.apply(raw) : null;
    if (msg) controller.onMessage(msg);
    if (msg?.type === "score_report") renderScoreCard(scoreCard, msg.score);
    syncControls();
    redraw();
  });

  melodySelect.addEventListener("change", () => {
    controller.selectMelody(melodySelect.value);
    syncControls();
  });
  modeSelect.addEventListener("change", () => {
    controller.selectMode(modeSelect.value as FeedbackMode);
    syncControls();
  });
  startBtn.addEventListener("click", () => {
    const melody = melodies.find((m) => m.id === controller.melodyId);
    if (!melody) return;
    if (controller.start()) {
      view = new LiveView(melody, controller.mode, LAYOUT_SIZE);
      scoreCard.innerHTML = "";
    }
    syncControls();
    redraw();
  });
  stopBtn.addEventListener("click", () => {
    controller.stop();
    syncControls();
  });
  reviewBtn.addEventListener("click", async () => {
    const result = await reviewSession(sessionInput.value.trim(), fetch.bind(window));
    if (result.kind === "empty") {
      scoreCard.textContent = result.message;
      return;
    }
    renderScoreCard(scoreCard, result.score);
    drawOverlay(
      overlayCtx,
      overlay.width,
      overlay.height,
      viewBoxFor(result.target),
      result.target,
      result.trajectory,
      "done"
    );
    if (result.emptyTrajectoryMessage) {
      statusLine.textContent = result.emptyTrajectoryMessage;
    }
  });

  syncControls();
}

main().catch((err) => {
  console.error(err);
  const status = document.getElementById("status");
  if (status) status.textContent = String(err);
});
