/**
 * Canvas drawing for the overlay: target curve, sung trajectory, actuator
 * strip, and phase badge. Pitch axis is in MIDI with note-name gridlines,
 * matching the linear actuator scale.
 */

import { SungSample, TargetSegment, Phase } from "./liveView.js";

const NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

export function noteName(midi: number): string {
  const m = Math.round(midi);
  return `${NOTE_NAMES[((m % 12) + 12) % 12]}${Math.floor(m / 12) - 1}`;
}

export interface ViewBox {
  tMin: number;
  tMax: number;
  midiMin: number;
  midiMax: number;
}

export function viewBoxFor(target: TargetSegment[], padSemitones = 4): ViewBox {
  if (target.length === 0) {
    return { tMin: 0, tMax: 1000, midiMin: 48, midiMax: 72 };
  }
  const midis = target.map((s) => s.midi);
  return {
    tMin: 0,
    tMax: Math.max(...target.map((s) => s.end_ms)),
    midiMin: Math.min(...midis) - padSemitones,
    midiMax: Math.max(...midis) + padSemitones,
  };
}

export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  box: ViewBox,
  target: TargetSegment[],
  sung: SungSample[],
  phase: Phase
): void {
  const x = (t: number) => ((t - box.tMin) / (box.tMax - box.tMin)) * width;
  const y = (m: number) => height - ((m - box.midiMin) / (box.midiMax - box.midiMin)) * height;

  ctx.clearRect(0, 0, width, height);

  ctx.strokeStyle = "#2a2f3a";
  ctx.fillStyle = "#8891a0";
  ctx.font = "10px sans-serif";
  ctx.lineWidth = 1;
  for (let m = Math.ceil(box.midiMin); m <= Math.floor(box.midiMax); m++) {
    ctx.beginPath();
    ctx.moveTo(0, y(m));
    ctx.lineTo(width, y(m));
    ctx.stroke();
    ctx.fillText(noteName(m), 2, y(m) - 2);
  }

  ctx.strokeStyle = "#4f9dff";
  ctx.lineWidth = 3;
  for (const seg of target) {
    ctx.beginPath();
    ctx.moveTo(x(seg.start_ms), y(seg.midi));
    ctx.lineTo(x(seg.end_ms), y(seg.midi));
    ctx.stroke();
  }

  ctx.fillStyle = "#ffb347";
  for (const s of sung) {
    if (s.midi === null) continue;
    ctx.beginPath();
    ctx.arc(x(s.t_ms), y(s.midi), 2, 0, 2 * Math.PI);
    ctx.fill();
  }

  ctx.fillStyle = "#c8d0dc";
  ctx.font = "12px sans-serif";
  ctx.fillText(phase, width - 70, 14);
}

export function drawActuatorStrip(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  layoutSize: number,
  highlight: number | null
): void {
  ctx.clearRect(0, 0, width, height);
  const cell = width / layoutSize;
  for (let i = 0; i < layoutSize; i++) {
    ctx.fillStyle = i === highlight ? "#ff5c5c" : "#2a2f3a";
    ctx.fillRect(i * cell + 1, 1, cell - 2, height - 2);
  }
}
