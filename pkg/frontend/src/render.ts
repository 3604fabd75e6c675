/** Canvas 2-D scene renderer.  Draws to scale: the 85 mm dish is mapped to
 * the shorter viewport dimension.  Pure function of the view model — safe
 * to call at display rate regardless of network state. */

import { ViewModel } from "./viewmodel.js";

/** The subset of CanvasRenderingContext2D the renderer uses; tests pass a
 * recording stub. */
export interface Canvas2D {
  canvas: { width: number; height: number };
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
}

const PLOT_HEIGHT = 0.22; // fraction of the viewport reserved for the force plot

export interface Mapping {
  scale: number; // px per m
  cx: number;
  cy: number;
}

export function workspaceMapping(ctx: Canvas2D, dishRadius: number): Mapping {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height * (1 - PLOT_HEIGHT);
  const scale = (0.92 * Math.min(w, h)) / (2 * dishRadius);
  return { scale, cx: w / 2, cy: h / 2 };
}

function toPx(m: Mapping, p: readonly [number, number]): [number, number] {
  // +y up in the workspace, +y down on the canvas
  return [m.cx + p[0] * m.scale, m.cy - p[1] * m.scale];
}

export function render(view: ViewModel, ctx: Canvas2D): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  const m = workspaceMapping(ctx, view.scene.dishRadius);

  drawDish(view, ctx, m);
  drawCoils(view, ctx, m);
  drawTissue(view, ctx, m);
  if (view.frame) {
    drawThread(view, ctx, m);
    drawNeedle(view, ctx, m);
    drawCurrentBars(view, ctx);
  }
  drawForcePlot(view, ctx);
  drawStatus(view, ctx);
}

function drawDish(view: ViewModel, ctx: Canvas2D, m: Mapping): void {
  ctx.strokeStyle = "#889";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(m.cx, m.cy, view.scene.dishRadius * m.scale, 0, 2 * Math.PI);
  ctx.stroke();
}

function drawCoils(view: ViewModel, ctx: Canvas2D, m: Mapping): void {
  ctx.strokeStyle = "#b84";
  ctx.lineWidth = 2;
  for (const coil of view.scene.coils) {
    const [x, y] = toPx(m, coil.position);
    ctx.beginPath();
    ctx.arc(x, y, 0.008 * m.scale, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

function drawTissue(view: ViewModel, ctx: Canvas2D, m: Mapping): void {
  ctx.strokeStyle = "#d66";
  ctx.lineWidth = 4;
  for (const seg of view.scene.tissue) {
    const [x0, y0] = toPx(m, seg.p0);
    const [x1, y1] = toPx(m, seg.p1);
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.stroke();
  }
}

function drawThread(view: ViewModel, ctx: Canvas2D, m: Mapping): void {
  const thread = view.frame!.thread;
  if (thread.length < 2) return;
  ctx.strokeStyle = "#46c";
  ctx.lineWidth = 1;
  ctx.beginPath();
  const [x0, y0] = toPx(m, thread[0]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < thread.length; i++) {
    const [x, y] = toPx(m, thread[i]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

function drawNeedle(view: ViewModel, ctx: Canvas2D, m: Mapping): void {
  const f = view.frame!;
  const half = view.scene.tubeLength / 2;
  const [hx, hy] = f.heading;
  const tail: [number, number] = [f.position[0] - half * hx, f.position[1] - half * hy];
  const tip: [number, number] = [f.position[0] + half * hx, f.position[1] + half * hy];
  ctx.strokeStyle = view.stale ? "#999" : "#222";
  ctx.lineWidth = 5;
  ctx.beginPath();
  const [tx, ty] = toPx(m, tail);
  ctx.moveTo(tx, ty);
  const [px, py] = toPx(m, tip);
  ctx.lineTo(px, py);
  ctx.stroke();
  // piston position indicator inside the tube
  const piston: [number, number] = [
    f.position[0] + f.piston_offset * hx,
    f.position[1] + f.piston_offset * hy,
  ];
  ctx.fillStyle = f.pressed !== 0 ? "#d22" : "#2a2";
  ctx.beginPath();
  const [mx, my] = toPx(m, piston);
  ctx.arc(mx, my, 3, 0, 2 * Math.PI);
  ctx.fill();
}

const BAR_WIDTH = 14;

export function currentBarRects(
  view: ViewModel,
  ctx: Canvas2D,
): Array<{ x: number; y: number; w: number; h: number; current: number }> {
  const f = view.frame;
  if (!f) return [];
  const h0 = ctx.canvas.height * (1 - PLOT_HEIGHT) - 8;
  const unit = 30; // px per ampere
  return f.currents.map((current, i) => {
    const x = 8 + i * (BAR_WIDTH + 6);
    const h = current * unit;
    return { x, y: h0, w: BAR_WIDTH, h: -h, current };
  });
}

function drawCurrentBars(view: ViewModel, ctx: Canvas2D): void {
  ctx.fillStyle = "#48e";
  for (const bar of currentBarRects(view, ctx)) {
    ctx.fillRect(bar.x, bar.y, bar.w, bar.h);
  }
}

function drawForcePlot(view: ViewModel, ctx: Canvas2D): void {
  const { width, height } = ctx.canvas;
  const top = height * (1 - PLOT_HEIGHT);
  ctx.strokeStyle = "#889";
  ctx.lineWidth = 1;
  ctx.strokeRect(0, top, width, height - top);
  const win = view.history.window();
  if (win.length === 0) return;
  const t1 = win[win.length - 1].time;
  const t0 = t1 - view.history.windowSeconds;
  const peak = Math.max(view.history.peak(), 1e-3);
  const xOf = (t: number) => ((t - t0) / view.history.windowSeconds) * width;
  const yOf = (f: number) => top + (height - top) * (1 - f / (1.1 * peak));
  ctx.strokeStyle = "#2a2";
  ctx.beginPath();
  ctx.moveTo(xOf(win[0].time), yOf(win[0].impact));
  for (let i = 1; i < win.length; i++) {
    ctx.lineTo(xOf(win[i].time), yOf(win[i].impact));
  }
  ctx.stroke();
  // penetration / rupture event markers
  ctx.fillStyle = "#d22";
  for (const ev of view.history.events()) {
    ctx.fillRect(xOf(ev.time) - 1, top, 2, height - top);
  }
}

function drawStatus(view: ViewModel, ctx: Canvas2D): void {
  ctx.fillStyle = view.connected ? "#2a2" : "#d22";
  const label = view.connected
    ? view.stale
      ? `stale (${view.frameAge().toFixed(2)} s)`
      : "live"
    : "disconnected";
  ctx.fillText(label, 8, 16);
  if (view.lastError) {
    ctx.fillStyle = "#d22";
    ctx.fillText(view.lastError, 8, 32);
  }
}
