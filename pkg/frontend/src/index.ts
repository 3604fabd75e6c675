/** Browser entry point: open a session against the local service, wire the
 * transport, view model, input and renderer together. */

export * from "./protocol.js";
export * from "./transport.js";
export * from "./history.js";
export * from "./viewmodel.js";
export * from "./input.js";
export * from "./render.js";

import { InputMapper } from "./input.js";
import { control, subscribe } from "./protocol.js";
import { Canvas2D, render } from "./render.js";
import { WsTransport } from "./transport.js";
import { DEFAULT_SCENE, ViewModel } from "./viewmodel.js";

export interface AppOptions {
  base?: string;          // service origin, default same origin
  scenario?: string;
  seed?: number;
  rate?: number;          // subscription rate, Hz
}

export async function startApp(
  canvas: HTMLCanvasElement,
  opts: AppOptions = {},
): Promise<{ view: ViewModel; input: InputMapper }> {
  const base = opts.base ?? "";
  const res = await fetch(`${base}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({
      scenario: opts.scenario ?? "teleop",
      seed: opts.seed ?? 0,
      scripted: false,
    }),
  });
  const { id } = (await res.json()) as { id: string };
  const wsBase = (base || window.location.origin).replace(/^http/, "ws");
  const transport = new WsTransport(`${wsBase}/sessions/${id}/ws`);
  const view = new ViewModel(DEFAULT_SCENE, transport);
  const input = new InputMapper(transport);

  transport.onStatus((s) => {
    if (s === "open") {
      transport.send(subscribe(opts.rate ?? 60));
      transport.send(control("start"));
    }
  });

  const ctx = canvas.getContext("2d") as unknown as Canvas2D;
  const t0 = performance.now();
  const loop = () => {
    view.tick((performance.now() - t0) / 1000);
    render(view, ctx);
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);

  window.addEventListener("keydown", (ev) => {
    const dirs: Record<string, [number, number]> = {
      ArrowRight: [1, 0],
      ArrowLeft: [-1, 0],
      ArrowUp: [0, 1],
      ArrowDown: [0, -1],
    };
    if (ev.key in dirs) input.stick(...dirs[ev.key]);
    else if (ev.key === " ") input.toggleHammer();
    else if (ev.key === "[") input.adjustKb(-1);
    else if (ev.key === "]") input.adjustKb(1);
    else if (ev.key === "q") input.torquePulse(1);
    else if (ev.key === "e") input.torquePulse(-1);
  });

  return { view, input };
}
