import { describe, expect, it } from "vitest";

import { StateFrame } from "../src/protocol.js";
import { Canvas2D, currentBarRects, render } from "../src/render.js";
import { ViewModel } from "../src/viewmodel.js";

/** Recording stub for the 2-D context: logs every draw call. */
class StubCanvas implements Canvas2D {
  canvas = { width: 800, height: 600 };
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  calls: Array<{ op: string; args: unknown[] }> = [];

  private log(op: string, ...args: unknown[]) {
    this.calls.push({ op, args });
  }

  clearRect(...a: [number, number, number, number]) { this.log("clearRect", ...a); }
  beginPath() { this.log("beginPath"); }
  moveTo(...a: [number, number]) { this.log("moveTo", ...a); }
  lineTo(...a: [number, number]) { this.log("lineTo", ...a); }
  arc(...a: [number, number, number, number, number]) { this.log("arc", ...a); }
  stroke() { this.log("stroke"); }
  fill() { this.log("fill"); }
  fillRect(...a: [number, number, number, number]) { this.log("fillRect", ...a); }
  strokeRect(...a: [number, number, number, number]) { this.log("strokeRect", ...a); }
  fillText(...a: [string, number, number]) { this.log("fillText", ...a); }
  save() { this.log("save"); }
  restore() { this.log("restore"); }

  ops(op: string) {
    return this.calls.filter((c) => c.op === op);
  }
}

function frame(overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    v: 1,
    type: "frame",
    gaps: 0,
    seq: 1,
    time: 0.1,
    step: 10000,
    position: [0, 0],
    heading: [1, 0],
    velocity: [0, 0],
    omega: 0,
    piston_offset: -0.002,
    piston_velocity: 0,
    pressed: 0,
    currents: [2.0, -0.3, 1.2, -0.3],
    tip: [0.0095, 0],
    forces: {
      magnetic: [0, 0],
      impact: 0.4,
      friction: 0,
      drag: [0, 0],
      needle: [0, 0],
    },
    hammer: true,
    k_backward: 0.27,
    finished: false,
    thread: [
      [-0.02, 0],
      [-0.015, 0.001],
      [-0.01, 0],
    ],
    ...overrides,
  };
}

describe("render", () => {
  it("empty scene draws the dish outline plus the 4 coils only", () => {
    const vm = new ViewModel();
    const ctx = new StubCanvas();
    render(vm, ctx);
    // dish circle + one circle per coil, no needle/piston fills
    expect(ctx.ops("arc")).toHaveLength(1 + vm.scene.coils.length);
    expect(ctx.ops("fill")).toHaveLength(0);
    expect(ctx.ops("clearRect")).toHaveLength(1);
  });

  it("draws needle, piston, thread, and current bars once a frame arrives", () => {
    const vm = new ViewModel();
    vm.apply(frame());
    const ctx = new StubCanvas();
    render(vm, ctx);
    expect(ctx.ops("arc").length).toBeGreaterThan(5); // + piston marker
    expect(ctx.ops("fill")).toHaveLength(1); // piston dot
    // 4 coil-current bars + force-plot curve present
    expect(ctx.ops("fillRect").length).toBeGreaterThanOrEqual(4);
    expect(ctx.ops("lineTo").length).toBeGreaterThan(0);
  });

  it("current bars reflect the latest frame currents to scale", () => {
    const vm = new ViewModel();
    vm.apply(frame({ currents: [1.0, -0.5, 0.0, 2.0] }));
    const ctx = new StubCanvas();
    const bars = currentBarRects(vm, ctx);
    expect(bars).toHaveLength(4);
    expect(bars[0].current).toBe(1.0);
    expect(bars[3].h / bars[0].h).toBeCloseTo(2.0);
    expect(bars[1].h).toBeGreaterThan(0); // negative current points down
  });

  it("a direction change shows in the bars within 2 received frames", () => {
    const vm = new ViewModel();
    vm.apply(frame({ seq: 1, currents: [2.0, 0.1, 0.1, 0.1] }));
    // command issued here; the service re-solves currents by the next frame
    vm.apply(frame({ seq: 2, currents: [0.1, 2.0, 0.1, 0.1] }));
    const ctx = new StubCanvas();
    const bars = currentBarRects(vm, ctx);
    expect(bars[1].current).toBe(2.0);
  });

  it("marks penetration events on the force plot", () => {
    const vm = new ViewModel();
    vm.apply(frame({ seq: 1, tissue: { max_depth: 0, ruptures: 0, throughs: 0 } }));
    const before = (() => {
      const ctx = new StubCanvas();
      render(vm, ctx);
      return ctx.ops("fillRect").length;
    })();
    vm.apply(
      frame({ seq: 2, time: 0.2, tissue: { max_depth: 0.001, ruptures: 1, throughs: 1 } }),
    );
    const ctx = new StubCanvas();
    render(vm, ctx);
    expect(ctx.ops("fillRect").length).toBe(before + 1); // the event marker
  });
});
