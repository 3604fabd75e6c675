import { beforeEach, describe, expect, it } from "vitest";

import {
  command,
  control,
  parseServerMessage,
  resetMessageIds,
  subscribe,
} from "../src/protocol.js";

const FRAME = {
  v: 1,
  type: "frame",
  gaps: 0,
  seq: 12,
  time: 0.2,
  step: 20000,
  position: [-0.0165, 0.0],
  heading: [1.0, 0.0],
  velocity: [0.0012, 0.0],
  omega: 0.0,
  piston_offset: -0.002175,
  piston_velocity: 0.0,
  pressed: -1,
  currents: [2.0, -0.31, 1.2, -0.31],
  tip: [-0.004, 0.0],
  forces: {
    magnetic: [0.0043, 0.0],
    impact: 0.0,
    friction: 0.0,
    drag: [-0.0043, 0.0],
    needle: [0.0, 0.0],
  },
  hammer: false,
  k_backward: 0.27,
  finished: false,
  tissue: { max_depth: 0.0, ruptures: 0, throughs: 0 },
  thread: [],
};

beforeEach(resetMessageIds);

describe("parseServerMessage", () => {
  it("accepts the documented frame example", () => {
    const msg = parseServerMessage(JSON.stringify(FRAME));
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("frame");
    if (msg!.type === "frame") {
      expect(msg!.seq).toBe(12);
      expect(msg!.tissue?.throughs).toBe(0);
    }
  });

  it("accepts frames without a tissue block", () => {
    const { tissue, ...rest } = FRAME;
    expect(parseServerMessage(JSON.stringify(rest))?.type).toBe("frame");
  });

  it("parses ack, error, and closed", () => {
    expect(
      parseServerMessage('{"v":1,"type":"ack","id":7,"applied_at":0.41,"step":41000}')
        ?.type,
    ).toBe("ack");
    expect(
      parseServerMessage('{"v":1,"type":"error","id":7,"message":"bad"}')?.type,
    ).toBe("error");
    expect(
      parseServerMessage('{"v":1,"type":"closed","reason":"session gone"}')?.type,
    ).toBe("closed");
  });

  it("rejects unknown versions, garbage, and unknown types", () => {
    expect(parseServerMessage(JSON.stringify({ ...FRAME, v: 2 }))).toBeNull();
    expect(parseServerMessage("not json")).toBeNull();
    expect(parseServerMessage('{"v":1,"type":"telemetry"}')).toBeNull();
  });
});

describe("client message builders", () => {
  it("stamps version, type, and increasing ids", () => {
    const a = command("hammer_on");
    const b = command("set_pull", { pull: 0.5 });
    expect(a.v).toBe(1);
    expect(a.type).toBe("command");
    expect(b.id).toBeGreaterThan(a.id);
    expect(b.payload).toEqual({ pull: 0.5 });
  });

  it("builds control and subscribe messages", () => {
    expect(control("step", 1000)).toMatchObject({ action: "step", steps: 1000 });
    expect(subscribe(30)).toEqual({ v: 1, type: "subscribe", rate: 30 });
    expect(() => subscribe(0)).toThrow();
    expect(() => subscribe(121)).toThrow();
  });
});
