import { beforeEach, describe, expect, it } from "vitest";

import { InputMapper } from "../src/input.js";
import { resetMessageIds } from "../src/protocol.js";
import { FakeTransport } from "../src/transport.js";

let transport: FakeTransport;
let input: InputMapper;

beforeEach(() => {
  resetMessageIds();
  transport = new FakeTransport();
  input = new InputMapper(transport);
});

describe("stick mapping", () => {
  it("emits nothing inside the deadzone", () => {
    input.stick(0.1, 0.1);
    expect(transport.sent).toHaveLength(0);
  });

  it("full-right emits set_direction(1, 0)", () => {
    input.stick(1, 0);
    expect(transport.sent).toHaveLength(1);
    expect(transport.sent[0]).toMatchObject({
      kind: "set_direction",
      payload: { direction: [1, 0] },
    });
  });

  it("normalizes off-axis deflections to unit norm", () => {
    input.stick(0.5, 0.5);
    const dir = (transport.sent[0] as any).payload.direction as number[];
    expect(Math.hypot(dir[0], dir[1])).toBeCloseTo(1, 12);
  });

  it("suppresses repeats of the same direction", () => {
    input.stick(1, 0);
    input.stick(0.9, 0);
    expect(transport.sent).toHaveLength(1);
  });
});

describe("K_b adjustment", () => {
  it("moves in 0.05 steps", () => {
    input.adjustKb(1);
    expect(transport.sent[0]).toMatchObject({
      kind: "set_Kb",
      payload: { value: 0.32 },
    });
    expect(input.kBackward).toBeCloseTo(0.32);
  });

  it("clamps at 1 and stops emitting at the rail", () => {
    for (let i = 0; i < 40; i++) input.adjustKb(1);
    expect(input.kBackward).toBe(1);
    const values = transport.sent.map((m: any) => m.payload.value as number);
    expect(Math.max(...values)).toBe(1);
    expect(values.filter((v) => v === 1)).toHaveLength(1);
  });

  it("clamps at 0 going down", () => {
    for (let i = 0; i < 40; i++) input.adjustKb(-1);
    expect(input.kBackward).toBe(0);
  });
});

describe("hammer and pulses", () => {
  it("toggles hammer_on / hammer_off", () => {
    input.toggleHammer();
    input.toggleHammer();
    expect(transport.sent.map((m: any) => m.kind)).toEqual([
      "hammer_on",
      "hammer_off",
    ]);
  });

  it("emits pulse_torque with defaults", () => {
    input.torquePulse(-1);
    expect(transport.sent[0]).toMatchObject({
      kind: "pulse_torque",
      payload: { sign: -1, pull: 0.5, duration: 0.2 },
    });
  });
});

describe("disconnection", () => {
  it("drops commands and raises the banner", () => {
    transport.setStatus("closed");
    input.stick(1, 0);
    input.toggleHammer();
    expect(transport.sent).toHaveLength(0);
    expect(input.banner).toContain("disconnected");
    expect(input.hammerOn).toBe(false);
  });

  it("clears the banner after reconnecting", () => {
    transport.setStatus("closed");
    input.stick(1, 0);
    transport.setStatus("open");
    input.stick(0, 1);
    expect(input.banner).toBeNull();
    expect(transport.sent).toHaveLength(1);
  });
});
