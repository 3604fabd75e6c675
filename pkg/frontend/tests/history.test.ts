import { describe, expect, it } from "vitest";

import { ForceHistory } from "../src/history.js";

describe("ForceHistory", () => {
  it("keeps only the trailing window", () => {
    const h = new ForceHistory(10);
    for (let t = 0; t <= 25; t++) h.push({ time: t, impact: 0.1, magnetic: 0 });
    expect(h.window()[0].time).toBeGreaterThanOrEqual(15);
    expect(h.window()[h.length - 1].time).toBe(25);
  });

  it("reports the exact unsmoothed peak of the window", () => {
    const h = new ForceHistory(10);
    h.push({ time: 0, impact: 0.2, magnetic: 0 });
    h.push({ time: 1, impact: 1.163, magnetic: 0 });
    h.push({ time: 2, impact: 0.4, magnetic: 0 });
    expect(h.peak()).toBe(1.163);
  });

  it("drops peaks that age out of the window", () => {
    const h = new ForceHistory(10);
    h.push({ time: 0, impact: 5.0, magnetic: 0 });
    h.push({ time: 11, impact: 0.3, magnetic: 0 });
    expect(h.peak()).toBe(0.3);
  });

  it("collects event-tagged samples for plot markers", () => {
    const h = new ForceHistory(10);
    h.push({ time: 0, impact: 0.1, magnetic: 0 });
    h.push({ time: 1, impact: 1.0, magnetic: 0, event: "through" });
    expect(h.events()).toHaveLength(1);
    expect(h.events()[0].event).toBe("through");
  });
});
