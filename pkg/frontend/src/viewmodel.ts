/** Client-side session state: latest frame, scene geometry, force history,
 * and connection status.  Holds no physics — it is a pure view of what the
 * service streams. */

import { ForceHistory } from "./history.js";
import { ServerMessage, StateFrame } from "./protocol.js";
import { ConnectionStatus, Transport } from "./transport.js";

export interface SceneGeometry {
  dishRadius: number;                       // m
  coils: Array<{ position: [number, number]; axis: [number, number] }>;
  tissue: Array<{ p0: [number, number]; p1: [number, number] }>;
  tubeLength: number;                       // m
}

export const DEFAULT_SCENE: SceneGeometry = {
  dishRadius: 0.0425,
  coils: [
    { position: [0.085, 0.0], axis: [-1.0, 0.0] },
    { position: [0.0, 0.085], axis: [0.0, -1.0] },
    { position: [-0.085, 0.0], axis: [1.0, 0.0] },
    { position: [0.0, -0.085], axis: [0.0, 1.0] },
  ],
  tissue: [],
  tubeLength: 0.01905,
};

export class ViewModel {
  frame: StateFrame | null = null;
  status: ConnectionStatus;
  lastError: string | null = null;
  sessionClosed: string | null = null;
  readonly history = new ForceHistory(10);
  /** monotonic receive clock, seconds; set by tick() or frame receipt */
  private receivedAt = 0;
  private clock = 0;
  private prevThroughs = 0;
  private prevRuptures = 0;

  constructor(
    readonly scene: SceneGeometry = DEFAULT_SCENE,
    transport?: Transport,
  ) {
    this.status = transport ? transport.status : "closed";
    transport?.onMessage((m) => this.apply(m));
    transport?.onStatus((s) => {
      this.status = s;
    });
  }

  /** Advance the local receive clock (drives frame-age display). */
  tick(now: number): void {
    this.clock = now;
  }

  /** Age of the newest frame in seconds of local clock. */
  frameAge(): number {
    return this.frame ? this.clock - this.receivedAt : Infinity;
  }

  get stale(): boolean {
    return this.frameAge() > 0.25;
  }

  get connected(): boolean {
    return this.status === "open";
  }

  apply(msg: ServerMessage): void {
    switch (msg.type) {
      case "frame":
        this.applyFrame(msg);
        break;
      case "error":
        this.lastError = msg.message;
        break;
      case "closed":
        this.sessionClosed = msg.reason;
        break;
      case "ack":
        break;
    }
  }

  private applyFrame(f: StateFrame): void {
    // most-recent-wins: never regress to an older frame
    if (this.frame && f.seq <= this.frame.seq) return;
    this.frame = f;
    this.receivedAt = this.clock;
    let event: "rupture" | "through" | undefined;
    if (f.tissue) {
      if (f.tissue.throughs > this.prevThroughs) event = "through";
      else if (f.tissue.ruptures > this.prevRuptures) event = "rupture";
      this.prevThroughs = f.tissue.throughs;
      this.prevRuptures = f.tissue.ruptures;
    }
    this.history.push({
      time: f.time,
      impact: f.forces.impact,
      magnetic: Math.hypot(f.forces.magnetic[0], f.forces.magnetic[1]),
      event,
    });
  }
}
