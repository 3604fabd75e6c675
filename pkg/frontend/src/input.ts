/** Input mapping: stick/keyboard state in, protocol commands out.
 *
 * The mapper owns no physics; it normalizes, debounces and clamps, then
 * hands commands to the transport.  When the transport is not open,
 * commands are dropped and `banner` reports the disconnection. */

import { ClientMessage, command } from "./protocol.js";
import { Transport } from "./transport.js";

export const DEADZONE = 0.15;
export const KB_STEP = 0.05;

export class InputMapper {
  /** visible warning when commands are being dropped, else null */
  banner: string | null = null;
  private kb = 0.27;
  private hammer = false;
  private lastDirection: [number, number] | null = null;

  constructor(private readonly transport: Transport) {}

  get kBackward(): number {
    return this.kb;
  }

  get hammerOn(): boolean {
    return this.hammer;
  }

  private emit(msg: ClientMessage): boolean {
    if (this.transport.status !== "open") {
      this.banner = "disconnected - commands dropped";
      return false;
    }
    this.banner = null;
    this.transport.send(msg);
    return true;
  }

  /** Stick position in [-1, 1]^2; inside the deadzone nothing is emitted. */
  stick(x: number, y: number): void {
    const mag = Math.hypot(x, y);
    if (mag < DEADZONE) return;
    const dir: [number, number] = [x / mag, y / mag];
    if (
      this.lastDirection &&
      Math.hypot(dir[0] - this.lastDirection[0], dir[1] - this.lastDirection[1]) < 1e-3
    ) {
      return;
    }
    if (this.emit(command("set_direction", { direction: dir }))) {
      this.lastDirection = dir;
    }
  }

  /** K_b up/down in 0.05 steps, clamped to [0, 1]. */
  adjustKb(steps: number): void {
    const next = Math.min(1, Math.max(0, this.kb + steps * KB_STEP));
    if (next === this.kb) return;
    if (this.emit(command("set_Kb", { value: next }))) this.kb = next;
  }

  toggleHammer(): void {
    const next = !this.hammer;
    if (this.emit(command(next ? "hammer_on" : "hammer_off"))) {
      this.hammer = next;
    }
  }

  torquePulse(sign: 1 | -1): void {
    this.emit(command("pulse_torque", { sign, pull: 0.5, duration: 0.2 }));
  }

  setPull(pull: number): void {
    const clamped = Math.min(1, Math.max(-1, pull));
    this.emit(command("set_pull", { pull: clamped }));
  }
}
