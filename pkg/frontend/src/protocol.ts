/** Wire protocol v1 message schemas and command builders (see PROTOCOL.md). */

import { z } from "zod";

export const PROTOCOL_VERSION = 1;

const vec2 = z.tuple([z.number(), z.number()]);

export const forcesSchema = z.object({
  magnetic: vec2,
  impact: z.number(),
  friction: z.number(),
  drag: vec2,
  needle: vec2,
});

export const tissueSchema = z.object({
  max_depth: z.number(),
  ruptures: z.number().int(),
  throughs: z.number().int(),
});

export const frameSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("frame"),
  gaps: z.number().int(),
  seq: z.number().int(),
  time: z.number(),
  step: z.number().int(),
  position: vec2,
  heading: vec2,
  velocity: vec2,
  omega: z.number(),
  piston_offset: z.number(),
  piston_velocity: z.number(),
  pressed: z.union([z.literal(-1), z.literal(0), z.literal(1)]),
  currents: z.array(z.number()),
  tip: vec2,
  forces: forcesSchema,
  hammer: z.boolean(),
  k_backward: z.number(),
  finished: z.boolean(),
  tissue: tissueSchema.optional(),
  thread: z.array(vec2),
});

export const ackSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("ack"),
  id: z.number().int().optional(),
  applied_at: z.number(),
  step: z.number().int(),
});

export const errorSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("error"),
  id: z.number().int().optional(),
  message: z.string(),
});

export const closedSchema = z.object({
  v: z.literal(PROTOCOL_VERSION),
  type: z.literal("closed"),
  reason: z.string(),
});

export const serverMessageSchema = z.discriminatedUnion("type", [
  frameSchema,
  ackSchema,
  errorSchema,
  closedSchema,
]);

export type StateFrame = z.infer<typeof frameSchema>;
export type ServerMessage = z.infer<typeof serverMessageSchema>;

/** Parse one incoming text frame; returns null for unusable payloads. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const res = serverMessageSchema.safeParse(raw);
  return res.success ? res.data : null;
}

export type CommandKind =
  | "set_direction"
  | "set_pull"
  | "set_Kb"
  | "set_Kf"
  | "hammer_on"
  | "hammer_off"
  | "pulse_torque"
  | "reset";

export interface CommandMessage {
  v: typeof PROTOCOL_VERSION;
  type: "command";
  id: number;
  kind: CommandKind;
  payload: Record<string, unknown>;
}

export interface ControlMessage {
  v: typeof PROTOCOL_VERSION;
  type: "control";
  id: number;
  action: "start" | "pause" | "step";
  steps?: number;
}

export interface SubscribeMessage {
  v: typeof PROTOCOL_VERSION;
  type: "subscribe";
  rate: number;
}

export type ClientMessage = CommandMessage | ControlMessage | SubscribeMessage;

let nextId = 1;

/** Reset the message-id counter (tests only). */
export function resetMessageIds(): void {
  nextId = 1;
}

export function command(
  kind: CommandKind,
  payload: Record<string, unknown> = {},
): CommandMessage {
  return { v: PROTOCOL_VERSION, type: "command", id: nextId++, kind, payload };
}

export function control(
  action: "start" | "pause" | "step",
  steps?: number,
): ControlMessage {
  const msg: ControlMessage = {
    v: PROTOCOL_VERSION,
    type: "control",
    id: nextId++,
    action,
  };
  if (steps !== undefined) msg.steps = steps;
  return msg;
}

export function subscribe(rate: number): SubscribeMessage {
  if (rate < 1 || rate > 120) throw new Error("rate must be in [1, 120]");
  return { v: PROTOCOL_VERSION, type: "subscribe", rate };
}
