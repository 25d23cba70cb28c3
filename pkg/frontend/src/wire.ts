// Wire protocol shared with the bridge: JSON text frames both ways.

export interface SteerMessage {
  type: "steer";
  speed: number;
  heading_rate: number;
}

export interface ControlMessage {
  type: "pause" | "resume" | "reset";
}

export type ClientMessage = SteerMessage | ControlMessage;

export interface SectorDump {
  center: [number, number];
  radius: number;
  theta_lo: number;
  theta_hi: number;
}

export interface EstimateDump {
  point: [number, number];
  inradius: number;
}

export interface StateFrame {
  type: "state";
  tick: number;
  t: number;
  wall: number;
  quad: { x: number; y: number; z: number; vx: number; vy: number };
  vehicle: { x: number; y: number; vx: number; vy: number; heading: number };
  steer: { speed: number; heading_rate: number };
  sector: SectorDump;
  estimate: EstimateDump;
  ball_radius: number;
  error: number;
  cost: number;
  status: string;
  fault: boolean;
  paused: boolean;
}

export interface AckFrame {
  type: "ack";
  applies_at_tick: number;
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export type ServerMessage = StateFrame | AckFrame | ErrorFrame;

const isFiniteNumber = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);

/** Client-side mirror of the server's input validation. */
export function validateClientMessage(msg: unknown): msg is ClientMessage {
  if (typeof msg !== "object" || msg === null) return false;
  const m = msg as Record<string, unknown>;
  if (m.type === "steer") {
    return isFiniteNumber(m.speed) && isFiniteNumber(m.heading_rate);
  }
  return m.type === "pause" || m.type === "resume" || m.type === "reset";
}

export function steerMessage(speed: number, headingRate: number): SteerMessage {
  return { type: "steer", speed, heading_rate: headingRate };
}

function isVec2(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every(isFiniteNumber);
}

/** Parse and structurally check one server frame; throws on junk. */
export function parseServerMessage(raw: string): ServerMessage {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch (exc) {
    throw new Error(`malformed server frame: ${exc}`);
  }
  if (typeof msg !== "object" || msg === null) {
    throw new Error("server frame is not an object");
  }
  const m = msg as Record<string, unknown>;
  if (m.type === "ack" && isFiniteNumber(m.applies_at_tick)) {
    return m as unknown as AckFrame;
  }
  if (m.type === "error" && typeof m.message === "string") {
    return m as unknown as ErrorFrame;
  }
  if (m.type === "state") {
    const quad = m.quad as Record<string, unknown> | undefined;
    const vehicle = m.vehicle as Record<string, unknown> | undefined;
    const sector = m.sector as Record<string, unknown> | undefined;
    const estimate = m.estimate as Record<string, unknown> | undefined;
    const ok =
      isFiniteNumber(m.tick) &&
      isFiniteNumber(m.t) &&
      isFiniteNumber(m.wall) &&
      quad !== undefined &&
      ["x", "y", "z", "vx", "vy"].every((k) => isFiniteNumber(quad[k])) &&
      vehicle !== undefined &&
      ["x", "y", "vx", "vy", "heading"].every((k) => isFiniteNumber(vehicle[k])) &&
      sector !== undefined &&
      isVec2(sector.center) &&
      isFiniteNumber(sector.radius) &&
      isFiniteNumber(sector.theta_lo) &&
      isFiniteNumber(sector.theta_hi) &&
      estimate !== undefined &&
      isVec2(estimate.point) &&
      isFiniteNumber(m.ball_radius) &&
      isFiniteNumber(m.error);
    if (!ok) throw new Error("state frame failed validation");
    return m as unknown as StateFrame;
  }
  throw new Error(`unknown server frame type ${String(m.type)}`);
}
