import { describe, expect, it } from "vitest";
import { parseServerMessage, steerMessage, validateClientMessage } from "../src/wire.js";

describe("client message validation", () => {
  it("accepts well-formed steer messages", () => {
    expect(validateClientMessage(steerMessage(0.4, -0.2))).toBe(true);
  });

  it("accepts control messages", () => {
    for (const type of ["pause", "resume", "reset"]) {
      expect(validateClientMessage({ type })).toBe(true);
    }
  });

  it("rejects junk", () => {
    expect(validateClientMessage(null)).toBe(false);
    expect(validateClientMessage({ type: "warp" })).toBe(false);
    expect(validateClientMessage({ type: "steer", speed: "fast", heading_rate: 0 })).toBe(false);
    expect(validateClientMessage({ type: "steer", speed: Infinity, heading_rate: 0 })).toBe(false);
    expect(validateClientMessage({ type: "steer", speed: 0.1 })).toBe(false);
  });
});

describe("server frame parsing", () => {
  const frame = {
    type: "state", tick: 3, t: 0.15, wall: 0,
    quad: { x: 0, y: 0, z: 0.5, vx: 0, vy: 0 },
    vehicle: { x: 1, y: -1, vx: 0.1, vy: 0.2, heading: 0.3 },
    steer: { speed: 0.4, heading_rate: 0 },
    sector: { center: [1, -1], radius: 0.5, theta_lo: -0.2, theta_hi: 0.4 },
    estimate: { point: [1.2, -0.8], inradius: 0.1 },
    ball_radius: 1.0, error: 0.2, cost: 1.5, status: "optimal",
    fault: false, paused: false,
  };

  it("round-trips a state frame", () => {
    const parsed = parseServerMessage(JSON.stringify(frame));
    expect(parsed.type).toBe("state");
    if (parsed.type === "state") {
      expect(parsed.tick).toBe(3);
      expect(parsed.sector.radius).toBeCloseTo(0.5);
    }
  });

  it("parses ack and error frames", () => {
    expect(parseServerMessage('{"type":"ack","applies_at_tick":7}').type).toBe("ack");
    expect(parseServerMessage('{"type":"error","message":"nope"}').type).toBe("error");
  });

  it("throws on malformed frames", () => {
    expect(() => parseServerMessage("{oops")).toThrow();
    expect(() => parseServerMessage('{"type":"state"}')).toThrow();
    expect(() => parseServerMessage('{"type":"mystery"}')).toThrow();
    const broken = { ...frame, sector: { center: [1], radius: 0.5, theta_lo: 0, theta_hi: 0 } };
    expect(() => parseServerMessage(JSON.stringify(broken))).toThrow();
  });
});
