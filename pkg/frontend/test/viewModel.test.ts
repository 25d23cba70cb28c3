import { describe, expect, it } from "vitest";
import { ViewModel } from "../src/viewModel.js";
import type { StateFrame } from "../src/wire.js";

function frame(tick: number, overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    type: "state", tick, t: tick * 0.05, wall: 0,
    quad: { x: tick * 0.01, y: 0, z: 0.5, vx: 0, vy: 0 },
    vehicle: { x: tick * 0.02, y: 0.1, vx: 0.4, vy: 0, heading: 1.57 },
    steer: { speed: 0.4, heading_rate: 0 },
    sector: { center: [0, 0], radius: 1, theta_lo: 0, theta_hi: 1 },
    estimate: { point: [0.5, 0.5], inradius: 0.2 },
    ball_radius: 1, error: 0.1 * (tick % 5), cost: 1, status: "optimal",
    fault: false, paused: false,
    ...overrides,
  };
}

describe("ViewModel", () => {
  it("counts frames and extends trails", () => {
    const vm = new ViewModel();
    for (let k = 0; k < 10; k++) vm.applyFrame(frame(k));
    expect(vm.framesReceived).toBe(10);
    expect(vm.quadTrail.length).toBe(10);
    expect(vm.vehicleTrail[9][0]).toBeCloseTo(0.18);
    expect(vm.latest?.tick).toBe(9);
  });

  it("caps trail and sparkline buffers", () => {
    const vm = new ViewModel();
    for (let k = 0; k < 1500; k++) vm.applyFrame(frame(k));
    expect(vm.quadTrail.length).toBeLessThanOrEqual(600);
    expect(vm.errorBuffer.length).toBeLessThanOrEqual(400);
    expect(vm.framesReceived).toBe(1500);
  });

  it("resuming mid-session just continues from the next frame", () => {
    const vm = new ViewModel();
    for (let k = 0; k < 5; k++) vm.applyFrame(frame(k));
    const fresh = new ViewModel(); // simulated page reload
    fresh.applyFrame(frame(5));
    expect(fresh.latest?.tick).toBe(5);
    expect(fresh.quadTrail.length).toBe(1);
  });

  it("toggles flip overlay flags", () => {
    const vm = new ViewModel();
    expect(vm.toggles.sector).toBe(true);
    vm.toggle("sector");
    expect(vm.toggles.sector).toBe(false);
    vm.toggle("sector");
    expect(vm.toggles.sector).toBe(true);
  });

  it("records acks and errors", () => {
    const vm = new ViewModel();
    vm.noteAck(12);
    vm.noteError("rate limit: dropped");
    expect(vm.lastAckTick).toBe(12);
    expect(vm.lastError).toContain("rate limit");
    vm.reset();
    expect(vm.lastAckTick).toBeNull();
    expect(vm.framesReceived).toBe(0);
  });
});
