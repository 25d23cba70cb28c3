// Render state derived purely from received frames; no client-side physics.

import type { StateFrame } from "./wire.js";

export interface OverlayToggles {
  sector: boolean;
  estimate: boolean;
  ball: boolean;
  trails: boolean;
  reference: boolean;
}

const TRAIL_CAP = 600; // 30 s of 20 Hz frames
const SPARK_CAP = 400;

export class ViewModel {
  latest: StateFrame | null = null;
  framesReceived = 0;
  quadTrail: Array<[number, number]> = [];
  vehicleTrail: Array<[number, number]> = [];
  errorBuffer: number[] = [];
  lastError: string | null = null;
  lastAckTick: number | null = null;
  toggles: OverlayToggles = {
    sector: true,
    estimate: true,
    ball: true,
    trails: true,
    reference: false,
  };

  applyFrame(frame: StateFrame): void {
    this.latest = frame;
    this.framesReceived += 1;
    this.quadTrail.push([frame.quad.x, frame.quad.y]);
    this.vehicleTrail.push([frame.vehicle.x, frame.vehicle.y]);
    if (this.quadTrail.length > TRAIL_CAP) this.quadTrail.shift();
    if (this.vehicleTrail.length > TRAIL_CAP) this.vehicleTrail.shift();
    this.errorBuffer.push(frame.error);
    if (this.errorBuffer.length > SPARK_CAP) this.errorBuffer.shift();
  }

  noteAck(tick: number): void {
    this.lastAckTick = tick;
  }

  noteError(message: string): void {
    this.lastError = message;
  }

  toggle(name: keyof OverlayToggles): void {
    this.toggles[name] = !this.toggles[name];
  }

  reset(): void {
    this.latest = null;
    this.framesReceived = 0;
    this.quadTrail = [];
    this.vehicleTrail = [];
    this.errorBuffer = [];
    this.lastError = null;
    this.lastAckTick = null;
  }
}
