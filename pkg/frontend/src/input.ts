// Keyboard to steering: arrows/WASD drive (speed, heading-rate) with a
// linear ramp so releases decay to zero instead of snapping.

export interface SteerState {
  speed: number;
  headingRate: number;
}

export interface InputConfig {
  maxSpeed: number;
  maxRate: number;
  rampSeconds: number; // time to traverse the full range
}

const FORWARD = new Set(["ArrowUp", "KeyW"]);
const BACKWARD = new Set(["ArrowDown", "KeyS"]);
const LEFT = new Set(["ArrowLeft", "KeyA"]);
const RIGHT = new Set(["ArrowRight", "KeyD"]);

export class InputMapper {
  private pressed = new Set<string>();
  current: SteerState = { speed: 0, headingRate: 0 };

  constructor(
    readonly cfg: InputConfig = { maxSpeed: 1.0, maxRate: 1.0, rampSeconds: 0.3 },
  ) {}

  keyDown(code: string): void {
    this.pressed.add(code);
  }

  keyUp(code: string): void {
    this.pressed.delete(code);
  }

  private has(set: Set<string>): boolean {
    for (const code of set) if (this.pressed.has(code)) return true;
    return false;
  }

  /** Advance the ramp by dt seconds and return the current steering. */
  step(dt: number): SteerState {
    const speedTarget = this.has(FORWARD)
      ? this.cfg.maxSpeed
      : this.has(BACKWARD)
        ? 0.3 * this.cfg.maxSpeed
        : 0;
    // left turn is a positive heading rate
    const rateTarget = this.has(LEFT)
      ? this.cfg.maxRate
      : this.has(RIGHT)
        ? -this.cfg.maxRate
        : 0;

    const speedStep = (this.cfg.maxSpeed / this.cfg.rampSeconds) * dt;
    const rateStep = (2 * this.cfg.maxRate / this.cfg.rampSeconds) * dt;
    this.current = {
      speed: approach(this.current.speed, speedTarget, speedStep),
      headingRate: approach(this.current.headingRate, rateTarget, rateStep),
    };
    return this.current;
  }
}

function approach(value: number, target: number, step: number): number {
  if (Math.abs(target - value) <= step) return target;
  return value + Math.sign(target - value) * step;
}

/** Token-bucket limiter: at most `perSecond` sends per rolling second. */
export class Throttle {
  private stamps: number[] = [];

  constructor(readonly perSecond: number = 20) {}

  allow(nowMs: number): boolean {
    const cutoff = nowMs - 1000;
    while (this.stamps.length && this.stamps[0] <= cutoff) this.stamps.shift();
    if (this.stamps.length >= this.perSecond) return false;
    this.stamps.push(nowMs);
    return true;
  }
}
