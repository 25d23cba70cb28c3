// Replay harness: feed a recorded session (real frames captured from the
// bridge) through the view pipeline and drive a scripted steering pass
// through the input stack, checking both ends of the wire contract.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { InputMapper, Throttle } from "../src/input.js";
import { renderScene, type Surface } from "../src/render.js";
import { ViewModel } from "../src/viewModel.js";
import { parseServerMessage, steerMessage, validateClientMessage } from "../src/wire.js";

class CountingSurface implements Surface {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  font = "";
  globalAlpha = 1;
  frames = 0;
  clearRect(): void { this.frames += 1; }
  fillRect(): void {}
  beginPath(): void {}
  moveTo(): void {}
  lineTo(): void {}
  arc(): void {}
  closePath(): void {}
  stroke(): void {}
  fill(): void {}
  fillText(): void {}
}

describe("recorded session replay", () => {
  const lines = readFileSync(
    join(__dirname, "fixtures", "session_frames.jsonl"), "utf-8")
    .trimEnd().split("\n");

  it("every recorded frame validates and renders", () => {
    const vm = new ViewModel();
    const ctx = new CountingSurface();
    let states = 0;
    for (const line of lines) {
      const msg = parseServerMessage(line); // throws on any schema break
      if (msg.type === "state") {
        vm.applyFrame(msg);
        states += 1;
        renderScene(ctx, vm, 640, 480);
      }
    }
    expect(states).toBe(lines.length);
    expect(vm.framesReceived).toBe(lines.length);
    expect(ctx.frames).toBe(lines.length); // one scene per input frame
  });

  it("ticks advance monotonically through the recording", () => {
    let prev = -1;
    for (const line of lines) {
      const msg = parseServerMessage(line);
      if (msg.type === "state") {
        expect(msg.tick).toBeGreaterThan(prev);
        prev = msg.tick;
      }
    }
  });
});

describe("scripted steering pass", () => {
  it("produces schema-valid, throttled steer messages", () => {
    const input = new InputMapper({ maxSpeed: 1, maxRate: 1, rampSeconds: 0.3 });
    const throttle = new Throttle(20);
    const sent: unknown[] = [];
    // 30 simulated seconds of a driver mashing keys at 20 Hz
    for (let k = 0; k < 600; k++) {
      if (k % 40 === 0) input.keyDown("ArrowUp");
      if (k % 40 === 25) input.keyUp("ArrowUp");
      if (k % 90 === 10) input.keyDown("ArrowLeft");
      if (k % 90 === 50) input.keyUp("ArrowLeft");
      const steer = input.step(0.05);
      if (throttle.allow(k * 50)) {
        sent.push(steerMessage(steer.speed, steer.headingRate));
      }
    }
    expect(sent.length).toBeGreaterThan(0);
    expect(sent.length).toBeLessThanOrEqual(600);
    for (const msg of sent) {
      expect(validateClientMessage(msg)).toBe(true);
    }
    // throttle held the rolling rate at or under 20 per second
    expect(sent.length).toBeLessThanOrEqual(20 * 30);
  });
});
