import { describe, expect, it } from "vitest";
import { renderScene, type Surface } from "../src/render.js";
import { ViewModel } from "../src/viewModel.js";
import { parseServerMessage } from "../src/wire.js";
import { readFileSync } from "node:fs";
import { join } from "node:path";

class FakeSurface implements Surface {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 1;
  font = "";
  globalAlpha = 1;
  calls: string[] = [];
  texts: string[] = [];

  clearRect(): void { this.calls.push("clearRect"); }
  fillRect(): void { this.calls.push("fillRect"); }
  beginPath(): void { this.calls.push("beginPath"); }
  moveTo(): void { this.calls.push("moveTo"); }
  lineTo(): void { this.calls.push("lineTo"); }
  arc(): void { this.calls.push("arc"); }
  closePath(): void { this.calls.push("closePath"); }
  stroke(): void { this.calls.push("stroke"); }
  fill(): void { this.calls.push("fill"); }
  fillText(text: string): void { this.texts.push(text); }
}

function loadFixtureFrames(): ReturnType<typeof parseServerMessage>[] {
  const raw = readFileSync(
    join(__dirname, "fixtures", "session_frames.jsonl"), "utf-8");
  return raw.trimEnd().split("\n").map((line) => parseServerMessage(line));
}

describe("renderScene", () => {
  it("renders a waiting banner with no frames", () => {
    const ctx = new FakeSurface();
    const stats = renderScene(ctx, new ViewModel(), 800, 600);
    expect(stats.drewSector).toBe(false);
    expect(ctx.texts.join(" ")).toContain("waiting");
  });

  it("draws every enabled overlay for a live frame", () => {
    const vm = new ViewModel();
    const frames = loadFixtureFrames();
    for (const f of frames.slice(0, 30)) {
      if (f.type === "state") vm.applyFrame(f);
    }
    const ctx = new FakeSurface();
    const stats = renderScene(ctx, vm, 800, 600);
    expect(stats.drewSector).toBe(true);
    expect(stats.drewEstimate).toBe(true);
    expect(stats.drewBall).toBe(true);
    expect(stats.drewTrails).toBe(true);
    expect(stats.sparklinePoints).toBe(30);
    expect(ctx.texts.some((t) => t.includes("err="))).toBe(true);
  });

  it("omits the sector when the overlay is toggled off", () => {
    const vm = new ViewModel();
    const frames = loadFixtureFrames();
    const first = frames[0];
    if (first.type === "state") vm.applyFrame(first);
    vm.toggle("sector");
    const stats = renderScene(new FakeSurface(), vm, 800, 600);
    expect(stats.drewSector).toBe(false);
    expect(stats.drewEstimate).toBe(true);
  });
});
