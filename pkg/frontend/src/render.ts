// Top-down scene rendering. The drawing surface is a structural subset of
// CanvasRenderingContext2D so tests can substitute a recording fake.

import type { ViewModel } from "./viewModel.js";

export interface Surface {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number,
      ccw?: boolean): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface SceneStats {
  drewSector: boolean;
  drewEstimate: boolean;
  drewBall: boolean;
  drewTrails: boolean;
  sparklinePoints: number;
}

interface Camera {
  scale: number; // pixels per meter
  cx: number;
  cy: number;
  w: number;
  h: number;
}

function toScreen(cam: Camera, x: number, y: number): [number, number] {
  // world y points up, screen y points down
  return [cam.w / 2 + (x - cam.cx) * cam.scale,
          cam.h / 2 - (y - cam.cy) * cam.scale];
}

export function renderScene(ctx: Surface, vm: ViewModel, w: number,
                            h: number): SceneStats {
  ctx.clearRect(0, 0, w, h);
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, w, h);

  const stats: SceneStats = {
    drewSector: false, drewEstimate: false, drewBall: false,
    drewTrails: false, sparklinePoints: 0,
  };
  const frame = vm.latest;
  if (!frame) {
    ctx.fillStyle = "#8899aa";
    ctx.font = "14px monospace";
    ctx.fillText("waiting for frames...", 16, 24);
    return stats;
  }

  const cam: Camera = {
    scale: Math.min(w, h) / 8, // 8 m across the short side
    cx: frame.vehicle.x,
    cy: frame.vehicle.y,
    w, h,
  };

  // arena grid, 1 m pitch
  ctx.strokeStyle = "#1d2430";
  ctx.lineWidth = 1;
  for (let gx = Math.ceil(cam.cx - 5); gx <= cam.cx + 5; gx += 1) {
    const [sx] = toScreen(cam, gx, 0);
    ctx.beginPath();
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, h);
    ctx.stroke();
  }
  for (let gy = Math.ceil(cam.cy - 5); gy <= cam.cy + 5; gy += 1) {
    const [, sy] = toScreen(cam, 0, gy);
    ctx.beginPath();
    ctx.moveTo(0, sy);
    ctx.lineTo(w, sy);
    ctx.stroke();
  }

  if (vm.toggles.trails && vm.vehicleTrail.length > 1) {
    drawTrail(ctx, cam, vm.vehicleTrail, "#d08a2e");
    drawTrail(ctx, cam, vm.quadTrail, "#4aa3ff");
    stats.drewTrails = true;
  }

  if (vm.toggles.ball) {
    const [bx, by] = toScreen(cam, frame.vehicle.x, frame.vehicle.y);
    ctx.strokeStyle = "#3a4a62";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(bx, by, frame.ball_radius * cam.scale, 0, 2 * Math.PI);
    ctx.stroke();
    stats.drewBall = true;
  }

  if (vm.toggles.sector && frame.sector.radius > 1e-6) {
    const s = frame.sector;
    const [cx, cy] = toScreen(cam, s.center[0], s.center[1]);
    const r = s.radius * cam.scale;
    ctx.fillStyle = "#2e8b5733";
    ctx.strokeStyle = "#2e8b57";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    const wide = s.theta_hi - s.theta_lo > Math.PI;
    if (!wide) ctx.moveTo(cx, cy);
    // screen y is flipped, so world-CCW arcs run clockwise on screen
    ctx.arc(cx, cy, r, -s.theta_lo, -s.theta_hi, true);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
    stats.drewSector = true;
  }

  if (vm.toggles.estimate) {
    const [ex, ey] = toScreen(cam, frame.estimate.point[0], frame.estimate.point[1]);
    ctx.strokeStyle = "#7cf29c";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(ex - 6, ey);
    ctx.lineTo(ex + 6, ey);
    ctx.moveTo(ex, ey - 6);
    ctx.lineTo(ex, ey + 6);
    ctx.stroke();
    stats.drewEstimate = true;
  }

  // vehicle: triangle pointing along its heading (bearing from +y axis)
  const [vx, vy] = toScreen(cam, frame.vehicle.x, frame.vehicle.y);
  const hd = frame.vehicle.heading;
  const dir: [number, number] = [Math.sin(hd), Math.cos(hd)];
  const side: [number, number] = [dir[1], -dir[0]];
  ctx.fillStyle = "#ffb347";
  ctx.beginPath();
  ctx.moveTo(vx + dir[0] * 10, vy - dir[1] * 10);
  ctx.lineTo(vx - dir[0] * 6 + side[0] * 5, vy + dir[1] * 6 - side[1] * 5);
  ctx.lineTo(vx - dir[0] * 6 - side[0] * 5, vy + dir[1] * 6 + side[1] * 5);
  ctx.closePath();
  ctx.fill();

  // quadcopter: disk sized by altitude, labeled with z
  const [qx, qy] = toScreen(cam, frame.quad.x, frame.quad.y);
  ctx.fillStyle = frame.fault ? "#ff5566" : "#4aa3ff";
  ctx.beginPath();
  ctx.arc(qx, qy, 5 + 8 * frame.quad.z, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = "#cfe3ff";
  ctx.font = "11px monospace";
  ctx.fillText(`z=${frame.quad.z.toFixed(2)}`, qx + 8, qy - 8);

  // error sparkline along the bottom edge
  if (vm.errorBuffer.length > 1) {
    const span = Math.max(0.5, ...vm.errorBuffer);
    ctx.strokeStyle = "#e3687a";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    vm.errorBuffer.forEach((e, i) => {
      const x = (i / (vm.errorBuffer.length - 1)) * w;
      const y = h - 8 - (e / span) * 60;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    stats.sparklinePoints = vm.errorBuffer.length;
  }

  ctx.fillStyle = "#aabbcc";
  ctx.font = "13px monospace";
  ctx.fillText(
    `t=${frame.t.toFixed(2)}s  err=${frame.error.toFixed(3)}m  ` +
    `cost=${frame.cost.toFixed(1)}  ${frame.status}` +
    (frame.paused ? "  [paused]" : ""),
    16, 24);
  if (vm.lastError) {
    ctx.fillStyle = "#ff5566";
    ctx.fillText(vm.lastError, 16, 44);
  }
  return stats;
}

function drawTrail(ctx: Surface, cam: Camera,
                   trail: Array<[number, number]>, color: string): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.globalAlpha = 0.6;
  ctx.beginPath();
  trail.forEach(([x, y], i) => {
    const [sx, sy] = toScreen(cam, x, y);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.stroke();
  ctx.globalAlpha = 1;
}
