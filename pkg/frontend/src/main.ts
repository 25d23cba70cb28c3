// Browser entry point: connect to the bridge, pump key input at 20 Hz,
// render on animation frames. All logic lives in the imported modules so
// this file stays thin and untested DOM glue.

import { InputMapper, Throttle } from "./input.js";
import { renderScene } from "./render.js";
import { ViewModel } from "./viewModel.js";
import { parseServerMessage, steerMessage, validateClientMessage } from "./wire.js";

const params = new URLSearchParams(window.location.search);
const server = params.get("server")
  ?? `ws://${window.location.host || "127.0.0.1:8765"}`;
const sessionId = params.get("session") ?? "default";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const vm = new ViewModel();
const input = new InputMapper();
const throttle = new Throttle(20);

const socket = new WebSocket(`${server}/session?session=${sessionId}`);

socket.addEventListener("message", (event) => {
  try {
    const msg = parseServerMessage(String(event.data));
    if (msg.type === "state") vm.applyFrame(msg);
    else if (msg.type === "ack") vm.noteAck(msg.applies_at_tick);
    else vm.noteError(msg.message);
  } catch (exc) {
    vm.noteError(String(exc));
  }
});

window.addEventListener("keydown", (e) => {
  if (e.code === "KeyP") socket.send(JSON.stringify({ type: "pause" }));
  else if (e.code === "KeyO") socket.send(JSON.stringify({ type: "resume" }));
  else if (e.code === "KeyR") socket.send(JSON.stringify({ type: "reset" }));
  else if (e.code === "Digit1") vm.toggle("sector");
  else if (e.code === "Digit2") vm.toggle("estimate");
  else if (e.code === "Digit3") vm.toggle("ball");
  else if (e.code === "Digit4") vm.toggle("trails");
  else input.keyDown(e.code);
});
window.addEventListener("keyup", (e) => input.keyUp(e.code));

const SEND_DT = 0.05;
setInterval(() => {
  const steer = input.step(SEND_DT);
  if (socket.readyState === WebSocket.OPEN && throttle.allow(Date.now())) {
    const msg = steerMessage(steer.speed, steer.headingRate);
    if (validateClientMessage(msg)) socket.send(JSON.stringify(msg));
  }
}, SEND_DT * 1000);

function resize(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
}
window.addEventListener("resize", resize);
resize();

function loop(): void {
  renderScene(ctx, vm, canvas.width, canvas.height);
  requestAnimationFrame(loop);
}
loop();
