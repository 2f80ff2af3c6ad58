// Browser entry point: wires the websocket, pointer capture, scroll
// calibration, qualification UI, and the canvas renderer together.
//
// URL query parameters: ?server=ws://host:port (default ws://localhost:8765)

import { TeleopClient } from "./client.js";
import { FLUSH_INTERVAL_MS, InputCapture } from "./input.js";
import type { ClientMessage } from "./protocol.js";
import { buildDrawModel, drawToCanvas, linkPositions } from "./render.js";
import { projectPoint } from "./projection.js";
import { ScrollCalibration } from "./scroll.js";

const params = new URLSearchParams(location.search);
const serverUrl = params.get("server") ?? "ws://localhost:8765";
// condition selection: ?frame=hybrid2&scenario=pick_place
const condition = {
  frame: params.get("frame") ?? undefined,
  scenario: params.get("scenario") ?? undefined,
};

const canvas = document.getElementById("view") as HTMLCanvasElement;
const mirrorCanvas = document.getElementById(
  "view-mirror",
) as HTMLCanvasElement;
const referenceCanvas = document.getElementById(
  "reference",
) as HTMLCanvasElement;
const statusEl = document.getElementById("status") as HTMLElement;
const overlayEl = document.getElementById("overlay") as HTMLElement;
const confirmYes = document.getElementById("confirm-yes") as HTMLButtonElement;
const confirmNo = document.getElementById("confirm-no") as HTMLButtonElement;
const calibrateBox = document.getElementById("calibrate") as HTMLElement;

const ws = new WebSocket(serverUrl);
const send = (msg: ClientMessage) => {
  if (ws.readyState === WebSocket.OPEN) ws.send(JSON.stringify(msg));
};

const scroll = new ScrollCalibration();
const input = new InputCapture(send, scroll);
let scrollCalibrated = false;

const client = new TeleopClient(send, {
  onPhase: (phase) => {
    statusEl.textContent = `phase: ${phase}`;
    overlayEl.style.display = phase === "confirm_render" ? "block" : "none";
    calibrateBox.style.display =
      phase === "ready" && !scrollCalibrated ? "block" : "none";
    if (phase === "ready" && scrollCalibrated) {
      statusEl.textContent = "phase: ready — click the view to start";
    }
  },
  onQualifyResult: (result) => {
    statusEl.textContent = result.pass
      ? `qualification passed (max RTT ${result.max_rtt_ms} ms)`
      : `qualification FAILED (max RTT ${result.max_rtt_ms} ms)`;
  },
  onError: (message) => {
    statusEl.textContent = `error: ${message}`;
  },
  onTrialEnd: (metrics, reason) => {
    statusEl.textContent = `trial over (${reason}): ${JSON.stringify(metrics)}`;
    input.releaseCapture();
    document.exitPointerLock();
  },
}, condition);

ws.onopen = () => client.opened();
ws.onclose = () => client.closed();
ws.onmessage = (ev) => {
  try {
    client.handleMessage(JSON.parse(ev.data));
  } catch (err) {
    console.warn("bad frame skipped", err);
  }
};

confirmYes.onclick = () => client.confirmRender(true);
confirmNo.onclick = () => client.confirmRender(false);

// scroll calibration: the user scrolls away over the calibration box
calibrateBox.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const sign = scroll.feed(ev.deltaY);
  if (sign !== null) {
    scrollCalibrated = true;
    calibrateBox.style.display = "none";
    statusEl.textContent = "scroll calibrated — click the view to start";
  }
});

// clicking the starting area locks the pointer and starts the trial
canvas.addEventListener("click", () => {
  if (client.phase === "ready" && scrollCalibrated) {
    canvas.requestPointerLock();
  }
});

document.addEventListener("pointerlockchange", () => {
  if (document.pointerLockElement === canvas) {
    input.startCapture();
    client.startTrial();
  } else if (input.isCapturing) {
    // capture lost without ESC: pause sending, show the overlay hint
    input.releaseCapture();
    statusEl.textContent = "pointer capture lost — click to re-engage";
  }
});

document.addEventListener("pointermove", (ev) => {
  input.pointerMove(ev.movementX, ev.movementY);
});
document.addEventListener(
  "wheel",
  (ev) => {
    if (input.isCapturing) {
      ev.preventDefault();
      input.wheelEvent(ev.deltaY);
    }
  },
  { passive: false },
);
document.addEventListener("keydown", (ev) => {
  if (ev.code === "Space") ev.preventDefault();
  input.keyDown(ev.code);
});
document.addEventListener("keyup", (ev) => input.keyUp(ev.code));

setInterval(() => input.flush(performance.now()), FLUSH_INTERVAL_MS);

// render loop: draw the latest state; also paint the static reference
// render used by the qualification comparison
function renderLoop(): void {
  const sceneMsg = client.scene;
  if (sceneMsg) {
    const state =
      client.lastState ??
      ({
        type: "state",
        t_ms: 0,
        joints: sceneMsg.home_state.joints,
        eef: { position: [0, 0, 0], rotation: [] },
        fingertip: [0, 0, 0],
        objects: { kind: sceneMsg.scene.scenario },
        events: [],
      } as never);
    const model = buildDrawModel(sceneMsg.scene, sceneMsg.arm, state);
    const ctx = canvas.getContext("2d");
    if (ctx) drawToCanvas(ctx, model, canvas.width, canvas.height);
    if (client.phase === "confirm_render") {
      // scaled copy of the live view for the side-by-side comparison
      const mirror = mirrorCanvas.getContext("2d");
      if (mirror) {
        mirror.drawImage(canvas, 0, 0, mirrorCanvas.width, mirrorCanvas.height);
      }
    }
    if (referenceCanvas.dataset.drawn !== "1") {
      drawReference(sceneMsg);
      referenceCanvas.dataset.drawn = "1";
    }
  }
  requestAnimationFrame(renderLoop);
}

function drawReference(sceneMsg: NonNullable<typeof client.scene>): void {
  // the "correctly rendered robot" still image: home pose silhouette
  const ctx = referenceCanvas.getContext("2d");
  if (!ctx) return;
  ctx.fillStyle = "#181c20";
  ctx.fillRect(0, 0, referenceCanvas.width, referenceCanvas.height);
  ctx.strokeStyle = "#eee";
  ctx.lineWidth = 4;
  const pts = linkPositions(sceneMsg.arm, sceneMsg.home_state.joints)
    .map((p) =>
      projectPoint(sceneMsg.scene.camera.pose, sceneMsg.scene.camera.intrinsics, p),
    )
    .filter((p): p is [number, number] => p !== null);
  ctx.beginPath();
  pts.forEach(([u, v], i) => (i ? ctx.lineTo(u, v) : ctx.moveTo(u, v)));
  ctx.stroke();
}

requestAnimationFrame(renderLoop);
