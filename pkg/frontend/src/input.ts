// Pointer-capture input loop.
//
// Raw pointer deltas accumulate between flushes and go out as input
// messages at up to 60 Hz. Holding Space sets the clutch (the browser
// cannot detect a lifted mouse); Escape sends exactly one stop and
// releases capture. With no movement, zero-delta heartbeats keep flowing
// at <= 5 Hz so the server sees a live client.

import type { ClientMessage } from "./protocol.js";
import { ScrollCalibration } from "./scroll.js";

export const PIXELS_TO_METERS = 0.0002; // device meters per pointer count
export const FLUSH_INTERVAL_MS = 1000 / 60;
export const HEARTBEAT_INTERVAL_MS = 200; // <= 5 Hz when idle

export type SendFn = (msg: ClientMessage) => void;

export class InputCapture {
  private dx = 0; // accumulated pointer counts, right positive
  private dy = 0; // accumulated pointer counts, screen-down positive
  private wheel = 0; // calibrated detents
  private clutched = false;
  private capturing = false;
  private stopSent = false;
  private lastSendMs = -Infinity;

  constructor(
    private send: SendFn,
    private scroll: ScrollCalibration,
  ) {}

  get isCapturing(): boolean {
    return this.capturing;
  }

  get isClutched(): boolean {
    return this.clutched;
  }

  /** Pointer lock acquired (user clicked the starting area). */
  startCapture(): void {
    this.capturing = true;
    this.stopSent = false;
    this.dx = this.dy = this.wheel = 0;
  }

  /** Pointer lock lost (user pressed ESC or the browser dropped it). */
  releaseCapture(): void {
    this.capturing = false;
    this.dx = this.dy = this.wheel = 0;
  }

  pointerMove(movementX: number, movementY: number): void {
    if (!this.capturing) return;
    this.dx += movementX;
    this.dy += movementY;
  }

  wheelEvent(deltaY: number): void {
    if (!this.capturing || this.scroll.sign === null) return;
    this.wheel += this.scroll.detents(deltaY);
  }

  keyDown(code: string): void {
    if (code === "Space") {
      this.clutched = true;
    } else if (code === "Escape" && this.capturing && !this.stopSent) {
      // exactly one stop per capture session
      this.stopSent = true;
      this.send({ type: "stop" });
      this.releaseCapture();
    }
  }

  keyUp(code: string): void {
    if (code === "Space") {
      this.clutched = false;
    }
  }

  /** Timer callback (60 Hz). Sends accumulated deltas, or a heartbeat. */
  flush(nowMs: number): void {
    if (!this.capturing) return;
    const moved = this.dx !== 0 || this.dy !== 0 || this.wheel !== 0;
    if (!moved && nowMs - this.lastSendMs < HEARTBEAT_INTERVAL_MS) {
      return;
    }
    this.send({
      type: "input",
      dx: this.dx * PIXELS_TO_METERS,
      // pointer y grows downward; device forward is away from the user
      // (+ 0 normalizes the -0 produced by negating an idle accumulator)
      dy: -this.dy * PIXELS_TO_METERS + 0,
      wheel: this.wheel,
      clutched: this.clutched,
      t_client_ms: nowMs,
    });
    this.dx = this.dy = this.wheel = 0;
    this.lastSendMs = nowMs;
  }
}
