import { beforeEach, describe, expect, it } from "vitest";

import {
  HEARTBEAT_INTERVAL_MS,
  InputCapture,
  PIXELS_TO_METERS,
} from "../src/input.js";
import type { ClientMessage, InputMessage } from "../src/protocol.js";
import { ScrollCalibration, WHEEL_DELTA_PER_DETENT } from "../src/scroll.js";

let sent: ClientMessage[];
let capture: InputCapture;

function inputs(): InputMessage[] {
  return sent.filter((m): m is InputMessage => m.type === "input");
}

beforeEach(() => {
  sent = [];
  const scroll = new ScrollCalibration();
  scroll.begin();
  for (let i = 0; i < 5; i++) scroll.feed(-WHEEL_DELTA_PER_DETENT); // natural
  capture = new InputCapture((msg) => sent.push(msg), scroll);
  capture.startCapture();
});

describe("escape", () => {
  it("emits exactly one stop and releases capture", () => {
    capture.keyDown("Escape");
    capture.keyDown("Escape");
    capture.keyDown("Escape");
    expect(sent.filter((m) => m.type === "stop")).toHaveLength(1);
    expect(capture.isCapturing).toBe(false);
    // further movement goes nowhere
    capture.pointerMove(10, 10);
    capture.flush(1000);
    expect(inputs()).toHaveLength(0);
  });

  it("a new capture session can stop again", () => {
    capture.keyDown("Escape");
    capture.startCapture();
    capture.keyDown("Escape");
    expect(sent.filter((m) => m.type === "stop")).toHaveLength(2);
  });

  it("does nothing when not capturing", () => {
    capture.releaseCapture();
    capture.keyDown("Escape");
    expect(sent.filter((m) => m.type === "stop")).toHaveLength(0);
  });
});

describe("space clutch", () => {
  it("marks inputs clutched while held and releases on keyup", () => {
    capture.pointerMove(10, 0);
    capture.keyDown("Space");
    capture.flush(0);
    capture.pointerMove(10, 0);
    capture.flush(100);
    capture.keyUp("Space");
    capture.pointerMove(10, 0);
    capture.flush(200);
    const msgs = inputs();
    expect(msgs.map((m) => m.clutched)).toEqual([true, true, false]);
  });
});

describe("delta accumulation", () => {
  it("sums pointer counts between flushes and converts to meters", () => {
    capture.pointerMove(30, -10);
    capture.pointerMove(20, -15);
    capture.flush(0);
    const [msg] = inputs();
    expect(msg.dx).toBeCloseTo(50 * PIXELS_TO_METERS, 12);
    // pointer y grows downward, device forward is positive
    expect(msg.dy).toBeCloseTo(25 * PIXELS_TO_METERS, 12);
  });

  it("scroll away yields positive wheel detents after calibration", () => {
    capture.wheelEvent(-2 * WHEEL_DELTA_PER_DETENT); // away on natural platform
    capture.flush(0);
    expect(inputs()[0].wheel).toBeCloseTo(2);
  });

  it("resets accumulators after each flush", () => {
    capture.pointerMove(10, 10);
    capture.flush(0);
    capture.pointerMove(5, 0);
    capture.flush(20);
    const msgs = inputs();
    expect(msgs[1].dx).toBeCloseTo(5 * PIXELS_TO_METERS, 12);
  });

  it("sends nothing while not capturing", () => {
    capture.releaseCapture();
    capture.pointerMove(10, 10);
    capture.flush(0);
    expect(inputs()).toHaveLength(0);
  });
});

describe("heartbeat", () => {
  it("idle flushes thin out to at most 5 Hz zero-delta inputs", () => {
    capture.pointerMove(1, 0);
    capture.flush(0);
    // 60 Hz of idle flushes for one second
    for (let t = 16; t <= 1000; t += 16) capture.flush(t);
    const idle = inputs().slice(1);
    expect(idle.length).toBeGreaterThan(0);
    expect(idle.length).toBeLessThanOrEqual(5);
    for (const msg of idle) {
      expect(msg.dx).toBe(0);
      expect(msg.dy).toBe(0);
      expect(msg.wheel).toBe(0);
    }
    const times = inputs().map((m) => m.t_client_ms);
    for (let i = 1; i < times.length; i++) {
      expect(times[i] - times[i - 1]).toBeGreaterThanOrEqual(
        HEARTBEAT_INTERVAL_MS,
      );
    }
  });

  it("movement sends immediately even right after a heartbeat", () => {
    capture.flush(0);
    capture.pointerMove(4, 0);
    capture.flush(16);
    expect(inputs()).toHaveLength(2);
    expect(inputs()[1].dx).toBeCloseTo(4 * PIXELS_TO_METERS, 12);
  });
});
