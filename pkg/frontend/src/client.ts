// Connection state machine mirroring the server's session phases.
//
// Qualification flow: after the scene arrives, the user compares the live
// render against the reference image; only after confirming does the echo
// protocol start. Pings are echoed immediately; a failed result (or a
// rejected render) blocks the study with a retry option.

import type {
  ClientMessage,
  QualifyResult,
  SceneMessage,
  ServerMessage,
  StateMessage,
} from "./protocol.js";
import { PROTO_VERSION } from "./protocol.js";

export type ClientPhase =
  | "disconnected"
  | "connected"
  | "confirm_render"
  | "qualifying"
  | "ready"
  | "in_trial"
  | "done"
  | "blocked";

export interface ClientEvents {
  onPhase?: (phase: ClientPhase) => void;
  onState?: (state: StateMessage) => void;
  onScene?: (scene: SceneMessage) => void;
  onQualifyResult?: (result: QualifyResult) => void;
  onError?: (message: string) => void;
  onTrialEnd?: (metrics: Record<string, unknown>, reason: string) => void;
}

export interface ConditionSelection {
  frame?: string;
  scenario?: string;
}

export class TeleopClient {
  phase: ClientPhase = "disconnected";
  scene: SceneMessage | null = null;
  lastState: StateMessage | null = null;
  qualifyResult: QualifyResult | null = null;

  constructor(
    private send: (msg: ClientMessage) => void,
    private events: ClientEvents = {},
    private condition: ConditionSelection = {},
  ) {}

  private setPhase(phase: ClientPhase): void {
    this.phase = phase;
    this.events.onPhase?.(phase);
  }

  opened(): void {
    this.setPhase("connected");
    const hello: ClientMessage & ConditionSelection = {
      type: "hello",
      proto: PROTO_VERSION,
    };
    if (this.condition.frame) hello.frame = this.condition.frame;
    if (this.condition.scenario) hello.scenario = this.condition.scenario;
    this.send(hello);
  }

  closed(): void {
    this.setPhase("disconnected");
  }

  /** The user's verdict on the side-by-side render comparison. */
  confirmRender(looksCorrect: boolean): void {
    if (this.phase !== "confirm_render") return;
    if (!looksCorrect) {
      this.setPhase("blocked");
      this.events.onError?.(
        "The robot must render correctly before the study can proceed.",
      );
      return;
    }
    this.setPhase("qualifying");
    this.send({ type: "qualify_begin" });
  }

  retryQualification(): void {
    if (this.phase !== "blocked") return;
    this.setPhase("qualifying");
    this.send({ type: "qualify_begin" });
  }

  startTrial(): void {
    if (this.phase !== "ready") return;
    this.send({ type: "start_trial" });
    this.setPhase("in_trial");
  }

  handleMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case "scene":
        this.scene = msg;
        this.events.onScene?.(msg);
        this.setPhase("confirm_render");
        break;
      case "qualify_ping":
        this.send({ type: "qualify_echo", seq: msg.seq, t_ms: msg.t_ms });
        break;
      case "qualify_result":
        this.qualifyResult = msg;
        this.events.onQualifyResult?.(msg);
        this.setPhase(msg.pass ? "ready" : "blocked");
        break;
      case "state":
        this.lastState = msg;
        this.events.onState?.(msg);
        break;
      case "trial_end":
        this.setPhase("done");
        this.events.onTrialEnd?.(msg.metrics, msg.reason);
        break;
      case "error":
        this.events.onError?.(msg.message);
        break;
      case "event":
        break;
    }
  }
}
