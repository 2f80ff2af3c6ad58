// Wire types for protocol version 1 (JSON text frames over WebSocket).

export const PROTO_VERSION = 1;

export interface PoseJson {
  rotation: number[][]; // 3x3, columns are the frame axes
  translation: number[]; // meters
}

export interface IntrinsicsJson {
  focal: number;
  principal: [number, number];
  image_size: [number, number];
}

export interface SceneJson {
  schema: number;
  robot_base: PoseJson;
  camera: { pose: PoseJson; intrinsics: IntrinsicsJson };
  world_rotation: number[][];
  table: { point: number[]; normal: number[] };
  whiteboard?: { point: number[]; normal: number[]; rotation: number[][] };
  frame: string;
  mapping: {
    mode: string;
    translation_scale: number;
    rotation_scale: number;
    wheel_step: number;
    speed_cap: number;
  };
  scenario: string;
  seed: number;
  device: { dim: number; wheel: boolean };
  workspace: number[][];
}

export interface ArmJson {
  joints: {
    axis: number[];
    origin: PoseJson;
    lower: number;
    upper: number;
  }[];
  eef_offset: PoseJson;
  fingertip_offset: number[];
  home_q: number[];
}

export interface SceneMessage {
  type: "scene";
  proto: number;
  session: string;
  scene: SceneJson;
  arm: ArmJson;
  home_state: { joints: number[] };
}

export interface StateMessage {
  type: "state";
  t_ms: number;
  joints: number[];
  eef: { position: number[]; rotation: number[][] };
  fingertip: number[];
  objects: {
    kind: string;
    block?: number[];
    block_half_extent?: number;
    target?: number[];
    target_radius?: number;
    held?: boolean;
    completeness?: number;
  };
  events: string[];
}

export interface QualifyPing {
  type: "qualify_ping";
  seq: number;
  t_ms: number;
}

export interface QualifyResult {
  type: "qualify_result";
  pass: boolean;
  max_rtt_ms: number | null;
  count: number;
  reason?: string;
}

export interface TrialEnd {
  type: "trial_end";
  reason: string;
  metrics: Record<string, unknown>;
}

export interface ErrorMessage {
  type: "error";
  error?: string;
  message: string;
}

export interface EventMessage {
  type: "event";
  event: string;
}

export type ServerMessage =
  | SceneMessage
  | StateMessage
  | QualifyPing
  | QualifyResult
  | TrialEnd
  | ErrorMessage
  | EventMessage;

export interface InputMessage {
  type: "input";
  dx: number; // device meters, right positive
  dy: number; // device meters, forward/up positive
  wheel: number; // calibrated detents, "scroll away" positive
  clutched: boolean;
  t_client_ms: number;
}

export type ClientMessage =
  | { type: "hello"; proto: number }
  | { type: "qualify_begin" }
  | { type: "qualify_echo"; seq: number; t_ms: number }
  | InputMessage
  | { type: "clutch"; on: boolean }
  | { type: "start_trial" }
  | { type: "stop" };
