// Pure scene-to-screen rendering model.
//
// The client draws entirely from state messages (no video stream): the
// table grid, the optional whiteboard and target curve, the block and
// target disc, and the arm as segments between link origins. All screen
// positions come from the same pinhole model the server uses, so the drawn
// end effector lands on the server-predicted pixel.

import type { ArmJson, SceneJson, StateMessage } from "./protocol.js";
import { add, matVec, projectPoint, scale, type Vec3 } from "./projection.js";

export interface DrawModel {
  polylines: { points: [number, number][]; color: string; width: number }[];
  discs: { center: [number, number]; radius_px: number; color: string }[];
  eef_px: [number, number] | null;
  fingertip_px: [number, number] | null;
  hud: string[];
}

function mat3Identity(): number[][] {
  return [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
  ];
}

function rodrigues(axis: Vec3, angle: number): number[][] {
  const [x, y, z] = axis;
  const c = Math.cos(angle);
  const s = Math.sin(angle);
  const t = 1 - c;
  return [
    [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
    [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
    [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
  ];
}

function matMul(a: number[][], b: number[][]): number[][] {
  const out = mat3Identity();
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    }
  }
  return out;
}

/** Link origin positions (including eef and fingertip) for joint values. */
export function linkPositions(arm: ArmJson, q: number[]): Vec3[] {
  let r = mat3Identity();
  let p: Vec3 = [0, 0, 0];
  const points: Vec3[] = [];
  arm.joints.forEach((joint, i) => {
    p = add(p, matVec(r, joint.origin.translation as Vec3));
    r = matMul(r, joint.origin.rotation);
    r = matMul(r, rodrigues(joint.axis as Vec3, q[i]));
    points.push(p);
  });
  const eef = add(p, matVec(r, arm.eef_offset.translation as Vec3));
  points.push(eef);
  const eefR = matMul(r, arm.eef_offset.rotation);
  points.push(add(eef, matVec(eefR, arm.fingertip_offset as Vec3)));
  return points;
}

function projectPolyline(
  scene: SceneJson,
  points: Vec3[],
): [number, number][] {
  const out: [number, number][] = [];
  for (const p of points) {
    const px = projectPoint(scene.camera.pose, scene.camera.intrinsics, p);
    if (px) out.push(px);
  }
  return out;
}

function tableGrid(scene: SceneJson): Vec3[][] {
  const [[x0, x1], [y0, y1]] = scene.workspace;
  const lines: Vec3[][] = [];
  const n = 5;
  for (let i = 0; i <= n; i++) {
    const x = x0 + ((x1 - x0) * i) / n;
    const y = y0 + ((y1 - y0) * i) / n;
    lines.push([
      [x, y0, 0],
      [x, y1, 0],
    ]);
    lines.push([
      [x0, y, 0],
      [x1, y, 0],
    ]);
  }
  return lines;
}

export function buildDrawModel(
  scene: SceneJson,
  arm: ArmJson,
  state: StateMessage,
  targetCurveBoard?: [number, number][],
): DrawModel {
  const model: DrawModel = {
    polylines: [],
    discs: [],
    eef_px: null,
    fingertip_px: null,
    hud: [],
  };
  for (const line of tableGrid(scene)) {
    model.polylines.push({
      points: projectPolyline(scene, line),
      color: "#8884",
      width: 1,
    });
  }
  if (scene.whiteboard && targetCurveBoard) {
    const rot = scene.whiteboard.rotation;
    const origin = scene.whiteboard.point as Vec3;
    const lifted = targetCurveBoard.map((uv) =>
      add(
        origin,
        add(
          scale([rot[0][0], rot[1][0], rot[2][0]], uv[0]),
          scale([rot[0][1], rot[1][1], rot[2][1]], uv[1]),
        ),
      ),
    );
    model.polylines.push({
      points: projectPolyline(scene, lifted),
      color: "#46f",
      width: 2,
    });
  }
  const obj = state.objects;
  if (obj.kind === "pick_place" && obj.block && obj.target) {
    const half = obj.block_half_extent ?? 0.025;
    const block = obj.block as Vec3;
    const corners: Vec3[] = [
      add(block, [-half, -half, -half]),
      add(block, [half, -half, -half]),
      add(block, [half, half, -half]),
      add(block, [-half, half, -half]),
      add(block, [-half, -half, -half]),
      add(block, [-half, -half, half]),
      add(block, [half, -half, half]),
      add(block, [half, half, half]),
      add(block, [-half, half, half]),
      add(block, [-half, -half, half]),
    ];
    model.polylines.push({
      points: projectPolyline(scene, corners),
      color: obj.held ? "#fa0" : "#d33",
      width: 2,
    });
    const targetPx = projectPoint(
      scene.camera.pose,
      scene.camera.intrinsics,
      obj.target as Vec3,
    );
    if (targetPx) {
      const edge = projectPoint(scene.camera.pose, scene.camera.intrinsics, [
        obj.target[0] + (obj.target_radius ?? 0.05),
        obj.target[1],
        obj.target[2],
      ]);
      const radiusPx = edge
        ? Math.hypot(edge[0] - targetPx[0], edge[1] - targetPx[1])
        : 10;
      model.discs.push({ center: targetPx, radius_px: radiusPx, color: "#3a3" });
    }
  }
  const armPts = linkPositions(arm, state.joints);
  model.polylines.push({
    points: projectPolyline(scene, armPts),
    color: "#eee",
    width: 4,
  });
  model.eef_px = projectPoint(
    scene.camera.pose,
    scene.camera.intrinsics,
    state.eef.position as Vec3,
  );
  model.fingertip_px = projectPoint(
    scene.camera.pose,
    scene.camera.intrinsics,
    state.fingertip as Vec3,
  );
  model.hud.push(`t = ${(state.t_ms / 1000).toFixed(1)} s`);
  if (obj.kind === "tracing" && obj.completeness !== undefined) {
    model.hud.push(`traced ${(obj.completeness * 100).toFixed(0)}%`);
  }
  if (state.events.length) {
    model.hud.push(state.events.join(", "));
  }
  return model;
}

/** Draw a model onto a 2D canvas context. */
export function drawToCanvas(
  ctx: CanvasRenderingContext2D,
  model: DrawModel,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "#181c20";
  ctx.fillRect(0, 0, width, height);
  for (const line of model.polylines) {
    if (line.points.length < 2) continue;
    ctx.strokeStyle = line.color;
    ctx.lineWidth = line.width;
    ctx.beginPath();
    ctx.moveTo(line.points[0][0], line.points[0][1]);
    for (const [u, v] of line.points.slice(1)) ctx.lineTo(u, v);
    ctx.stroke();
  }
  for (const disc of model.discs) {
    ctx.strokeStyle = disc.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(disc.center[0], disc.center[1], disc.radius_px, 0, 2 * Math.PI);
    ctx.stroke();
  }
  if (model.fingertip_px) {
    ctx.fillStyle = "#fd4";
    ctx.beginPath();
    ctx.arc(model.fingertip_px[0], model.fingertip_px[1], 4, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.fillStyle = "#ccc";
  ctx.font = "14px monospace";
  model.hud.forEach((line, i) => ctx.fillText(line, 12, 20 + 18 * i));
}
