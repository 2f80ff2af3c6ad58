// Pinhole projection identical to the server's model so screen geometry
// matches what the session computes.
//
// Camera axes: x = image right, y = image up, z = backward (viewing
// direction is -z). Raster pixels: u grows right, v grows DOWN.

import type { IntrinsicsJson, PoseJson } from "./protocol.js";

export type Vec3 = [number, number, number];

export function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function scale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

// rotation matrices are row-major arrays of rows; columns are frame axes
export function matVec(m: number[][], v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
    m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
    m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
  ];
}

export function matTVec(m: number[][], v: Vec3): Vec3 {
  return [
    m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
    m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
    m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
  ];
}

export function transformPoint(pose: PoseJson, p: Vec3): Vec3 {
  return add(matVec(pose.rotation, p), pose.translation as Vec3);
}

export function inverseTransformPoint(pose: PoseJson, p: Vec3): Vec3 {
  return matTVec(pose.rotation, sub(p, pose.translation as Vec3));
}

/** Depth of a world point along the camera viewing direction (m). */
export function pointDepth(camera: PoseJson, p: Vec3): number {
  return -inverseTransformPoint(camera, p)[2];
}

/**
 * World point -> raster pixels. Returns null for points at or behind the
 * camera plane (the caller skips drawing those).
 */
export function projectPoint(
  camera: PoseJson,
  k: IntrinsicsJson,
  p: Vec3,
): [number, number] | null {
  const pc = inverseTransformPoint(camera, p);
  const depth = -pc[2];
  if (depth <= 1e-6) {
    return null;
  }
  const [cx, cy] = k.principal;
  return [cx + (k.focal * pc[0]) / depth, cy - (k.focal * pc[1]) / depth];
}
