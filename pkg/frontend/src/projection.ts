/** Quaternion pose math and pinhole projection for overlay rendering.
 *
 * Quaternions are [w, x, y, z] rotating body axes into ENU, matching the
 * tracked-pose convention of the service. Body frame: x forward, y left,
 * z up. Camera frame: x right, y down, z forward (optical axis = body x).
 */

export type Quat = [number, number, number, number];
export type Vec3 = [number, number, number];

export interface CameraIntrinsics {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
}

export interface Pixel {
  u: number;
  v: number;
  depth: number;
}

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

export function quatFromRotvec(v: Vec3): Quat {
  const angle = Math.hypot(v[0], v[1], v[2]);
  if (angle < 1e-300) return [1, 0, 0, 0];
  const half = angle / 2;
  const s = Math.sin(half) / angle;
  return [Math.cos(half), v[0] * s, v[1] * s, v[2] * s];
}

/** Heading in compass degrees (0 = north, 90 = east) to a yaw-only quat. */
export function quatFromHeading(headingDeg: number): Quat {
  const yaw = ((90 - headingDeg) * Math.PI) / 180;
  return quatFromRotvec([0, 0, yaw]);
}

/** Heading plus downward camera pitch, composed body-side like the tracker. */
export function poseQuat(headingDeg: number, pitchDeg: number): Quat {
  const q = quatFromHeading(headingDeg);
  if (pitchDeg === 0) return q;
  return quatMultiply(q, quatFromRotvec([0, (pitchDeg * Math.PI) / 180, 0]));
}

/** Row-major 3x3 rotation matrix taking body vectors into ENU. */
export function quatToMatrix(q: Quat): number[][] {
  const [w, x, y, z] = q;
  const n = w * w + x * x + y * y + z * z;
  if (n === 0) throw new Error("zero quaternion");
  const s = 2 / n;
  return [
    [1 - s * (y * y + z * z), s * (x * y - w * z), s * (x * z + w * y)],
    [s * (x * y + w * z), 1 - s * (x * x + z * z), s * (y * z - w * x)],
    [s * (x * z - w * y), s * (y * z + w * x), 1 - s * (x * x + y * y)],
  ];
}

/** Fixed body-to-camera axis permutation: camera x = -body y,
 * camera y = -body z, camera z = body x. */
export const CAMERA_FROM_BODY: number[][] = [
  [0, -1, 0],
  [0, 0, -1],
  [1, 0, 0],
];

function matMul(a: number[][], b: number[][]): number[][] {
  const out = [
    [0, 0, 0],
    [0, 0, 0],
    [0, 0, 0],
  ];
  for (let i = 0; i < 3; i++)
    for (let j = 0; j < 3; j++)
      for (let k = 0; k < 3; k++) out[i]![j]! += a[i]![k]! * b[k]![j]!;
  return out;
}

function transpose(a: number[][]): number[][] {
  return [
    [a[0]![0]!, a[1]![0]!, a[2]![0]!],
    [a[0]![1]!, a[1]![1]!, a[2]![1]!],
    [a[0]![2]!, a[1]![2]!, a[2]![2]!],
  ];
}

/** ENU-to-camera rotation for a body-to-ENU orientation quat. */
export function cameraMatrix(orientation: Quat): number[][] {
  return matMul(CAMERA_FROM_BODY, transpose(quatToMatrix(orientation)));
}

/** Project an ENU point (camera at the ENU origin) through a pinhole.
 * Returns null for points at or behind the camera plane. */
export function projectPoint(
  cam: number[][],
  k: CameraIntrinsics,
  p: Vec3,
): Pixel | null {
  const xc = cam[0]![0]! * p[0] + cam[0]![1]! * p[1] + cam[0]![2]! * p[2];
  const yc = cam[1]![0]! * p[0] + cam[1]![1]! * p[1] + cam[1]![2]! * p[2];
  const zc = cam[2]![0]! * p[0] + cam[2]![1]! * p[1] + cam[2]![2]! * p[2];
  if (zc <= 0) return null;
  return {
    u: k.fx * (xc / zc) + k.cx,
    v: k.fy * (yc / zc) + k.cy,
    depth: zc,
  };
}
