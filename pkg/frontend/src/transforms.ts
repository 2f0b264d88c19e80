/** World-frame <-> display-plane conversions, mirroring the robot side.
 *  A world point (a, b) lands on the display ground plane at (-b, a);
 *  the inverse is (a, b) = (z, -x). */

export interface Vec2 {
  x: number;
  z: number;
}

export function rosToDisplay(a: number, b: number): Vec2 {
  return { x: -b, z: a };
}

export function displayToRos(x: number, z: number): { a: number; b: number } {
  return { a: z, b: -x };
}

export interface Box {
  cx: number;
  cz: number;
  length: number;
  yaw: number;
}

function sgn(v: number): number {
  return v < 0 ? -1 : 1; // sgn(0) = 1, matching the robot-side convention
}

/** A wall segment (a1,b1)-(a2,b2) as a display box: midpoint, span and
 *  yaw -asin(u.z) * sgn(u.x) with the direction canonicalized so endpoint
 *  order never matters. */
export function segmentToBox(a1: number, b1: number, a2: number, b2: number): Box {
  const q1 = rosToDisplay(a1, b1);
  const q2 = rosToDisplay(a2, b2);
  const dx = q2.x - q1.x;
  const dz = q2.z - q1.z;
  const length = Math.hypot(dx, dz);
  if (length <= 1e-9) {
    throw new Error("degenerate segment");
  }
  let ux = dx / length;
  let uz = dz / length;
  if (ux < 0 || (ux === 0 && uz < 0)) {
    ux = -ux;
    uz = -uz;
  }
  const yaw = -Math.asin(Math.max(-1, Math.min(1, uz))) * sgn(ux);
  return { cx: (q1.x + q2.x) / 2, cz: (q1.z + q2.z) / 2, length, yaw };
}

/** Rectangle corners for drawing a box with the given thickness. */
export function boxCorners(box: Box, thickness: number): Vec2[] {
  const ux = Math.cos(-box.yaw);
  const uz = Math.sin(-box.yaw);
  const hx = (box.length / 2) * ux;
  const hz = (box.length / 2) * uz;
  const wx = (thickness / 2) * -uz;
  const wz = (thickness / 2) * ux;
  return [
    { x: box.cx - hx - wx, z: box.cz - hz - wz },
    { x: box.cx + hx - wx, z: box.cz + hz - wz },
    { x: box.cx + hx + wx, z: box.cz + hz + wz },
    { x: box.cx - hx + wx, z: box.cz - hz + wz },
  ];
}

/** The two segment endpoints a box encodes (display frame). */
export function boxEndpoints(box: Box): [Vec2, Vec2] {
  const ux = Math.cos(-box.yaw);
  const uz = Math.sin(-box.yaw);
  const h = box.length / 2;
  return [
    { x: box.cx - h * ux, z: box.cz - h * uz },
    { x: box.cx + h * ux, z: box.cz + h * uz },
  ];
}
