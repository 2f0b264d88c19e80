/** Screen <-> display-plane mappings for the two views.
 *
 *  The omniscient camera pans, zooms and rotates freely over the ground
 *  plane. The perspective camera is rigidly locked to the latest odometry:
 *  the robot sits at the lower-center of its viewport with its heading
 *  pointing up. Both mappings have exact inverses, which is what makes
 *  click-deixis trustworthy. */

import { OdomPayload } from "./protocol.js";
import { Vec2, rosToDisplay } from "./transforms.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface OmniCamera {
  centerX: number; // display coords at the viewport center
  centerZ: number;
  zoom: number;    // pixels per meter
  rot: number;     // radians, counter-clockwise on the ground plane
}

export function defaultCamera(): OmniCamera {
  return { centerX: 0, centerZ: 0, zoom: 80, rot: 0 };
}

export function omniToScreen(cam: OmniCamera, vp: Viewport, p: Vec2): { px: number; py: number } {
  const dx = p.x - cam.centerX;
  const dz = p.z - cam.centerZ;
  const c = Math.cos(-cam.rot);
  const s = Math.sin(-cam.rot);
  const qx = c * dx - s * dz;
  const qz = s * dx + c * dz;
  return { px: vp.width / 2 + cam.zoom * qx, py: vp.height / 2 - cam.zoom * qz };
}

export function omniToWorld(cam: OmniCamera, vp: Viewport, px: number, py: number): Vec2 {
  const qx = (px - vp.width / 2) / cam.zoom;
  const qz = (vp.height / 2 - py) / cam.zoom;
  const c = Math.cos(cam.rot);
  const s = Math.sin(cam.rot);
  return {
    x: cam.centerX + c * qx - s * qz,
    z: cam.centerZ + s * qx + c * qz,
  };
}

export function panned(cam: OmniCamera, dpx: number, dpy: number): OmniCamera {
  const c = Math.cos(cam.rot);
  const s = Math.sin(cam.rot);
  const qx = -dpx / cam.zoom;
  const qz = dpy / cam.zoom;
  return {
    ...cam,
    centerX: cam.centerX + c * qx - s * qz,
    centerZ: cam.centerZ + s * qx + c * qz,
  };
}

export function zoomed(cam: OmniCamera, factor: number): OmniCamera {
  const zoom = Math.min(800, Math.max(8, cam.zoom * factor));
  return { ...cam, zoom };
}

export function rotatedBy(cam: OmniCamera, delta: number): OmniCamera {
  return { ...cam, rot: cam.rot + delta };
}

/** Display-plane angle of the robot heading: world direction
 *  (cos t, sin t) maps to display (-sin t, cos t). */
export function headingDisplayAngle(theta: number): number {
  return Math.atan2(Math.cos(theta), -Math.sin(theta));
}

/** Camera rotation that puts the robot's heading straight up. */
export function behindRobot(cam: OmniCamera, odom: OdomPayload): OmniCamera {
  const robot = rosToDisplay(odom.x, odom.y);
  return {
    ...cam,
    centerX: robot.x,
    centerZ: robot.z,
    rot: headingDisplayAngle(odom.theta) - Math.PI / 2,
  };
}

/** Egocentric view: robot fixed at (width/2, 0.85*height), heading up. */
const EGO_ANCHOR = 0.85;

export function egoToScreen(odom: OdomPayload, vp: Viewport, zoom: number, p: Vec2): { px: number; py: number } {
  const robot = rosToDisplay(odom.x, odom.y);
  const rot = headingDisplayAngle(odom.theta) - Math.PI / 2;
  const dx = p.x - robot.x;
  const dz = p.z - robot.z;
  const c = Math.cos(-rot);
  const s = Math.sin(-rot);
  const qx = c * dx - s * dz;
  const qz = s * dx + c * dz;
  return { px: vp.width / 2 + zoom * qx, py: vp.height * EGO_ANCHOR - zoom * qz };
}

export function egoToWorld(odom: OdomPayload, vp: Viewport, zoom: number, px: number, py: number): Vec2 {
  const robot = rosToDisplay(odom.x, odom.y);
  const rot = headingDisplayAngle(odom.theta) - Math.PI / 2;
  const qx = (px - vp.width / 2) / zoom;
  const qz = (vp.height * EGO_ANCHOR - py) / zoom;
  const c = Math.cos(rot);
  const s = Math.sin(rot);
  return { x: robot.x + c * qx - s * qz, z: robot.z + s * qx + c * qz };
}
