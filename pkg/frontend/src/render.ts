/** Canvas drawing for both views. Pure functions of (scene, view,
 *  viewport); all coordinate work is delegated to camera.ts so clicking
 *  and drawing can never disagree. */

import {
  OmniCamera,
  Viewport,
  egoToScreen,
  omniToScreen,
} from "./camera.js";
import { OdomPayload, ViewName } from "./protocol.js";
import { SceneState } from "./scene.js";
import { Vec2, boxCorners, rosToDisplay, segmentToBox } from "./transforms.js";
import { ViewState } from "./viewstate.js";

export const WALL_THICKNESS = 0.06;  // meters; rendering choice only
export const FIDUCIAL_SIZE = 0.1;
export const STALE_AFTER_MS = 2000;
export const POINTER_FADE_MS = 5000;

type Ctx = CanvasRenderingContext2D;
type Project = (p: Vec2) => { px: number; py: number };

function projector(
  view: ViewName,
  state: ViewState,
  odom: OdomPayload | null,
  vp: Viewport,
): Project {
  if (view === "perspective" && odom !== null) {
    return (p) => egoToScreen(odom, vp, state.egoZoom, p);
  }
  return (p) => omniToScreen(state.omni, vp, p);
}

function drawGrid(ctx: Ctx, cam: OmniCamera, vp: Viewport): void {
  ctx.save();
  ctx.strokeStyle = "#2a2f38";
  ctx.lineWidth = 1;
  const span = Math.max(vp.width, vp.height) / cam.zoom + 4;
  const x0 = Math.floor(cam.centerX - span / 2);
  const z0 = Math.floor(cam.centerZ - span / 2);
  for (let i = 0; i <= span; i += 1) {
    for (const line of [
      [{ x: x0 + i, z: z0 }, { x: x0 + i, z: z0 + span }],
      [{ x: x0, z: z0 + i }, { x: x0 + span, z: z0 + i }],
    ]) {
      const a = omniToScreen(cam, vp, line[0]);
      const b = omniToScreen(cam, vp, line[1]);
      ctx.beginPath();
      ctx.moveTo(a.px, a.py);
      ctx.lineTo(b.px, b.py);
      ctx.stroke();
    }
  }
  ctx.restore();
}

function drawPolygon(ctx: Ctx, project: Project, pts: Vec2[], fill: string): void {
  ctx.beginPath();
  pts.forEach((p, i) => {
    const s = project(p);
    if (i === 0) {
      ctx.moveTo(s.px, s.py);
    } else {
      ctx.lineTo(s.px, s.py);
    }
  });
  ctx.closePath();
  ctx.fillStyle = fill;
  ctx.fill();
}

function drawWalls(ctx: Ctx, project: Project, scene: SceneState): void {
  if (scene.map === null) {
    return;
  }
  for (const seg of scene.map.segments) {
    const box = segmentToBox(seg.a1, seg.b1, seg.a2, seg.b2);
    drawPolygon(ctx, project, boxCorners(box, WALL_THICKNESS), "#c8cdd6");
  }
}

function drawFiducials(ctx: Ctx, project: Project, scene: SceneState): void {
  if (scene.fiducials === null) {
    return;
  }
  const h = FIDUCIAL_SIZE / 2;
  for (const f of scene.fiducials.fiducials) {
    const c = rosToDisplay(f.x, f.y);
    drawPolygon(ctx, project, [
      { x: c.x - h, z: c.z - h },
      { x: c.x + h, z: c.z - h },
      { x: c.x + h, z: c.z + h },
      { x: c.x - h, z: c.z + h },
    ], "#e0b13c");
    const s = project(c);
    ctx.fillStyle = "#ffd978";
    ctx.font = "12px sans-serif";
    ctx.fillText(String(f.id), s.px + 7, s.py - 7);
  }
}

function drawRobot(ctx: Ctx, project: Project, odom: OdomPayload): void {
  const c = Math.cos(odom.theta);
  const s = Math.sin(odom.theta);
  const tip = rosToDisplay(odom.x + 0.18 * c, odom.y + 0.18 * s);
  const left = rosToDisplay(odom.x - 0.1 * c - 0.09 * s, odom.y - 0.1 * s + 0.09 * c);
  const right = rosToDisplay(odom.x - 0.1 * c + 0.09 * s, odom.y - 0.1 * s - 0.09 * c);
  drawPolygon(ctx, project, [tip, left, right], "#5fd38a");
}

function drawPointer(ctx: Ctx, project: Project, scene: SceneState, nowMs: number): void {
  if (scene.pointer === null || nowMs - scene.pointer.placedMs > POINTER_FADE_MS) {
    return;
  }
  const s = project({ x: scene.pointer.x, z: scene.pointer.z });
  ctx.beginPath();
  ctx.arc(s.px, s.py, 9, 0, 2 * Math.PI);
  ctx.strokeStyle = "#b87ae8";
  ctx.lineWidth = 3;
  ctx.stroke();
}

export function renderView(
  ctx: Ctx,
  view: ViewName,
  state: ViewState,
  scene: SceneState,
  vp: Viewport,
  nowMs: number,
): void {
  ctx.save();
  ctx.fillStyle = "#171a20";
  ctx.fillRect(0, 0, vp.width, vp.height);
  if (view === "omniscient") {
    drawGrid(ctx, state.omni, vp);
  }
  const project = projector(view, state, scene.odom, vp);
  drawWalls(ctx, project, scene);
  drawFiducials(ctx, project, scene);
  if (scene.odom !== null) {
    drawRobot(ctx, project, scene.odom);
  }
  drawPointer(ctx, project, scene, nowMs);
  if (nowMs - scene.lastUpdateMs > STALE_AFTER_MS) {
    ctx.fillStyle = "#e86a6a";
    ctx.font = "13px sans-serif";
    ctx.fillText("stale", 8, 18);
  }
  ctx.restore();
}
