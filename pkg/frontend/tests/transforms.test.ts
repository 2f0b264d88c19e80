import { describe, expect, it } from "vitest";

import {
  boxCorners,
  boxEndpoints,
  displayToRos,
  rosToDisplay,
  segmentToBox,
} from "../src/transforms.js";

describe("point transforms", () => {
  it("maps the origin to itself", () => {
    const d = rosToDisplay(0, 0);
    expect(d.x === 0 && d.z === 0).toBe(true);
    const r = displayToRos(0, 0);
    expect(r.a === 0 && r.b === 0).toBe(true);
  });

  it("matches the robot-side convention", () => {
    const d1 = rosToDisplay(1, 0);
    expect(d1.x === 0 && d1.z === 1).toBe(true);
    expect(rosToDisplay(2, -3)).toEqual({ x: 3, z: 2 });
    const r = displayToRos(0, 1);
    expect(r.a === 1 && r.b === 0).toBe(true);
  });

  it("round-trips exactly", () => {
    for (let k = 0; k < 500; k += 1) {
      const a = (k * 37.1) % 19 - 9.5;
      const b = (k * 11.7) % 13 - 6.5;
      const d = rosToDisplay(a, b);
      const r = displayToRos(d.x, d.z);
      expect(r.a).toBeCloseTo(a, 12);
      expect(r.b).toBeCloseTo(b, 12);
    }
  });
});

describe("segmentToBox", () => {
  it("handles the three reference orientations", () => {
    expect(segmentToBox(0, 0, 0, 2).yaw).toBeCloseTo(0, 12);
    expect(segmentToBox(0, 0, 2, 0).yaw).toBeCloseTo(-Math.PI / 2, 12);
    expect(segmentToBox(0, 0, 1, 1).yaw).toBeCloseTo(Math.PI / 4, 12);
  });

  it("is invariant under endpoint swap", () => {
    const a = segmentToBox(0.3, -1.2, 2.6, 0.4);
    const b = segmentToBox(2.6, 0.4, 0.3, -1.2);
    expect(a.cx).toBeCloseTo(b.cx, 12);
    expect(a.cz).toBeCloseTo(b.cz, 12);
    expect(a.yaw).toBeCloseTo(b.yaw, 12);
    expect(a.length).toBeCloseTo(b.length, 12);
  });

  it("preserves segment length", () => {
    const box = segmentToBox(-1, 2, 3, -0.5);
    expect(box.length).toBeCloseTo(Math.hypot(4, -2.5), 12);
  });

  it("recovers its endpoints", () => {
    const [p, q] = boxEndpoints(segmentToBox(0.7, 0.1, -1.3, 2.2));
    const back = [displayToRos(p.x, p.z), displayToRos(q.x, q.z)];
    const want = [
      { a: 0.7, b: 0.1 },
      { a: -1.3, b: 2.2 },
    ];
    const direct =
      Math.hypot(back[0].a - want[0].a, back[0].b - want[0].b) +
      Math.hypot(back[1].a - want[1].a, back[1].b - want[1].b);
    const swapped =
      Math.hypot(back[0].a - want[1].a, back[0].b - want[1].b) +
      Math.hypot(back[1].a - want[0].a, back[1].b - want[0].b);
    expect(Math.min(direct, swapped)).toBeLessThan(1e-9);
  });

  it("builds a rectangle of the requested thickness", () => {
    const corners = boxCorners(segmentToBox(0, 0, 2, 0), 0.06);
    expect(corners).toHaveLength(4);
    const side = Math.hypot(corners[1].x - corners[0].x, corners[1].z - corners[0].z);
    const width = Math.hypot(corners[2].x - corners[1].x, corners[2].z - corners[1].z);
    expect(side).toBeCloseTo(2, 9);
    expect(width).toBeCloseTo(0.06, 9);
  });
});
