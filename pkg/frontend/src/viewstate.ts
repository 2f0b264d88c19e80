/** Which view owns the main canvas, plus the omniscient camera pose.
 *  All operations return fresh state; nothing here talks to the bridge. */

import { OmniCamera, behindRobot, defaultCamera, rotatedBy } from "./camera.js";
import { OdomPayload, ViewName } from "./protocol.js";

export const ROTATE_STEP = Math.PI / 12; // 15 degrees per nudge

export interface ViewState {
  main: ViewName;
  omni: OmniCamera;
  egoZoom: number; // pixels per meter in the perspective view
}

export function initialViewState(): ViewState {
  return { main: "omniscient", omni: defaultCamera(), egoZoom: 60 };
}

export type ViewAction =
  | "switch_left"
  | "switch_right"
  | "rotate_left"
  | "rotate_right"
  | "rotate_back";

export function applyViewAction(
  view: ViewState,
  action: ViewAction,
  odom: OdomPayload | null,
): ViewState {
  switch (action) {
    case "switch_left":
    case "switch_right": {
      const main: ViewName =
        view.main === "omniscient" ? "perspective" : "omniscient";
      return { ...view, main };
    }
    case "rotate_left":
      return { ...view, omni: rotatedBy(view.omni, ROTATE_STEP) };
    case "rotate_right":
      return { ...view, omni: rotatedBy(view.omni, -ROTATE_STEP) };
    case "rotate_back":
      if (odom === null) {
        return view;
      }
      return { ...view, omni: behindRobot(view.omni, odom) };
  }
}
