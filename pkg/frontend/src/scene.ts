/** The console's picture of the robot's world.
 *
 *  A SceneState is an immutable snapshot; every channel update produces a
 *  new one, and a full scene can equally be rebuilt from the bridge's
 *  latest values alone, which is what makes reconnects stateless. */

import {
  ChannelKey,
  FeedbackPayload,
  FiducialsPayload,
  MapPayload,
  NEED_INPUT_MESSAGE,
  OdomPayload,
} from "./protocol.js";

export interface TickerEntry extends FeedbackPayload {
  seq: number;
}

export interface PointerMarker {
  x: number;
  z: number;
  placedMs: number; // wall clock; the marker fades after the deixis window
}

export interface SceneState {
  map: MapPayload | null;
  odom: OdomPayload | null;
  fiducials: FiducialsPayload | null;
  ticker: TickerEntry[];
  lastFeedbackSeq: number;
  choicePending: boolean;
  pointer: PointerMarker | null;
  lastUpdateMs: number; // wall-clock of the last channel update (staleness)
}

export const TICKER_LIMIT = 200;

export function emptyScene(): SceneState {
  return {
    map: null,
    odom: null,
    fiducials: null,
    ticker: [],
    lastFeedbackSeq: 0,
    choicePending: false,
    pointer: null,
    lastUpdateMs: 0,
  };
}

export function applyUpdate(
  scene: SceneState,
  key: ChannelKey,
  seq: number,
  payload: unknown,
  nowMs = 0,
): SceneState {
  switch (key) {
    case "Map":
      return { ...scene, map: payload as MapPayload, lastUpdateMs: nowMs };
    case "Odom":
      return { ...scene, odom: payload as OdomPayload, lastUpdateMs: nowMs };
    case "Fiducials":
      return {
        ...scene,
        fiducials: payload as FiducialsPayload,
        lastUpdateMs: nowMs,
      };
    case "Kirby_Feedback": {
      if (seq <= scene.lastFeedbackSeq) {
        return scene; // replay of something already in the ticker
      }
      const entry = { ...(payload as FeedbackPayload), seq };
      const ticker = [...scene.ticker, entry].slice(-TICKER_LIMIT);
      return {
        ...scene,
        ticker,
        lastFeedbackSeq: seq,
        choicePending: entry.message === NEED_INPUT_MESSAGE,
        lastUpdateMs: nowMs,
      };
    }
    default:
      return scene; // Kirby / Bridge_Reset traffic does not render
  }
}

/** Rebuild the whole display from bridge snapshot reads: the latest Map,
 *  Odom and Fiducials values plus recent retained feedback events. */
export function sceneFromSnapshots(
  map: MapPayload | null,
  odom: OdomPayload | null,
  fiducials: FiducialsPayload | null,
  feedback: Array<{ seq: number; payload: FeedbackPayload }>,
  nowMs = 0,
): SceneState {
  let scene = emptyScene();
  if (map !== null) {
    scene = applyUpdate(scene, "Map", 0, map, nowMs);
  }
  if (odom !== null) {
    scene = applyUpdate(scene, "Odom", 0, odom, nowMs);
  }
  if (fiducials !== null) {
    scene = applyUpdate(scene, "Fiducials", 0, fiducials, nowMs);
  }
  for (const event of feedback) {
    scene = applyUpdate(scene, "Kirby_Feedback", event.seq, event.payload, nowMs);
  }
  return scene;
}

export function withPointer(
  scene: SceneState,
  x: number,
  z: number,
  nowMs: number,
): SceneState {
  return { ...scene, pointer: { x, z, placedMs: nowMs } };
}
