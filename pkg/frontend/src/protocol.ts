/** Bridge wire protocol: request/response envelopes, subscription pushes
 *  and the per-channel payload shapes. One JSON document per WebSocket
 *  text message. */

export type ChannelKey =
  | "Map"
  | "Odom"
  | "Kirby"
  | "Fiducials"
  | "Kirby_Feedback"
  | "Bridge_Reset";

export const CHANNEL_KEYS: ChannelKey[] = [
  "Map", "Odom", "Kirby", "Fiducials", "Kirby_Feedback", "Bridge_Reset",
];

export interface WireSegment {
  a1: number;
  b1: number;
  a2: number;
  b2: number;
}

export interface MapPayload {
  segments: WireSegment[];
  version: number;
}

export interface OdomPayload {
  x: number;
  y: number;
  theta: number;
  v: number;
  omega: number;
}

export interface FiducialEntry {
  id: number;
  x: number;
  y: number;
  theta: number;
}

export interface FiducialsPayload {
  fiducials: FiducialEntry[];
}

export interface FeedbackPayload {
  code: string;
  message: string;
  x?: number;
  y?: number;
  ts: number;
}

export const NEED_INPUT_MESSAGE =
  "user input is required: keep going OR go back";

export type ViewName = "omniscient" | "perspective";

export interface Request {
  op: "set" | "get" | "subscribe" | "reset";
  key?: ChannelKey;
  payload?: unknown;
  count?: number;
  scope?: "all";
}

export interface Response {
  ok: boolean;
  seq?: number;
  payload?: unknown;
  error?: string;
}

export interface UpdatePush {
  event: "update";
  key: ChannelKey;
  seq: number;
  payload: unknown;
}

export interface ResetPush {
  event: "reset";
  scope: string;
}

export interface ErrorPush {
  event: "error";
  error: string;
}

export type Push = UpdatePush | ResetPush | ErrorPush;

export function isPush(msg: unknown): msg is Push {
  return typeof msg === "object" && msg !== null && "event" in msg;
}

export function isUpdate(push: Push): push is UpdatePush {
  return push.event === "update";
}

/** Command-channel writes the console can produce. */

export function utteranceWrite(text: string): Request {
  return { op: "set", key: "Kirby", payload: { cmd: "utterance", args: { text } } };
}

export function pointerWrite(x: number, z: number, view: ViewName): Request {
  return { op: "set", key: "Kirby", payload: { cmd: "pointer", args: { x, z, view } } };
}

export function userChoiceWrite(choice: "keep_going" | "go_back"): Request {
  return { op: "set", key: "Kirby", payload: { cmd: "user_choice", args: { choice } } };
}

export function encodeRequest(req: Request): string {
  return JSON.stringify(req);
}

export function decodeMessage(raw: string): Response | Push {
  return JSON.parse(raw) as Response | Push;
}
