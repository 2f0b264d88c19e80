/** Thin request/response layer over one bridge WebSocket.
 *
 *  The bridge answers requests strictly in order on a connection, so
 *  pending promises resolve FIFO; anything carrying an "event" field is a
 *  subscription push and goes to the push handler instead. */

import {
  CHANNEL_KEYS,
  ChannelKey,
  FeedbackPayload,
  FiducialsPayload,
  MapPayload,
  OdomPayload,
  Push,
  Request,
  Response,
  ViewName,
  decodeMessage,
  encodeRequest,
  isPush,
  pointerWrite,
  userChoiceWrite,
  utteranceWrite,
} from "./protocol.js";

/** The slice of the WebSocket API the client needs; tests supply fakes. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export class BridgeRequestError extends Error {}

export interface Snapshot {
  map: MapPayload | null;
  odom: OdomPayload | null;
  fiducials: FiducialsPayload | null;
  feedback: Array<{ seq: number; payload: FeedbackPayload }>;
}

export class BridgeSocket {
  private socket: SocketLike | null = null;
  private pending: Array<{
    resolve: (r: Response) => void;
    reject: (e: Error) => void;
  }> = [];

  onPush: (push: Push) => void = () => undefined;
  onClose: () => void = () => undefined;

  constructor(private readonly makeSocket: () => SocketLike) {}

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      const socket = this.makeSocket();
      this.socket = socket;
      socket.onopen = () => resolve();
      socket.onerror = () => reject(new Error("bridge connection failed"));
      socket.onmessage = (ev) => this.dispatch(ev.data);
      socket.onclose = () => {
        const waiting = this.pending;
        this.pending = [];
        this.socket = null;
        for (const p of waiting) {
          p.reject(new BridgeRequestError("connection closed"));
        }
        this.onClose();
      };
    });
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  close(): void {
    this.socket?.close();
  }

  private dispatch(raw: string): void {
    const msg = decodeMessage(raw);
    if (isPush(msg)) {
      this.onPush(msg);
      return;
    }
    const waiter = this.pending.shift();
    if (waiter !== undefined) {
      waiter.resolve(msg);
    }
  }

  request(req: Request): Promise<Response> {
    const socket = this.socket;
    if (socket === null) {
      return Promise.reject(new BridgeRequestError("not connected"));
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      socket.send(encodeRequest(req));
    }).then((resp) => {
      const r = resp as Response;
      if (!r.ok) {
        throw new BridgeRequestError(r.error ?? "request failed");
      }
      return r;
    });
  }

  async subscribeAll(): Promise<void> {
    for (const key of CHANNEL_KEYS) {
      await this.request({ op: "subscribe", key });
    }
  }

  async getValue<T>(key: ChannelKey): Promise<T | null> {
    const resp = await this.request({ op: "get", key });
    return (resp.payload ?? null) as T | null;
  }

  /** Everything needed to rebuild the display after (re)connecting. */
  async snapshot(feedbackDepth = 100): Promise<Snapshot> {
    const map = await this.getValue<MapPayload>("Map");
    const odom = await this.getValue<OdomPayload>("Odom");
    const fiducials = await this.getValue<FiducialsPayload>("Fiducials");
    const resp = await this.request({
      op: "get",
      key: "Kirby_Feedback",
      count: feedbackDepth,
    });
    const feedback = (resp.payload ?? []) as Array<{
      seq: number;
      payload: FeedbackPayload;
    }>;
    return { map, odom, fiducials, feedback };
  }

  sendUtterance(text: string): Promise<Response> {
    return this.request(utteranceWrite(text));
  }

  sendPointer(x: number, z: number, view: ViewName): Promise<Response> {
    return this.request(pointerWrite(x, z, view));
  }

  sendChoice(choice: "keep_going" | "go_back"): Promise<Response> {
    return this.request(userChoiceWrite(choice));
  }
}
