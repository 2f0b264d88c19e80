/** Browser entry point: wires the bridge socket, scene state and canvases
 *  to the DOM. Logic lives in the imported modules; this file is glue. */

import { Viewport, egoToWorld, omniToWorld, panned, zoomed } from "./camera.js";
import { Push, ViewName, isUpdate } from "./protocol.js";
import { renderView } from "./render.js";
import {
  SceneState,
  applyUpdate,
  emptyScene,
  sceneFromSnapshots,
  withPointer,
} from "./scene.js";
import { BridgeSocket, SocketLike } from "./wsclient.js";
import { ViewAction, ViewState, applyViewAction, initialViewState } from "./viewstate.js";

const params = new URLSearchParams(window.location.search);
const WS_URL = params.get("ws") ?? "ws://127.0.0.1:7781";

let scene: SceneState = emptyScene();
let view: ViewState = initialViewState();

const mainCanvas = document.getElementById("main-view") as HTMLCanvasElement;
const insetCanvas = document.getElementById("inset-view") as HTMLCanvasElement;
const tickerList = document.getElementById("ticker") as HTMLUListElement;
const commandInput = document.getElementById("command") as HTMLInputElement;
const commandForm = document.getElementById("command-form") as HTMLFormElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const choiceBox = document.getElementById("choice") as HTMLDivElement;
const statusBadge = document.getElementById("status") as HTMLSpanElement;

const socket = new BridgeSocket(
  () => new WebSocket(WS_URL) as unknown as SocketLike,
);

let renderedTickerSeq = 0;

function showBanner(text: string): void {
  banner.textContent = text;
  banner.style.display = text === "" ? "none" : "block";
}

function syncTicker(): void {
  for (const entry of scene.ticker) {
    if (entry.seq <= renderedTickerSeq) {
      continue;
    }
    const item = document.createElement("li");
    item.textContent = `[${entry.ts}] ${entry.message}`;
    tickerList.appendChild(item);
    renderedTickerSeq = entry.seq;
  }
  tickerList.scrollTop = tickerList.scrollHeight;
  choiceBox.style.display = scene.choicePending ? "block" : "none";
}

function onPush(push: Push): void {
  if (isUpdate(push)) {
    scene = applyUpdate(scene, push.key, push.seq, push.payload, Date.now());
    syncTicker();
  } else if (push.event === "reset") {
    scene = emptyScene();
    tickerList.replaceChildren();
    renderedTickerSeq = 0;
  }
}

async function connectLoop(): Promise<void> {
  for (;;) {
    try {
      await socket.connect();
      statusBadge.textContent = "connected";
      await socket.subscribeAll();
      const snap = await socket.snapshot();
      scene = sceneFromSnapshots(
        snap.map, snap.odom, snap.fiducials, snap.feedback, Date.now(),
      );
      tickerList.replaceChildren();
      renderedTickerSeq = 0;
      syncTicker();
      showBanner("");
      await new Promise<void>((resolve) => {
        socket.onClose = () => resolve();
      });
    } catch {
      // fall through to the retry delay below
    }
    statusBadge.textContent = "disconnected";
    showBanner(`bridge unreachable at ${WS_URL}; retrying`);
    await new Promise((r) => setTimeout(r, 1000));
  }
}

socket.onPush = onPush;

function viewport(canvas: HTMLCanvasElement): Viewport {
  return { width: canvas.width, height: canvas.height };
}

function clickToDisplay(
  canvas: HTMLCanvasElement,
  which: ViewName,
  ev: MouseEvent,
): { x: number; z: number } | null {
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  if (px < 0 || py < 0 || px > canvas.width || py > canvas.height) {
    return null;
  }
  if (which === "perspective") {
    if (scene.odom === null) {
      return null;
    }
    return egoToWorld(scene.odom, viewport(canvas), view.egoZoom, px, py);
  }
  return omniToWorld(view.omni, viewport(canvas), px, py);
}

function handleClick(canvas: HTMLCanvasElement, role: "main" | "inset") {
  return (ev: MouseEvent) => {
    const which: ViewName =
      role === "main"
        ? view.main
        : view.main === "omniscient" ? "perspective" : "omniscient";
    const point = clickToDisplay(canvas, which, ev);
    if (point === null) {
      return;
    }
    scene = withPointer(scene, point.x, point.z, Date.now());
    socket.sendPointer(point.x, point.z, which).catch((err) => {
      showBanner(`pointer not delivered: ${err.message}`);
    });
  };
}

mainCanvas.addEventListener("click", handleClick(mainCanvas, "main"));
insetCanvas.addEventListener("click", handleClick(insetCanvas, "inset"));

mainCanvas.addEventListener("wheel", (ev) => {
  if (view.main !== "omniscient") {
    return;
  }
  ev.preventDefault();
  view = { ...view, omni: zoomed(view.omni, ev.deltaY < 0 ? 1.15 : 1 / 1.15) };
});

let dragging: { px: number; py: number } | null = null;
mainCanvas.addEventListener("mousedown", (ev) => {
  dragging = { px: ev.clientX, py: ev.clientY };
});
window.addEventListener("mouseup", () => {
  dragging = null;
});
window.addEventListener("mousemove", (ev) => {
  if (dragging === null || view.main !== "omniscient") {
    return;
  }
  const dx = ev.clientX - dragging.px;
  const dy = ev.clientY - dragging.py;
  if (Math.hypot(dx, dy) < 3) {
    return; // keep small jitters from eating clicks
  }
  view = { ...view, omni: panned(view.omni, dx, dy) };
  dragging = { px: ev.clientX, py: ev.clientY };
});

commandForm.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const text = commandInput.value.trim();
  if (text === "") {
    return;
  }
  socket.sendUtterance(text).then(
    () => {
      const item = document.createElement("li");
      item.textContent = `> ${text}`;
      item.className = "echo";
      tickerList.appendChild(item);
      commandInput.value = "";
    },
    (err) => showBanner(`command not delivered: ${err.message}`),
  );
});

for (const action of [
  "switch_left", "switch_right", "rotate_left", "rotate_right", "rotate_back",
] as ViewAction[]) {
  document.getElementById(`btn-${action}`)?.addEventListener("click", () => {
    view = applyViewAction(view, action, scene.odom);
  });
}

for (const choice of ["keep_going", "go_back"] as const) {
  document.getElementById(`choice-${choice}`)?.addEventListener("click", () => {
    socket.sendChoice(choice).catch((err) => {
      showBanner(`choice not delivered: ${err.message}`);
    });
  });
}

function frame(): void {
  const inset: ViewName =
    view.main === "omniscient" ? "perspective" : "omniscient";
  const now = Date.now();
  renderView(
    mainCanvas.getContext("2d")!, view.main, view, scene,
    viewport(mainCanvas), now,
  );
  renderView(
    insetCanvas.getContext("2d")!, inset, view, scene,
    viewport(insetCanvas), now,
  );
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
void connectLoop();
