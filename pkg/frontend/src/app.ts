// Browser bootstrap: websocket connection, toolbar, canvas events, render loop.

import { Editor, Mode, Outbound } from "./editor.js";
import { decode, encode } from "./protocol.js";
import { ViewTransform, drawScene } from "./view.js";

const PX_PER_CELL = 18;

function serverUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("server") ?? "127.0.0.1:8750";
  return `ws://${host}/ws`;
}

const raf: (cb: () => void) => void =
  typeof requestAnimationFrame === "function"
    ? (cb) => requestAnimationFrame(() => cb())
    : (cb) => setTimeout(cb, 16);

export function startApp(root: Document = document, server?: string): Editor {
  const canvas = root.getElementById("map") as HTMLCanvasElement;
  const status = root.getElementById("status")!;
  const dialog = root.getElementById("confirm-clear") as HTMLElement;

  let socket: WebSocket | null = null;
  let view: ViewTransform | null = null;

  const editor = new Editor({
    send(msg: Outbound) {
      if (socket && socket.readyState === WebSocket.OPEN) {
        socket.send(encode(msg));
      } else {
        status.textContent = "not connected; edit dropped";
      }
    },
    discardedStroke(reason: string) {
      status.textContent = reason;
    },
    serverError(code: string, message: string) {
      status.textContent = `server rejected edit: ${code} ${message}`;
    },
  });

  const url = server ?? serverUrl();

  function connect(): void {
    socket = new WebSocket(url);
    socket.onopen = () => {
      status.textContent = `connected to ${url}`;
    };
    socket.onmessage = (event: MessageEvent) => {
      editor.applyFrame(decode(String(event.data)));
      if (editor.map && (view === null || canvas.width !== editor.map.width * PX_PER_CELL)) {
        view = new ViewTransform(editor.map, PX_PER_CELL);
        canvas.width = view.canvasWidth;
        canvas.height = view.canvasHeight;
      }
      scheduleRender();
    };
    socket.onclose = () => {
      status.textContent = "disconnected; retrying";
      setTimeout(connect, 1000);
    };
  }

  let renderQueued = false;
  function scheduleRender(): void {
    if (renderQueued) return;
    renderQueued = true;
    raf(() => {
      renderQueued = false;
      let ctx: CanvasRenderingContext2D | null = null;
      try {
        ctx = canvas.getContext("2d");
      } catch {
        return; // headless DOM without canvas support
      }
      if (ctx && view) drawScene({ ctx, view }, editor);
    });
  }

  function screenPoint(event: PointerEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return [event.clientX - rect.left, event.clientY - rect.top];
  }

  canvas.addEventListener("pointerdown", (e) => {
    if (!view) return;
    const s = screenPoint(e);
    editor.pointerDown(view.screenToWorld(s), s);
    scheduleRender();
  });
  canvas.addEventListener("pointermove", (e) => {
    if (!view) return;
    const s = screenPoint(e);
    editor.pointerMove(view.screenToWorld(s), s);
    scheduleRender();
  });
  canvas.addEventListener("pointerup", (e) => {
    if (!view) return;
    editor.pointerUp(view.screenToWorld(screenPoint(e)));
    scheduleRender();
  });

  for (const mode of ["off", "add", "delete", "clear"] as Mode[]) {
    root.getElementById(`mode-${mode}`)!.addEventListener("click", () => {
      editor.setMode(mode);
      dialog.style.display = editor.clearDialogOpen ? "block" : "none";
      status.textContent = `mode: ${editor.mode}`;
      scheduleRender();
    });
  }
  root.getElementById("clear-yes")!.addEventListener("click", () => {
    editor.clearYes();
    dialog.style.display = "none";
    status.textContent = "cleared all zones";
    scheduleRender();
  });
  root.getElementById("clear-no")!.addEventListener("click", () => {
    editor.clearNo();
    dialog.style.display = "none";
    status.textContent = "clear cancelled";
    scheduleRender();
  });

  connect();
  return editor;
}

declare global {
  interface Window {
    zonemapEditor?: Editor;
  }
}
