// Console bootstrap: scenario selection, session lifecycle, pointer steering.

import { headingToward, parseEnd, parseFrame, steerLine } from "./protocol.js";
import {
  buildScene,
  fitCamera,
  toWorld,
  type BoundaryDoc,
  type Camera,
  type ViewState,
} from "./scene.js";
import { render } from "./render.js";

const SEND_INTERVAL_MS = 33; // steer cadence cap; the server holds between updates

interface Connection {
  sessionId: string;
  ws: WebSocket;
}

class Console {
  view: ViewState = {
    boundary: null,
    frame: null,
    end: null,
    pointerHeading: null,
    cursor: null,
    connected: false,
  };
  cam: Camera | null = null;
  conn: Connection | null = null;
  lastSend = 0;
  pointer: [number, number] | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private banner: HTMLElement,
  ) {
    canvas.addEventListener("pointermove", (ev) => this.onPointer(ev));
    const loop = () => {
      this.draw();
      requestAnimationFrame(loop);
    };
    requestAnimationFrame(loop);
  }

  async start(scenarioName: string): Promise<void> {
    const scenario = await (await fetch(`/scenarios/${scenarioName}`)).json();
    const created = await (
      await fetch("/sessions", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(scenario),
      })
    ).json();
    const sessionId: string = created.session_id;
    const boundary: BoundaryDoc = await (
      await fetch(`/sessions/${sessionId}/boundary`)
    ).json();
    this.view = {
      boundary,
      frame: null,
      end: null,
      pointerHeading: null,
      cursor: null,
      connected: false,
    };
    this.cam = fitCamera(boundary, this.canvas.width, this.canvas.height);
    this.connect(sessionId);
  }

  connect(sessionId: string): void {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    const ws = new WebSocket(`${proto}://${location.host}/sessions/${sessionId}/stream`);
    this.conn = { sessionId, ws };
    ws.onopen = () => {
      this.view.connected = true;
      this.banner.textContent = "";
    };
    ws.onmessage = (ev) => this.onMessage(String(ev.data));
    ws.onclose = () => {
      this.view.connected = false;
      if (!this.view.end) {
        this.banner.textContent = "connection lost, reconnecting...";
        setTimeout(() => this.connect(sessionId), 750); // same session id
      }
    };
    ws.onerror = () => ws.close();
  }

  onMessage(line: string): void {
    const frame = parseFrame(line);
    if (frame) {
      this.view.frame = frame; // malformed frames are dropped by the parser
      return;
    }
    const end = parseEnd(line);
    if (end) {
      this.view.end = end;
      return;
    }
    console.warn("dropped malformed message:", line);
  }

  onPointer(ev: PointerEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    this.pointer = [ev.clientX - rect.left, ev.clientY - rect.top];
    this.maybeSteer();
  }

  maybeSteer(): void {
    if (!this.conn || this.conn.ws.readyState !== WebSocket.OPEN) return;
    if (this.view.end || !this.view.frame || !this.cam || !this.pointer) return;
    const now = performance.now();
    if (now - this.lastSend < SEND_INTERVAL_MS) return;
    const cursor = toWorld(this.cam, this.pointer);
    const heading = headingToward(this.view.frame.xe, cursor);
    if (!heading) return; // pointer on the evader: keep the held heading
    this.view.pointerHeading = heading;
    this.view.cursor = cursor;
    this.conn.ws.send(steerLine(this.conn.sessionId, heading, now, cursor));
    this.lastSend = now;
  }

  draw(): void {
    if (!this.cam) return;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    render(ctx, buildScene(this.view, this.cam));
  }
}

async function boot(): Promise<void> {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const banner = document.getElementById("banner") as HTMLElement;
  const select = document.getElementById("scenario") as HTMLSelectElement;
  const button = document.getElementById("start") as HTMLButtonElement;
  const names: string[] = await (await fetch("/scenarios")).json();
  for (const name of names) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.appendChild(opt);
  }
  const ui = new Console(canvas, banner);
  button.onclick = () => void ui.start(select.value);
}

void boot();
