// Editing state machine: modes, stroke sampling, zone bookkeeping, and the
// outbound messages they produce. Deliberately DOM-free so it can be tested
// headlessly; the app layer feeds it pointer events and server frames.
//
// The map cells shown on screen are never mutated locally: they always come
// from the latest (non-stale) map broadcast. Zone polygons live client-side,
// newly drawn ones as provisional previews until a newer map frame arrives.

import {
  AddZoneMsg,
  CLEAR_ID,
  MapStateMsg,
  RemoveZoneMsg,
  RobotStateMsg,
  WireMessage,
  validateOutbound,
} from "./protocol.js";

export type Mode = "off" | "add" | "delete" | "clear";

export interface LocalZone {
  id: number;
  vertices: [number, number][]; // map-frame meters
  pending: boolean; // drawn locally, not yet confirmed by a map frame
}

export type Outbound = AddZoneMsg | RemoveZoneMsg;

export interface EditorEvents {
  send(msg: Outbound): void;
  discardedStroke?(reason: string): void;
  serverError?(code: string, message: string): void;
}

export function pointInPolygon(p: [number, number], vertices: [number, number][]): boolean {
  // even-odd; points exactly on an edge count as inside
  const [px, py] = p;
  let inside = false;
  const n = vertices.length;
  for (let i = 0; i < n; i++) {
    const [x0, y0] = vertices[i]!;
    const [x1, y1] = vertices[(i + 1) % n]!;
    const cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0);
    if (
      cross === 0 &&
      px >= Math.min(x0, x1) &&
      px <= Math.max(x0, x1) &&
      py >= Math.min(y0, y1) &&
      py <= Math.max(y0, y1)
    ) {
      return true;
    }
    if (y0 <= py !== y1 <= py) {
      const xCross = x0 + ((py - y0) * (x1 - x0)) / (y1 - y0);
      if (px < xCross) inside = !inside;
    }
  }
  return inside;
}

export class Editor {
  mode: Mode = "off";
  zones = new Map<number, LocalZone>();
  selection: number | null = null;
  stroke: [number, number][] | null = null;
  map: MapStateMsg | null = null;
  robot: RobotStateMsg | null = null;
  lastError: { code: string; message: string } | null = null;

  private lastMapSeq = -1;
  private lastRobotSeq = -1;
  private lastSampleScreen: [number, number] | null = null;

  constructor(
    private events: EditorEvents,
    private minSamplePx = 4,
  ) {}

  // -- mode machine -------------------------------------------------------

  setMode(mode: Mode): void {
    this.stroke = null;
    this.lastSampleScreen = null;
    this.selection = null;
    this.mode = mode;
  }

  get clearDialogOpen(): boolean {
    return this.mode === "clear";
  }

  clearYes(): void {
    if (this.mode !== "clear") return;
    this.send({ type: "remove", id: CLEAR_ID });
    this.zones.clear();
    this.selection = null;
    this.mode = "off";
  }

  clearNo(): void {
    if (this.mode !== "clear") return;
    this.mode = "off";
  }

  // -- pointer input (map-frame meters + raw screen px) --------------------

  pointerDown(mapPt: [number, number], screenPt: [number, number]): void {
    if (this.mode === "add") {
      this.stroke = [mapPt];
      this.lastSampleScreen = screenPt;
    } else if (this.mode === "delete") {
      this.selection = this.hitTest(mapPt);
    }
  }

  pointerMove(mapPt: [number, number], screenPt: [number, number]): void {
    if (this.mode !== "add" || this.stroke === null || this.lastSampleScreen === null) return;
    const [lx, ly] = this.lastSampleScreen;
    const dist = Math.hypot(screenPt[0] - lx, screenPt[1] - ly);
    if (dist >= this.minSamplePx) {
      this.stroke.push(mapPt);
      this.lastSampleScreen = screenPt;
    }
  }

  pointerUp(_mapPt: [number, number]): void {
    if (this.mode === "add") {
      const stroke = this.stroke ?? [];
      this.stroke = null;
      this.lastSampleScreen = null;
      const vertices = dedupeConsecutive(stroke);
      if (vertices.length < 3) {
        this.events.discardedStroke?.("stroke needs at least 3 distinct vertices");
        return;
      }
      const id = this.allocateId();
      this.send({ type: "add", id, vertices });
      this.zones.set(id, { id, vertices, pending: true });
    } else if (this.mode === "delete" && this.selection !== null) {
      const id = this.selection;
      this.selection = null;
      this.send({ type: "remove", id });
      this.zones.delete(id);
    }
  }

  // -- server frames --------------------------------------------------------

  applyFrame(msg: WireMessage): void {
    switch (msg.type) {
      case "map":
        if (msg.seq < this.lastMapSeq) return; // stale frame
        this.lastMapSeq = msg.seq;
        this.map = msg;
        for (const zone of this.zones.values()) zone.pending = false;
        break;
      case "robot":
        if (msg.seq < this.lastRobotSeq) return;
        this.lastRobotSeq = msg.seq;
        this.robot = msg;
        break;
      case "error":
        this.lastError = { code: msg.code, message: msg.message };
        this.events.serverError?.(msg.code, msg.message);
        break;
      default:
        break; // clients ignore echoed edit messages
    }
  }

  // -- helpers --------------------------------------------------------------

  allocateId(): number {
    let maxId = 0;
    for (const id of this.zones.keys()) maxId = Math.max(maxId, id);
    return maxId + 1;
  }

  hitTest(mapPt: [number, number]): number | null {
    // topmost zone wins: highest id
    const ids = [...this.zones.keys()].sort((a, b) => b - a);
    for (const id of ids) {
      if (pointInPolygon(mapPt, this.zones.get(id)!.vertices)) return id;
    }
    return null;
  }

  zoneList(): LocalZone[] {
    return [...this.zones.values()].sort((a, b) => a.id - b.id);
  }

  private send(msg: Outbound): void {
    validateOutbound(msg); // every outbound message is schema-checked
    this.events.send(msg);
  }
}

function dedupeConsecutive(points: [number, number][]): [number, number][] {
  const out: [number, number][] = [];
  for (const p of points) {
    const last = out[out.length - 1];
    if (!last || last[0] !== p[0] || last[1] !== p[1]) out.push(p);
  }
  while (out.length > 1) {
    const first = out[0]!;
    const last = out[out.length - 1]!;
    if (first[0] === last[0] && first[1] === last[1]) out.pop();
    else break;
  }
  return out;
}
