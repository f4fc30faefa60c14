// Wire protocol: one JSON object per frame with a "type" discriminator.
// Mirrors the service schema exactly; a remove with id 0 clears all zones.
// Map cell payloads are base64, one byte per cell row-major:
// 0 free, 100 occupied, 255 unknown.

export const CLEAR_ID = 0;

export const FREE = 0;
export const OCCUPIED = 100;
export const UNKNOWN = 255;

export interface AddZoneMsg {
  type: "add";
  id: number;
  vertices: [number, number][];
}

export interface RemoveZoneMsg {
  type: "remove";
  id: number;
}

export interface MapStateMsg {
  type: "map";
  width: number;
  height: number;
  resolution: number;
  origin: [number, number, number];
  cells: Uint8Array;
  seq: number;
}

export interface RobotStateMsg {
  type: "robot";
  pose: [number, number, number];
  path: [number, number][];
  seq: number;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export type WireMessage = AddZoneMsg | RemoveZoneMsg | MapStateMsg | RobotStateMsg | ErrorMsg;

export class ProtocolError extends Error {}

function b64encode(bytes: Uint8Array): string {
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  // btoa exists in browsers; Buffer in node test runs
  if (typeof btoa === "function") return btoa(binary);
  return Buffer.from(bytes).toString("base64");
}

function b64decode(text: string): Uint8Array {
  if (!/^[A-Za-z0-9+/]*={0,2}$/.test(text)) throw new ProtocolError("invalid base64 cells");
  if (typeof atob === "function") {
    const binary = atob(text);
    const out = new Uint8Array(binary.length);
    for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
    return out;
  }
  return new Uint8Array(Buffer.from(text, "base64"));
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isInt(v: unknown): v is number {
  return isFiniteNumber(v) && Number.isInteger(v);
}

function pointList(raw: unknown, field: string): [number, number][] {
  if (!Array.isArray(raw)) throw new ProtocolError(`${field} must be a list of [x, y] pairs`);
  return raw.map((item) => {
    if (!Array.isArray(item) || item.length !== 2 || !isFiniteNumber(item[0]) || !isFiniteNumber(item[1])) {
      throw new ProtocolError(`${field} must be a list of [x, y] pairs`);
    }
    return [item[0], item[1]];
  });
}

export function encode(msg: WireMessage): string {
  // Canonical form: keys in sorted order, compact separators, matching the
  // service's encoder byte for byte on shared fixtures.
  switch (msg.type) {
    case "add":
      return JSON.stringify({ id: msg.id, type: "add", vertices: msg.vertices });
    case "remove":
      return JSON.stringify({ id: msg.id, type: "remove" });
    case "map":
      return JSON.stringify({
        cells: b64encode(msg.cells),
        height: msg.height,
        origin: msg.origin,
        resolution: msg.resolution,
        seq: msg.seq,
        type: "map",
        width: msg.width,
      });
    case "robot":
      return JSON.stringify({ path: msg.path, pose: msg.pose, seq: msg.seq, type: "robot" });
    case "error":
      return JSON.stringify({ code: msg.code, message: msg.message, type: "error" });
  }
}

export function validateOutbound(msg: AddZoneMsg | RemoveZoneMsg): void {
  if (msg.type === "add") {
    if (!isInt(msg.id) || msg.id < 1) throw new ProtocolError(`add id must be an integer >= 1, got ${msg.id}`);
    if (msg.vertices.length < 3) throw new ProtocolError(`add needs >= 3 vertices, got ${msg.vertices.length}`);
    for (const [x, y] of msg.vertices) {
      if (!isFiniteNumber(x) || !isFiniteNumber(y)) throw new ProtocolError("non-finite vertex");
    }
  } else {
    if (!isInt(msg.id) || msg.id < 0) throw new ProtocolError(`remove id must be an integer >= 0, got ${msg.id}`);
  }
}

export function decode(frame: string): WireMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(frame);
  } catch (exc) {
    throw new ProtocolError(`frame is not valid JSON: ${exc}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("frame must be a JSON object");
  }
  const o = obj as Record<string, unknown>;
  switch (o.type) {
    case "add": {
      if (!isInt(o.id) || o.id < 1) throw new ProtocolError(`add id must be >= 1`);
      const vertices = pointList(o.vertices, "vertices");
      if (vertices.length < 3) throw new ProtocolError("add needs >= 3 vertices");
      return { type: "add", id: o.id, vertices };
    }
    case "remove": {
      if (!isInt(o.id) || o.id < 0) throw new ProtocolError("remove id must be >= 0");
      return { type: "remove", id: o.id };
    }
    case "map": {
      if (!isInt(o.width) || !isInt(o.height) || o.width < 1 || o.height < 1) {
        throw new ProtocolError("bad map dimensions");
      }
      if (!isFiniteNumber(o.resolution) || o.resolution <= 0) throw new ProtocolError("bad map resolution");
      if (!Array.isArray(o.origin) || o.origin.length !== 3 || !o.origin.every(isFiniteNumber)) {
        throw new ProtocolError("map origin must be [x, y, theta]");
      }
      if (typeof o.cells !== "string") throw new ProtocolError("map cells must be a base64 string");
      const cells = b64decode(o.cells);
      if (cells.length !== o.width * o.height) throw new ProtocolError("map cell count mismatch");
      const seq = o.seq === undefined ? 0 : o.seq;
      if (!isInt(seq)) throw new ProtocolError("seq must be an integer");
      return {
        type: "map",
        width: o.width,
        height: o.height,
        resolution: o.resolution,
        origin: o.origin as [number, number, number],
        cells,
        seq,
      };
    }
    case "robot": {
      if (!Array.isArray(o.pose) || o.pose.length !== 3 || !o.pose.every(isFiniteNumber)) {
        throw new ProtocolError("robot pose must be [x, y, theta]");
      }
      const path = o.path === undefined ? [] : pointList(o.path, "path");
      const seq = o.seq === undefined ? 0 : o.seq;
      if (!isInt(seq)) throw new ProtocolError("seq must be an integer");
      return { type: "robot", pose: o.pose as [number, number, number], path, seq };
    }
    case "error": {
      if (typeof o.code !== "string" || !o.code) throw new ProtocolError("error code must be a non-empty string");
      const message = o.message === undefined ? "" : o.message;
      if (typeof message !== "string") throw new ProtocolError("error message must be a string");
      return { type: "error", code: o.code, message };
    }
    default:
      throw new ProtocolError(`unknown message type ${JSON.stringify(o.type)}`);
  }
}
