// Rendering: map/world/screen transforms and pure pixel shading.
// shadeCells is the testable core; drawScene blits it plus overlays.

import { FREE, MapStateMsg, OCCUPIED } from "./protocol.js";
import { Editor } from "./editor.js";

// RGBA per cell class
export const FREE_COLOR: [number, number, number, number] = [235, 235, 235, 255];
export const OCCUPIED_COLOR: [number, number, number, number] = [40, 40, 48, 255];
export const UNKNOWN_COLOR: [number, number, number, number] = [160, 160, 160, 255];

export function shadeCells(map: MapStateMsg): Uint8ClampedArray<ArrayBuffer> {
  // one pixel per cell, canvas row 0 at the TOP of the map (highest grid row)
  const { width, height, cells } = map;
  const out = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
  for (let row = 0; row < height; row++) {
    const canvasRow = height - 1 - row;
    for (let col = 0; col < width; col++) {
      const v = cells[row * width + col]!;
      const color = v === OCCUPIED ? OCCUPIED_COLOR : v === FREE ? FREE_COLOR : UNKNOWN_COLOR;
      const at = (canvasRow * width + col) * 4;
      out[at] = color[0];
      out[at + 1] = color[1];
      out[at + 2] = color[2];
      out[at + 3] = color[3];
    }
  }
  return out;
}

export class ViewTransform {
  // scale: screen px per map meter; the grid is drawn axis-aligned in its own
  // frame, so world points go through the inverse origin pose first.
  constructor(
    private map: Pick<MapStateMsg, "width" | "height" | "resolution" | "origin">,
    private pxPerCell: number,
  ) {}

  get canvasWidth(): number {
    return this.map.width * this.pxPerCell;
  }

  get canvasHeight(): number {
    return this.map.height * this.pxPerCell;
  }

  worldToScreen(p: [number, number]): [number, number] {
    const [ox, oy, oth] = this.map.origin;
    const dx = p[0] - ox;
    const dy = p[1] - oy;
    const cos = Math.cos(oth);
    const sin = Math.sin(oth);
    const col = (cos * dx + sin * dy) / this.map.resolution;
    const row = (-sin * dx + cos * dy) / this.map.resolution;
    return [(col + 0.5) * this.pxPerCell, (this.map.height - 1 - row + 0.5) * this.pxPerCell];
  }

  screenToWorld(p: [number, number]): [number, number] {
    const col = p[0] / this.pxPerCell - 0.5;
    const row = this.map.height - 1 - (p[1] / this.pxPerCell - 0.5);
    const lx = col * this.map.resolution;
    const ly = row * this.map.resolution;
    const [ox, oy, oth] = this.map.origin;
    const cos = Math.cos(oth);
    const sin = Math.sin(oth);
    return [ox + cos * lx - sin * ly, oy + sin * lx + cos * ly];
  }
}

export interface SceneContext {
  ctx: CanvasRenderingContext2D;
  view: ViewTransform;
}

export function drawScene(scene: SceneContext, editor: Editor): void {
  const { ctx, view } = scene;
  const map = editor.map;
  ctx.clearRect(0, 0, view.canvasWidth, view.canvasHeight);
  if (!map) return;

  // cells, one canvas pixel per cell scaled up without smoothing
  const shades = shadeCells(map);
  const image = new ImageData(shades, map.width, map.height);
  const off = offscreen(map.width, map.height);
  off.getContext("2d")!.putImageData(image, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, view.canvasWidth, view.canvasHeight);

  // zones: translucent green; selection red; provisional dashed
  for (const zone of editor.zoneList()) {
    const selected = editor.selection === zone.id;
    ctx.beginPath();
    zone.vertices.forEach((v, i) => {
      const [sx, sy] = view.worldToScreen(v);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.closePath();
    ctx.fillStyle = selected ? "rgba(220, 60, 60, 0.45)" : "rgba(60, 180, 90, 0.35)";
    ctx.strokeStyle = selected ? "rgb(200, 40, 40)" : "rgb(40, 140, 70)";
    ctx.setLineDash(zone.pending ? [6, 4] : []);
    ctx.fill("evenodd");
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // in-progress stroke
  if (editor.stroke && editor.stroke.length > 1) {
    ctx.beginPath();
    editor.stroke.forEach((v, i) => {
      const [sx, sy] = view.worldToScreen(v);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    ctx.strokeStyle = "rgb(40, 140, 70)";
    ctx.stroke();
  }

  // planned path + robot marker
  const robot = editor.robot;
  if (robot) {
    if (robot.path.length > 1) {
      ctx.beginPath();
      robot.path.forEach((v, i) => {
        const [sx, sy] = view.worldToScreen(v);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.strokeStyle = "rgb(50, 110, 220)";
      ctx.lineWidth = 2;
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    const [rx, ry] = view.worldToScreen([robot.pose[0], robot.pose[1]]);
    ctx.beginPath();
    ctx.arc(rx, ry, 5, 0, 2 * Math.PI);
    ctx.fillStyle = "rgb(50, 110, 220)";
    ctx.fill();
    // short heading tick: project a point ahead of the pose into screen space
    const [hx, hy] = view.worldToScreen([
      robot.pose[0] + 0.08 * Math.cos(robot.pose[2]),
      robot.pose[1] + 0.08 * Math.sin(robot.pose[2]),
    ]);
    ctx.beginPath();
    ctx.moveTo(rx, ry);
    ctx.lineTo(hx, hy);
    ctx.strokeStyle = "rgb(50, 110, 220)";
    ctx.stroke();
  }
}

function offscreen(width: number, height: number): HTMLCanvasElement | OffscreenCanvas {
  if (typeof OffscreenCanvas !== "undefined") return new OffscreenCanvas(width, height) as unknown as OffscreenCanvas;
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  return canvas;
}
