/** Canvas drawing for document pages and their overlays.
 *
 * Pages arrive as structured content (text boxes plus ruling segments)
 * and are redrawn client-side; the server stays the authority on all
 * coordinates and the client never invents geometry.
 */

import type { Box, GeoPointWire, GridWire, PageContent } from "./types.js";
import type { ViewportTransform } from "./viewport.js";

export function drawPage(ctx: CanvasRenderingContext2D, page: PageContent,
                         vt: ViewportTransform): void {
  const tl = vt.toScreen({ x: 0, y: page.height_pt });
  const br = vt.toScreen({ x: page.width_pt, y: 0 });
  ctx.fillStyle = "#ffffff";
  ctx.fillRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);
  ctx.strokeStyle = "#c8c8c8";
  ctx.strokeRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);

  ctx.strokeStyle = "#444444";
  ctx.lineWidth = 1;
  for (const [x0, y0, x1, y1] of page.ruling_segments) {
    const a = vt.toScreen({ x: x0, y: y0 });
    const b = vt.toScreen({ x: x1, y: y1 });
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }

  ctx.fillStyle = "#1a1a1a";
  for (const box of page.text_boxes) {
    const [x0, y0] = box.bbox;
    const at = vt.toScreen({ x: x0, y: y0 });
    ctx.font = `${box.font_size_pt * vt.zoom}px serif`;
    ctx.textBaseline = "alphabetic";
    ctx.fillText(box.text, at.x, at.y);
  }
}

export function drawBox(ctx: CanvasRenderingContext2D, vt: ViewportTransform,
                        bbox: Box, color: string, width = 1.5): void {
  const [x0, y0, x1, y1] = bbox;
  const tl = vt.toScreen({ x: x0, y: y1 });
  const br = vt.toScreen({ x: x1, y: y0 });
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.strokeRect(tl.x, tl.y, br.x - tl.x, br.y - tl.y);
}

export function drawGrid(ctx: CanvasRenderingContext2D, vt: ViewportTransform,
                         grid: GridWire): void {
  const [x0, , x1] = [grid.col_bounds[0], 0,
                      grid.col_bounds[grid.col_bounds.length - 1]];
  const yLo = grid.row_bounds[0];
  const yHi = grid.row_bounds[grid.row_bounds.length - 1];
  ctx.strokeStyle = "#2266cc";
  ctx.lineWidth = 1;
  for (const y of grid.row_bounds) {
    const a = vt.toScreen({ x: x0, y });
    const b = vt.toScreen({ x: x1, y });
    ctx.beginPath(); ctx.moveTo(a.x, a.y); ctx.lineTo(b.x, b.y); ctx.stroke();
  }
  for (const x of grid.col_bounds) {
    const a = vt.toScreen({ x, y: yLo });
    const b = vt.toScreen({ x, y: yHi });
    ctx.beginPath(); ctx.moveTo(a.x, a.y); ctx.lineTo(b.x, b.y); ctx.stroke();
  }
}

/** Screen rectangle of one base cell; row/col are visual (row 0 top). */
export function cellRect(grid: GridWire, vt: ViewportTransform,
                         row: number, col: number):
    { x: number; y: number; w: number; h: number } {
  const rows = grid.row_bounds.length - 1;
  // row_bounds grow upward, visual rows count downward
  const yTop = grid.row_bounds[rows - row];
  const yBot = grid.row_bounds[rows - row - 1];
  const xL = grid.col_bounds[col];
  const xR = grid.col_bounds[col + 1];
  const tl = vt.toScreen({ x: xL, y: yTop });
  const br = vt.toScreen({ x: xR, y: yBot });
  return { x: tl.x, y: tl.y, w: br.x - tl.x, h: br.y - tl.y };
}

/** Visual cell under a page point, or null when outside the grid. */
export function cellAtPoint(grid: GridWire, x: number,
                            y: number): { row: number; col: number } | null {
  const rb = grid.row_bounds;
  const cb = grid.col_bounds;
  if (x < cb[0] || x > cb[cb.length - 1]) return null;
  if (y < rb[0] || y > rb[rb.length - 1]) return null;
  let col = cb.length - 2;
  for (let i = 0; i < cb.length - 1; i++) {
    if (x < cb[i + 1]) { col = i; break; }
  }
  let up = rb.length - 2;
  for (let i = 0; i < rb.length - 1; i++) {
    if (y < rb[i + 1]) { up = i; break; }
  }
  return { row: rb.length - 2 - up, col };
}

export function drawPoints(ctx: CanvasRenderingContext2D,
                           vt: ViewportTransform,
                           points: { pixel: [number, number];
                                     pending?: boolean }[]): void {
  for (const p of points) {
    const at = vt.toScreen({ x: p.pixel[0], y: p.pixel[1] });
    ctx.beginPath();
    ctx.arc(at.x, at.y, 4, 0, Math.PI * 2);
    ctx.fillStyle = p.pending ? "#cc995588" : "#cc3322";
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1;
    ctx.stroke();
  }
}

type Attrs = Record<string, string | boolean | ((ev: Event) => void)>;
type Child = Node | string;

/** Tiny element builder; attribute values that are functions become
 * listeners for the attribute name ("onclick" style, minus the "on"). */
export function el<K extends keyof HTMLElementTagNameMap>(
    doc: Document, tag: K, attrs: Attrs = {},
    children: Child[] = []): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else if (typeof value === "boolean") {
      if (key === "disabled" || key === "checked") {
        (node as unknown as { disabled?: boolean;
                              checked?: boolean })[key] = value;
      } else if (value) {
        node.setAttribute(key, "");
      }
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(typeof child === "string" ? doc.createTextNode(child) : child);
  }
  return node;
}
