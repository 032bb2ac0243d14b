/** Shared test scaffolding: a recording fetch stub and canned wire
 * payloads with exact binary-fraction calibrations so coordinate math
 * has no rounding slack.
 */

import type { FetchLike } from "../src/api.js";
import type { CalibrationWire, DocDetail, GridWire, Project,
              TableWire } from "../src/types.js";

export interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
}

export interface FakeRoute {
  method: string;
  path: string;
  status?: number;
  reply: unknown | ((body: unknown) => unknown);
}

export interface FakeServer {
  fetch: FetchLike;
  calls: RecordedCall[];
  routes: FakeRoute[];
}

/** Routes match on method plus exact path (query string included). */
export function fakeServer(routes: FakeRoute[]): FakeServer {
  const calls: RecordedCall[] = [];
  const live = { routes };
  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    let body: unknown = undefined;
    if (typeof init?.body === "string") body = JSON.parse(init.body);
    calls.push({ method, url, body });
    const hit = live.routes.find(r => r.method === method
                                 && url.endsWith(r.path));
    if (hit === undefined) {
      return new Response(JSON.stringify({
        code: "not_found", message: `no stub for ${method} ${url}`,
        details: {},
      }), { status: 404,
            headers: { "Content-Type": "application/json" } });
    }
    const payload = typeof hit.reply === "function"
      ? (hit.reply as (b: unknown) => unknown)(body) : hit.reply;
    const status = hit.status ?? 200;
    if (status === 204) return new Response(null, { status });
    const text = typeof payload === "string"
      ? payload : JSON.stringify(payload);
    const type = typeof payload === "string" ? "text/csv" : "application/json";
    return new Response(text, { status,
                                headers: { "Content-Type": type } });
  };
  return { fetch: fetchImpl, calls, routes: live.routes };
}

export const LEASE = {
  doc_id: "d1", holder: "ann", acquired_at: "2026-01-01T00:00:00Z",
  lease_expiry: "2026-01-01T00:05:00Z",
};

export function lockRoutes(docId = "d1"): FakeRoute[] {
  return [
    { method: "POST", path: `/files/${docId}/lock`, status: 201,
      reply: { ...LEASE, doc_id: docId } },
    { method: "DELETE", path: `/files/${docId}/lock`, status: 204,
      reply: null },
  ];
}

/** Two ticks per axis with quarter-degree labels at power-of-two pixel
 * gaps: slopes 1/64 and 1/128, so every coordinate below is exact in
 * doubles and string comparisons are legitimate.
 */
export function goldenCalibration(): CalibrationWire {
  return {
    region: { page_index: 0, bbox: [100, 200, 356, 456],
              source: "user_drawn" },
    lon_map: [1 / 64, -13.5625],
    lat_map: [1 / 128, 38.4375],
    ticks: [
      { axis: "lon", pixel: 100, degrees: -12, label_text: "12W" },
      { axis: "lon", pixel: 356, degrees: -8, label_text: "8W" },
      { axis: "lat", pixel: 200, degrees: 40, label_text: "40N" },
      { axis: "lat", pixel: 456, degrees: 42, label_text: "42N" },
    ],
    rms_residual_deg: { lon: 0, lat: 0 },
  };
}

export function unitGrid(rows: number, cols: number,
                         step = 10): GridWire {
  const rb = Array.from({ length: rows + 1 }, (_, i) => i * step);
  const cb = Array.from({ length: cols + 1 }, (_, i) => i * step);
  const spans = [];
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      spans.push({ row0: r, col0: c, row_extent: 1, col_extent: 1,
                   content: `r${r}c${c}` });
    }
  }
  return {
    region: { page_index: 0, bbox: [0, 0, cols * step, rows * step],
              source: "user_drawn" },
    row_bounds: rb, col_bounds: cb, spans,
  };
}

export function tableWire(stage: TableWire["stage"],
                          grid: GridWire | null): TableWire {
  return {
    table_id: "t1", doc_id: "d1",
    region: { page_index: 0, bbox: [0, 0, 30, 30], source: "user_drawn" },
    stage, grid, edit_log: [], version: 1,
    updated_at: "2026-01-01T00:00:00Z",
  };
}

export function docDetail(over: Partial<DocDetail> = {}): DocDetail {
  return {
    doc_id: "d1", project_id: "p1", filename: "a.pdf", status: "ready",
    page_count: 1,
    meta: { title: "", authors: [], venue: "", year: null, abstract: "" },
    import_user: "ann", import_time: "2026-01-01T00:00:00Z",
    last_editor: null, last_edit_time: null,
    principal: null, principal_since: null, lock: null,
    ...over,
  };
}

export function project(over: Partial<Project> = {}): Project {
  return {
    project_id: "p1", team_id: "g1", name: "survey",
    settings: { description: "", labels: [], schema: null },
    created_by: "ann", created_at: "2026-01-01T00:00:00Z", file_count: 0,
    ...over,
  };
}
