/** The client wrapper must never put a document-artifact mutation on
 * the wire without holding the edit lock.  Each mutating method is
 * driven against a recording fetch stub: without the lock the method
 * throws locally and the recorder stays empty; with the lock the call
 * goes through; after release or loss it is refused again.
 */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError, LockRequiredError } from "../src/api.js";
import { FakeServer, fakeServer, lockRoutes, tableWire,
         unitGrid } from "./helpers.js";

const DOC = "d1";

type Mutation = { name: string; run: (api: ApiClient) => Promise<unknown> };

const MUTATIONS: Mutation[] = [
  { name: "putMeta",
    run: api => api.putMeta(DOC, { title: "x" }) },
  { name: "createTable",
    run: api => api.createTable(DOC, 0, [0, 0, 10, 10]) },
  { name: "stageTable",
    run: api => api.stageTable(DOC, "t1", "structured") },
  { name: "editTable",
    run: api => api.editTable(DOC, "t1", "set_cell",
                              { row: 0, col: 0, content: "x" }) },
  { name: "annotate",
    run: api => api.annotate(DOC, { op: "auto" }) },
  { name: "calibrateMap",
    run: api => api.calibrateMap(DOC, 0, [0, 0, 10, 10]) },
  { name: "addMapPoint",
    run: api => api.addMapPoint(DOC, [1, 2]) },
  { name: "integrateFile",
    run: api => api.integrateFile(DOC) },
];

function serverWithAllRoutes(): FakeServer {
  return fakeServer([
    ...lockRoutes(DOC),
    { method: "PUT", path: `/files/${DOC}/meta`, reply: {} },
    { method: "POST", path: `/files/${DOC}/tables`, status: 201,
      reply: [tableWire("located", null)] },
    { method: "POST", path: "/tables/t1/stage",
      reply: tableWire("structured", unitGrid(2, 2)) },
    { method: "POST", path: "/tables/t1/edits",
      reply: tableWire("structured", unitGrid(2, 2)) },
    { method: "POST", path: `/files/${DOC}/annotations`, status: 201,
      reply: [] },
    { method: "POST", path: `/files/${DOC}/map/calibrate`,
      reply: { calibration: null, points: [] } },
    { method: "POST", path: `/files/${DOC}/map/points`, status: 201,
      reply: { pixel: [1, 2], longitude: 0, latitude: 0, doc_id: DOC,
               table_row_hint: null, created_by: "ann",
               created_at: "2026-01-01T00:00:00Z", out_of_range: false } },
    { method: "POST", path: `/files/${DOC}/integrate`,
      reply: { table: { level: "file", headers: [], rows: [],
                        provenance: [] }, warnings: [] } },
  ]);
}

describe("lock guard", () => {
  let server: FakeServer;
  let api: ApiClient;

  beforeEach(() => {
    server = serverWithAllRoutes();
    api = new ApiClient("http://test", server.fetch);
  });

  it("refuses every artifact mutation without the lock, off the wire", async () => {
    for (const m of MUTATIONS) {
      await expect(m.run(api), m.name)
        .rejects.toBeInstanceOf(LockRequiredError);
    }
    expect(server.calls).toHaveLength(0);
  });

  it("lets every mutation through while the lock is held", async () => {
    await api.acquireLock(DOC);
    expect(api.hasLock(DOC)).toBe(true);
    for (const m of MUTATIONS) {
      await m.run(api);
    }
    // one acquire plus one request per mutation
    expect(server.calls).toHaveLength(1 + MUTATIONS.length);
  });

  it("refuses again after release", async () => {
    await api.acquireLock(DOC);
    await api.releaseLock(DOC);
    const before = server.calls.length;
    for (const m of MUTATIONS) {
      await expect(m.run(api), m.name)
        .rejects.toBeInstanceOf(LockRequiredError);
    }
    expect(server.calls).toHaveLength(before);
  });

  it("refuses after the lock is marked lost", async () => {
    await api.acquireLock(DOC);
    api.markLockLost(DOC);
    const before = server.calls.length;
    await expect(api.putMeta(DOC, { title: "x" }))
      .rejects.toBeInstanceOf(LockRequiredError);
    expect(server.calls).toHaveLength(before);
  });

  it("scopes the guard to the document, not the client", async () => {
    server.routes.push(...lockRoutes("d2"),
                       { method: "PUT", path: "/files/d2/meta", reply: {} });
    await api.acquireLock("d2");
    await api.putMeta("d2", { title: "y" });
    await expect(api.putMeta(DOC, { title: "x" }))
      .rejects.toBeInstanceOf(LockRequiredError);
  });

  it("drops the local lock when a heartbeat fails", async () => {
    await api.acquireLock(DOC);
    const acquire = server.routes.find(
      r => r.method === "POST" && r.path === `/files/${DOC}/lock`)!;
    acquire.status = 409;
    acquire.reply = { code: "lock_held", message: "lock held by 'bob'",
                      details: { holder: "bob" } };
    await expect(api.heartbeat(DOC)).rejects.toBeInstanceOf(ApiError);
    expect(api.hasLock(DOC)).toBe(false);
    await expect(api.putMeta(DOC, { title: "x" }))
      .rejects.toBeInstanceOf(LockRequiredError);
  });

  it("reads never require the lock", async () => {
    server.routes.push(
      { method: "GET", path: `/files/${DOC}/tables`, reply: [] },
      { method: "GET", path: `/files/${DOC}/map`,
        reply: { calibration: null, points: [] } },
      { method: "GET", path: `/files/${DOC}/annotations`, reply: [] });
    await api.listTables(DOC);
    await api.getMap(DOC);
    await api.getAnnotations(DOC);
    expect(server.calls).toHaveLength(3);
  });

  it("surfaces the server error envelope as ApiError fields", async () => {
    server.routes.push({
      method: "GET", path: "/files/nope/meta", status: 404,
      reply: { code: "not_found", message: "no document 'nope'",
               details: {} } });
    const err = await api.getDoc("nope").catch(e => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("not_found");
    expect(err.status).toBe(404);
    expect(err.message).toBe("no document 'nope'");
  });
});
