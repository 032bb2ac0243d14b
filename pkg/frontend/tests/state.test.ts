/** Workspace lock standing, the stale-lock banner, and the heartbeat
 * keeper that feeds them.
 */

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { enabledControls } from "../src/gating.js";
import { LockKeeper, SchedulerLike, TABS, Workspace } from "../src/state.js";
import { LEASE, docDetail, fakeServer, lockRoutes } from "./helpers.js";

describe("Workspace", () => {
  it("derives the standing from the document's live state", () => {
    const ws = new Workspace("ann", "Member");
    expect(ws.standing()).toBe("none");
    ws.setDoc(docDetail());
    expect(ws.standing()).toBe("none");
    ws.setDoc(docDetail({ lock: { holder: "bob",
                                  acquired_at: "2026-01-01T00:00:00Z",
                                  lease_expiry: "2026-01-01T00:05:00Z" } }));
    expect(ws.standing()).toBe("other");
    expect(ws.banner()).toMatch(/locked by bob/);
    ws.setDoc(docDetail({ principal: "bob",
                          principal_since: "2026-01-01T00:00:00Z" }));
    expect(ws.standing()).toBe("not_principal");
    expect(ws.banner()).toMatch(/bob has taken charge/);
    ws.setDoc(docDetail({ principal: "ann",
                          principal_since: "2026-01-01T00:00:00Z" }));
    expect(ws.standing()).toBe("none");
    expect(ws.banner()).toBeNull();
  });

  it("held and lost flags override the document snapshot", () => {
    const ws = new Workspace("ann", "Member");
    ws.setDoc(docDetail());
    ws.lockAcquired();
    expect(ws.standing()).toBe("mine");
    expect(ws.banner()).toBeNull();
    ws.lockLost();
    expect(ws.standing()).toBe("none");
    expect(ws.banner()).toMatch(/expired.*read-only/);
    ws.lockAcquired();
    expect(ws.standing()).toBe("mine");
    expect(ws.banner()).toBeNull();
    ws.lockReleased();
    expect(ws.standing()).toBe("none");
    expect(ws.banner()).toBeNull();
  });

  it("a lost lock disables every wizard control", () => {
    const ws = new Workspace("ann", "Member");
    ws.setDoc(docDetail());
    ws.lockAcquired();
    expect(enabledControls("structured", ws.standing(), ws.role))
      .toContain("merge");
    ws.lockLost();
    expect(enabledControls("structured", ws.standing(), ws.role))
      .toEqual([]);
  });

  it("switching documents clears held and stale state", () => {
    const ws = new Workspace("ann", "Member");
    ws.setDoc(docDetail());
    ws.lockLost();
    ws.setDoc(docDetail({ doc_id: "d2" }));
    expect(ws.stale).toBe(false);
    expect(ws.banner()).toBeNull();
  });

  it("exposes the fixed tab list", () => {
    expect(TABS).toEqual(["Meta", "Text", "Table", "Map", "Integrate"]);
  });
});

class ManualScheduler implements SchedulerLike {
  fn: (() => void) | null = null;
  cleared = 0;

  set(fn: () => void): unknown {
    this.fn = fn;
    return 1;
  }

  clear(): void {
    this.cleared += 1;
    this.fn = null;
  }

  async fire(): Promise<void> {
    this.fn?.();
    // let the heartbeat's promise chain settle
    await new Promise(r => setTimeout(r, 0));
    await new Promise(r => setTimeout(r, 0));
  }
}

describe("LockKeeper", () => {
  it("renews on each beat and reports renewals", async () => {
    const server = fakeServer([...lockRoutes("d1")]);
    const api = new ApiClient("http://test", server.fetch);
    await api.acquireLock("d1");
    const sched = new ManualScheduler();
    const renewals: string[] = [];
    const keeper = new LockKeeper(api, "d1", 1000, () => {},
                                  lease => renewals.push(lease.lease_expiry),
                                  sched);
    keeper.start();
    await sched.fire();
    await sched.fire();
    expect(renewals).toEqual([LEASE.lease_expiry, LEASE.lease_expiry]);
    keeper.stop();
    expect(sched.cleared).toBe(1);
  });

  it("stops and reports loss when the server refuses the renewal", async () => {
    const server = fakeServer([...lockRoutes("d1")]);
    const api = new ApiClient("http://test", server.fetch);
    await api.acquireLock("d1");
    const acquire = server.routes.find(r => r.method === "POST")!;
    acquire.status = 409;
    acquire.reply = { code: "lock_held", message: "lock held by 'bob'",
                      details: { holder: "bob" } };
    const sched = new ManualScheduler();
    const ws = new Workspace("ann", "Member");
    ws.setDoc(docDetail());
    ws.lockAcquired();
    let lossError: unknown = null;
    const keeper = new LockKeeper(api, "d1", 1000, err => {
      lossError = err;
      ws.lockLost();
    }, () => {}, sched);
    keeper.start();
    await sched.fire();
    expect(lossError).toBeInstanceOf(ApiError);
    expect(sched.cleared).toBe(1);
    expect(api.hasLock("d1")).toBe(false);
    expect(ws.standing()).toBe("none");
    expect(ws.banner()).toMatch(/read-only/);
  });

  it("start is idempotent while running", async () => {
    const server = fakeServer([...lockRoutes("d1")]);
    const api = new ApiClient("http://test", server.fetch);
    const sched = new ManualScheduler();
    const keeper = new LockKeeper(api, "d1", 1000, () => {}, () => {}, sched);
    keeper.start();
    const first = sched.fn;
    keeper.start();
    expect(sched.fn).toBe(first);
    keeper.stop();
    keeper.stop();
    expect(sched.cleared).toBe(1);
  });
});
