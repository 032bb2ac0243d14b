/** Workspace view state: which document, which tab, and how the viewer
 * currently stands toward its edit lock.
 *
 * The lock standing feeds the control gating everywhere, so it lives in
 * one place and every mutation of it goes through this class.  A lease
 * that lapses while held flips the workspace into a read-only stance
 * with a banner instead of letting edits fail one by one.
 */

import { ApiClient } from "./api.js";
import { lockStanding, LockStanding, ViewerRole } from "./gating.js";
import type { DocDetail, LockLease } from "./types.js";

export type TabName = "Meta" | "Text" | "Table" | "Map" | "Integrate";

export const TABS: readonly TabName[] = [
  "Meta", "Text", "Table", "Map", "Integrate"];

export class Workspace {
  me: string;
  role: ViewerRole;
  tab: TabName = "Meta";
  doc: DocDetail | null = null;
  /** We acquired the lock and have not released or lost it. */
  held = false;
  /** The lease lapsed underneath us; cleared on the next acquire. */
  stale = false;

  constructor(me: string, role: ViewerRole) {
    this.me = me;
    this.role = role;
  }

  setDoc(doc: DocDetail | null): void {
    this.doc = doc;
    this.held = false;
    this.stale = false;
  }

  setTab(tab: TabName): void {
    this.tab = tab;
  }

  lockAcquired(): void {
    this.held = true;
    this.stale = false;
  }

  lockReleased(): void {
    this.held = false;
    this.stale = false;
  }

  lockLost(): void {
    this.held = false;
    this.stale = true;
  }

  standing(): LockStanding {
    if (this.doc === null) return "none";
    if (this.held) return "mine";
    return lockStanding(this.doc.lock?.holder ?? null,
                        this.doc.principal, this.me);
  }

  /** Text for the read-only banner, or null when none applies. */
  banner(): string | null {
    if (this.stale) {
      return "your edit lock expired; the view is read-only until you lock again";
    }
    const s = this.standing();
    if (s === "other" && this.doc?.lock) {
      return `locked by ${this.doc.lock.holder} until ${this.doc.lock.lease_expiry}`;
    }
    if (s === "not_principal" && this.doc?.principal) {
      return `${this.doc.principal} has taken charge of this file`;
    }
    return null;
  }
}

export interface SchedulerLike {
  set(fn: () => void, ms: number): unknown;
  clear(handle: unknown): void;
}

const realScheduler: SchedulerLike = {
  set: (fn, ms) => setInterval(fn, ms),
  clear: handle => clearInterval(handle as Parameters<typeof clearInterval>[0]),
};

/** Renews a held lease on a timer and reports when it slips away.
 *
 * The renew period should be well under the server's lease length; the
 * caller picks it since the lease length is server configuration.
 */
export class LockKeeper {
  private api: ApiClient;
  private docId: string;
  private intervalMs: number;
  private scheduler: SchedulerLike;
  private handle: unknown = null;
  private onLost: (err: unknown) => void;
  private onRenew: (lease: LockLease) => void;

  constructor(api: ApiClient, docId: string, intervalMs: number,
              onLost: (err: unknown) => void,
              onRenew: (lease: LockLease) => void = () => {},
              scheduler: SchedulerLike = realScheduler) {
    this.api = api;
    this.docId = docId;
    this.intervalMs = intervalMs;
    this.onLost = onLost;
    this.onRenew = onRenew;
    this.scheduler = scheduler;
  }

  start(): void {
    if (this.handle !== null) return;
    this.handle = this.scheduler.set(() => { void this.beat(); },
                                     this.intervalMs);
  }

  private async beat(): Promise<void> {
    try {
      this.onRenew(await this.api.heartbeat(this.docId));
    } catch (err) {
      this.stop();
      this.onLost(err);
    }
  }

  stop(): void {
    if (this.handle !== null) {
      this.scheduler.clear(this.handle);
      this.handle = null;
    }
  }
}
