/** Typed client for the extraction service.
 *
 * Every call that mutates a document artifact goes through a local lock
 * ledger first: if this client does not believe it holds the edit lock
 * for the document, the method throws LockRequiredError before any
 * request is built.  The server enforces the same rule, but the client
 * refusing up front means a stale tab can never emit a doomed write.
 */

import type {
  AnnotationWire, ChargeInfo, DocDetail, DocSummary, FileSummary,
  GeoPointWire, LockLease, MapState, Meta, PageContent, Project,
  ProjectExport, ProjectSettings, SearchPage, SessionInfo, Stage,
  TableWire, Team, UserInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  code: string;
  status: number;
  details: Record<string, unknown>;

  constructor(code: string, status: number, message: string,
              details: Record<string, unknown> = {}) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
    this.details = details;
  }
}

/** Raised locally, before any network call, when a document-artifact
 * mutation is attempted without a held lock. */
export class LockRequiredError extends Error {
  docId: string;

  constructor(docId: string) {
    super(`no edit lock held for document ${docId}`);
    this.name = "LockRequiredError";
    this.docId = docId;
  }
}

export interface SearchOptions {
  query?: string;
  principal?: string;
  importUser?: string;
  sort?: string;
  order?: string;
  page?: number;
  pageSize?: number;
}

interface RequestSpec {
  method: string;
  path: string;
  body?: unknown;
  form?: FormData;
  raw?: boolean;
}

export class ApiClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;
  private token: string | null = null;
  private heldLocks = new Set<string>();

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    // default binding keeps window.fetch's `this` intact in browsers
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  setToken(token: string | null): void {
    this.token = token;
    if (token === null) this.heldLocks.clear();
  }

  hasLock(docId: string): boolean {
    return this.heldLocks.has(docId);
  }

  /** Forget a lock without calling the server, e.g. after a failed
   * heartbeat or a 409 telling us someone else took over. */
  markLockLost(docId: string): void {
    this.heldLocks.delete(docId);
  }

  private requireLock(docId: string): void {
    if (!this.heldLocks.has(docId)) throw new LockRequiredError(docId);
  }

  private async request<T>(spec: RequestSpec): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token !== null) headers["Authorization"] = `Bearer ${this.token}`;
    const init: RequestInit = { method: spec.method, headers };
    if (spec.form !== undefined) {
      init.body = spec.form;
    } else if (spec.body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(spec.body);
    }
    const resp = await this.fetchImpl(this.baseUrl + spec.path, init);
    if (!resp.ok) {
      let code = "error";
      let message = `HTTP ${resp.status}`;
      let details: Record<string, unknown> = {};
      try {
        const env = await resp.json();
        if (env && typeof env.code === "string") {
          code = env.code;
          message = typeof env.message === "string" ? env.message : message;
          details = env.details ?? {};
        }
      } catch {
        // non-JSON error body; keep the generic message
      }
      throw new ApiError(code, resp.status, message, details);
    }
    if (resp.status === 204) return undefined as T;
    if (spec.raw) return (await resp.text()) as T;
    return (await resp.json()) as T;
  }

  // ------------------------------------------------------------- auth

  async register(username: string, password: string): Promise<UserInfo> {
    return this.request({ method: "POST", path: "/auth/register",
                          body: { username, password } });
  }

  async login(username: string, password: string): Promise<SessionInfo> {
    const info = await this.request<SessionInfo>({
      method: "POST", path: "/auth/login", body: { username, password } });
    this.token = info.token;
    this.heldLocks.clear();
    return info;
  }

  async health(): Promise<{ status: string }> {
    return this.request({ method: "GET", path: "/health" });
  }

  // ------------------------------------------------------------ teams

  async listTeams(): Promise<Team[]> {
    return this.request({ method: "GET", path: "/teams" });
  }

  async createTeam(name: string): Promise<Team> {
    return this.request({ method: "POST", path: "/teams", body: { name } });
  }

  async getTeam(teamId: string): Promise<Team> {
    return this.request({ method: "GET", path: `/teams/${teamId}` });
  }

  async addMember(teamId: string, username: string, role: string): Promise<Team> {
    return this.request({ method: "POST", path: `/teams/${teamId}/members`,
                          body: { username, role } });
  }

  async setRole(teamId: string, memberId: string, role: string): Promise<Team> {
    return this.request({ method: "PATCH",
                          path: `/teams/${teamId}/members/${memberId}`,
                          body: { role } });
  }

  async removeMember(teamId: string, memberId: string): Promise<Team> {
    return this.request({ method: "PATCH",
                          path: `/teams/${teamId}/members/${memberId}`,
                          body: { remove: true } });
  }

  // --------------------------------------------------------- projects

  async listProjects(): Promise<Project[]> {
    return this.request({ method: "GET", path: "/projects" });
  }

  async createProject(teamId: string, name: string,
                      settings?: Partial<ProjectSettings>): Promise<Project> {
    return this.request({ method: "POST", path: "/projects",
                          body: { team_id: teamId, name, settings } });
  }

  async getProject(projectId: string): Promise<Project> {
    return this.request({ method: "GET", path: `/projects/${projectId}` });
  }

  async deleteProject(projectId: string): Promise<void> {
    return this.request({ method: "DELETE", path: `/projects/${projectId}` });
  }

  async updateSettings(projectId: string,
                       changes: Partial<ProjectSettings>): Promise<Project> {
    return this.request({ method: "PATCH",
                          path: `/projects/${projectId}/settings`,
                          body: changes });
  }

  // ------------------------------------------------------------ files

  async importFile(projectId: string, filename: string,
                   data: Blob): Promise<DocSummary> {
    const form = new FormData();
    form.append("file", data, filename);
    return this.request({ method: "POST",
                          path: `/projects/${projectId}/files`, form });
  }

  async searchFiles(projectId: string,
                    opts: SearchOptions = {}): Promise<SearchPage> {
    const q = new URLSearchParams();
    if (opts.query) q.set("query", opts.query);
    if (opts.principal) q.set("principal", opts.principal);
    if (opts.importUser) q.set("import_user", opts.importUser);
    if (opts.sort) q.set("sort", opts.sort);
    if (opts.order) q.set("order", opts.order);
    if (opts.page !== undefined) q.set("page", String(opts.page));
    if (opts.pageSize !== undefined) q.set("page_size", String(opts.pageSize));
    const qs = q.toString();
    return this.request({ method: "GET",
                          path: `/projects/${projectId}/files${qs ? "?" + qs : ""}` });
  }

  async myFiles(): Promise<DocSummary[]> {
    return this.request({ method: "GET", path: "/me/files" });
  }

  async recentFiles(): Promise<DocSummary[]> {
    return this.request({ method: "GET", path: "/me/recent" });
  }

  async getDoc(docId: string): Promise<DocDetail> {
    return this.request({ method: "GET", path: `/files/${docId}/meta` });
  }

  async getPage(docId: string, pageIndex: number): Promise<PageContent> {
    return this.request({ method: "GET",
                          path: `/files/${docId}/pages/${pageIndex}` });
  }

  // --------------------------------------------------- locks and charge

  async acquireLock(docId: string): Promise<LockLease> {
    const lease = await this.request<LockLease>({
      method: "POST", path: `/files/${docId}/lock` });
    this.heldLocks.add(docId);
    return lease;
  }

  /** Renews the lease; the server treats re-acquire by the holder as a
   * heartbeat.  On failure the lock is dropped from the local ledger so
   * later mutations are refused client-side. */
  async heartbeat(docId: string): Promise<LockLease> {
    try {
      return await this.acquireLock(docId);
    } catch (err) {
      this.heldLocks.delete(docId);
      throw err;
    }
  }

  async releaseLock(docId: string): Promise<void> {
    try {
      await this.request<void>({ method: "DELETE",
                                 path: `/files/${docId}/lock` });
    } finally {
      this.heldLocks.delete(docId);
    }
  }

  async takeCharge(docId: string): Promise<ChargeInfo> {
    return this.request({ method: "POST", path: `/files/${docId}/charge` });
  }

  async releaseCharge(docId: string): Promise<void> {
    return this.request({ method: "DELETE", path: `/files/${docId}/charge` });
  }

  // ------------------------------------- document artifacts (lock-gated)

  async putMeta(docId: string, meta: Partial<Meta>): Promise<DocDetail> {
    this.requireLock(docId);
    return this.request({ method: "PUT", path: `/files/${docId}/meta`,
                          body: meta });
  }

  async createTable(docId: string, pageIndex: number,
                    bbox?: number[]): Promise<TableWire[]> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/files/${docId}/tables`,
                          body: { page_index: pageIndex, bbox } });
  }

  async stageTable(docId: string, tableId: string,
                   to: Stage): Promise<TableWire> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/tables/${tableId}/stage`,
                          body: { to } });
  }

  async editTable(docId: string, tableId: string, op: string,
                  params: Record<string, unknown>): Promise<TableWire> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/tables/${tableId}/edits`,
                          body: { op, params } });
  }

  async annotate(docId: string,
                 body: Record<string, unknown>): Promise<AnnotationWire[]> {
    this.requireLock(docId);
    return this.request({ method: "POST",
                          path: `/files/${docId}/annotations`, body });
  }

  async calibrateMap(docId: string, pageIndex: number,
                     bbox: number[]): Promise<MapState> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/files/${docId}/map/calibrate`,
                          body: { page_index: pageIndex, bbox } });
  }

  async addMapPoint(docId: string, pixel: [number, number],
                    tableRowHint?: number): Promise<GeoPointWire> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/files/${docId}/map/points`,
                          body: { pixel, table_row_hint: tableRowHint } });
  }

  async integrateFile(docId: string): Promise<FileSummary> {
    this.requireLock(docId);
    return this.request({ method: "POST", path: `/files/${docId}/integrate` });
  }

  // ------------------------------------------------- reads of artifacts

  async listTables(docId: string): Promise<TableWire[]> {
    return this.request({ method: "GET", path: `/files/${docId}/tables` });
  }

  async getAnnotations(docId: string,
                       includeHidden = false): Promise<AnnotationWire[]> {
    const qs = includeHidden ? "?include_hidden=true" : "";
    return this.request({ method: "GET",
                          path: `/files/${docId}/annotations${qs}` });
  }

  async getMap(docId: string): Promise<MapState> {
    return this.request({ method: "GET", path: `/files/${docId}/map` });
  }

  /** Project-level stacking is read-only on the server, so no lock. */
  async exportProjectCsv(projectId: string): Promise<string> {
    return this.request({ method: "POST",
                          path: `/projects/${projectId}/integrate`,
                          raw: true });
  }

  async exportProjectFull(projectId: string): Promise<ProjectExport> {
    return this.request({
      method: "POST",
      path: `/projects/${projectId}/integrate?include=provenance` });
  }
}
