/** Single-page browser client for the extraction service.
 *
 * Routing is hash-based: #/login, #/home, #/project/{id}, #/doc/{id}.
 * All data flows through the typed ApiClient; this file only wires DOM
 * events to controllers and redraws from their state.
 */

import { ApiClient, ApiError, LockRequiredError } from "./api.js";
import { canMutate, enabledControls } from "./gating.js";
import { IntegratePanel, cellTooltip, schemaMissing } from "./integrate.js";
import { MapPicker } from "./mappicker.js";
import { SORT_OPTIONS, canReleaseCharge, canTakeCharge, fileRow,
         mayManage } from "./manage.js";
import { cellAtPoint, cellRect, drawBox, drawGrid, drawPage, drawPoints,
         el } from "./render.js";
import { LockKeeper, TABS, TabName, Workspace } from "./state.js";
import { TableWizard, spanAt } from "./tablewizard.js";
import type { DocDetail, PageContent, Project, Role, Team } from "./types.js";
import { ViewportTransform } from "./viewport.js";
import { fmtAuthors, fmtTime } from "./format.js";

const HEARTBEAT_MS = 10_000;

type DragMode = "pan" | "table_region" | "map_region";

class App {
  private api: ApiClient;
  private dom: Document;
  private root: HTMLElement;
  private username: string | null = null;

  private project: Project | null = null;
  private team: Team | null = null;
  private ws: Workspace | null = null;
  private docDetail: DocDetail | null = null;
  private page: PageContent | null = null;
  private pageIndex = 0;
  private vt: ViewportTransform | null = null;
  private wizard: TableWizard | null = null;
  private picker: MapPicker | null = null;
  private panel: IntegratePanel | null = null;
  private keeper: LockKeeper | null = null;
  private dragMode: DragMode = "pan";
  private notice = "";
  private searchQuery = "";
  private searchSort = "import_time";

  constructor(dom: Document, api: ApiClient) {
    this.dom = dom;
    this.api = api;
    this.root = dom.getElementById("app") ?? dom.body;
  }

  start(): void {
    window.addEventListener("hashchange", () => { void this.route(); });
    void this.route();
  }

  private hash(): string[] {
    return location.hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  }

  private go(path: string): void {
    location.hash = path;
  }

  private async route(): Promise<void> {
    this.stopKeeper();
    const parts = this.hash();
    try {
      if (this.username === null && parts[0] !== "login") {
        this.go("/login");
        return;
      }
      if (parts[0] === "login" || parts.length === 0) {
        this.renderLogin();
      } else if (parts[0] === "home") {
        await this.renderHome();
      } else if (parts[0] === "project" && parts[1]) {
        await this.openProject(parts[1]);
      } else if (parts[0] === "doc" && parts[1]) {
        await this.openDoc(parts[1]);
      } else {
        this.go("/home");
      }
    } catch (err) {
      this.renderError(err);
    }
  }

  private flash(text: string): void {
    this.notice = text;
    const box = this.dom.getElementById("notice");
    if (box) box.textContent = text;
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      return await work();
    } catch (err) {
      if (err instanceof LockRequiredError) {
        this.flash("acquire the edit lock first");
      } else if (err instanceof ApiError) {
        this.flash(`${err.code}: ${err.message}`);
        if (err.code === "lock_not_held" || err.code === "not_principal") {
          this.ws?.lockLost();
          if (this.ws?.doc) this.api.markLockLost(this.ws.doc.doc_id);
          this.redrawWorkspace();
        }
      } else {
        this.flash(String(err));
      }
      return undefined;
    }
  }

  // ------------------------------------------------------------- login

  private renderLogin(): void {
    const d = this.dom;
    const user = el(d, "input", { placeholder: "username" });
    const pass = el(d, "input", { placeholder: "password", type: "password" });
    const submit = async (register: boolean) => {
      await this.guard(async () => {
        if (register) await this.api.register(user.value, pass.value);
        await this.api.login(user.value, pass.value);
        this.username = user.value;
        this.go("/home");
      });
    };
    this.root.replaceChildren(
      el(d, "div", { class: "login" }, [
        el(d, "h1", {}, ["paperquarry"]),
        user, pass,
        el(d, "button", { click: () => void submit(false) }, ["sign in"]),
        el(d, "button", { click: () => void submit(true) }, ["register"]),
        el(d, "div", { id: "notice", class: "notice" }, [this.notice]),
      ]));
  }

  // -------------------------------------------------------------- home

  private async renderHome(): Promise<void> {
    const d = this.dom;
    const [projects, recent, mine] = await Promise.all([
      this.api.listProjects(), this.api.recentFiles(), this.api.myFiles()]);
    const projectList = el(d, "ul", {}, projects.map(p =>
      el(d, "li", {}, [
        el(d, "a", { href: `#/project/${p.project_id}` },
           [`${p.name} (${p.file_count} files)`]),
      ])));
    const teamName = el(d, "input", { placeholder: "new team name" });
    const projName = el(d, "input", { placeholder: "new project name" });
    const teamPick = el(d, "select", {});
    const teams = await this.api.listTeams();
    for (const t of teams) {
      teamPick.append(el(d, "option", { value: t.team_id }, [t.name]));
    }
    const docLink = (docId: string, label: string) =>
      el(d, "li", {}, [el(d, "a", { href: `#/doc/${docId}` }, [label])]);
    this.root.replaceChildren(
      el(d, "div", { class: "home" }, [
        el(d, "h1", {}, [`paperquarry: ${this.username}`]),
        el(d, "h2", {}, ["projects"]), projectList,
        el(d, "div", {}, [
          teamName,
          el(d, "button", { click: () => void this.guard(async () => {
            await this.api.createTeam(teamName.value);
            await this.renderHome();
          }) }, ["create team"]),
        ]),
        el(d, "div", {}, [
          teamPick, projName,
          el(d, "button", { click: () => void this.guard(async () => {
            await this.api.createProject(teamPick.value, projName.value);
            await this.renderHome();
          }) }, ["create project"]),
        ]),
        el(d, "h2", {}, ["recently viewed"]),
        el(d, "ul", {}, recent.map(r =>
          docLink(r.doc_id, r.meta?.title || r.filename))),
        el(d, "h2", {}, ["in my charge"]),
        el(d, "ul", {}, mine.map(r =>
          docLink(r.doc_id, r.meta?.title || r.filename))),
        el(d, "div", { id: "notice", class: "notice" }, [this.notice]),
      ]));
  }

  // ----------------------------------------------------------- project

  private async myRole(team: Team): Promise<Role | "None"> {
    const m = team.members.find(x => x.username === this.username);
    return m === undefined ? "None" : m.role;
  }

  private async openProject(projectId: string): Promise<void> {
    this.project = await this.api.getProject(projectId);
    this.team = await this.api.getTeam(this.project.team_id);
    await this.renderProject();
  }

  private async renderProject(): Promise<void> {
    const d = this.dom;
    const project = this.project;
    const team = this.team;
    if (project === null || team === null) return;
    const role = await this.myRole(team);
    const me = this.username ?? "";

    const listing = await this.api.searchFiles(project.project_id, {
      query: this.searchQuery, sort: this.searchSort });

    const search = el(d, "input", { placeholder: "search titles and text",
                                    value: this.searchQuery });
    search.value = this.searchQuery;
    const sortPick = el(d, "select", { change: () => {
      this.searchSort = sortPick.value;
      void this.renderProject();
    } });
    for (const opt of SORT_OPTIONS) {
      const o = el(d, "option", { value: opt.value }, [opt.label]);
      if (opt.value === this.searchSort) o.setAttribute("selected", "");
      sortPick.append(o);
    }

    const rows = listing.items.map(docItem => {
      const r = fileRow(docItem);
      const cells: HTMLElement[] = [
        el(d, "td", {}, [el(d, "a", { href: `#/doc/${r.docId}` },
                            [r.title || r.filename])]),
        el(d, "td", {}, [r.status]),
        el(d, "td", {}, [r.importUser]),
        el(d, "td", {}, [fmtTime(r.importTime)]),
        el(d, "td", {}, [r.lastEditor]),
        el(d, "td", {}, [fmtTime(r.lastEditTime || null)]),
        el(d, "td", {}, [r.principal]),
      ];
      const actions = el(d, "td", {});
      if (canTakeCharge(docItem, me) && docItem.principal !== me) {
        actions.append(el(d, "button", { click: () => void this.guard(
          async () => {
            await this.api.takeCharge(r.docId);
            await this.renderProject();
          }) }, ["take charge"]));
      }
      if (canReleaseCharge(docItem, me, role)) {
        actions.append(el(d, "button", { click: () => void this.guard(
          async () => {
            await this.api.releaseCharge(r.docId);
            await this.renderProject();
          }) }, ["release charge"]));
      }
      cells.push(actions);
      return el(d, "tr", {}, cells);
    });

    const header = el(d, "tr", {}, [
      "file", "status", "imported by", "imported", "last editor",
      "updated", "in charge", ""].map(t => el(d, "th", {}, [t])));

    const upload = el(d, "input", { type: "file" });
    const uploadBtn = el(d, "button", { click: () => void this.guard(
      async () => {
        const file = upload.files?.[0];
        if (!file) return;
        await this.api.importFile(project.project_id, file.name, file);
        await this.renderProject();
      }) }, ["import file"]);
    if (!mayManage(role, "ImportFile")) {
      uploadBtn.disabled = true;
      upload.disabled = true;
    }

    const children: (HTMLElement | string)[] = [
      el(d, "h1", {}, [project.name]),
      el(d, "p", {}, [project.settings.description]),
      el(d, "div", {}, [
        search,
        el(d, "button", { click: () => {
          this.searchQuery = search.value;
          void this.renderProject();
        } }, ["search"]),
        el(d, "span", {}, [" sort by "]), sortPick,
      ]),
      el(d, "table", { class: "files" },
         [el(d, "thead", {}, [header]), el(d, "tbody", {}, rows)]),
      el(d, "div", {}, [upload, uploadBtn]),
      this.exportBlock(role),
    ];
    if (mayManage(role, "ProjectSettings")) {
      children.push(this.settingsBlock());
    }
    children.push(this.teamBlock(team, role));
    children.push(el(d, "div", { id: "notice", class: "notice" },
                     [this.notice]));
    this.root.replaceChildren(el(d, "div", { class: "project" }, children));
  }

  private exportBlock(role: Role | "None"): HTMLElement {
    const d = this.dom;
    const project = this.project;
    const panel = this.panel ?? new IntegratePanel(this.api);
    this.panel = panel;
    const preview = el(d, "div", { class: "preview" });
    const renderPreview = () => {
      preview.replaceChildren();
      if (panel.hint) preview.append(el(d, "p", {}, [panel.hint]));
      const result = panel.projectResult;
      if (result === null) return;
      const t = result.table;
      const head = el(d, "tr", {}, t.headers.map(h => el(d, "th", {}, [h])));
      const body = t.rows.map((row, i) =>
        el(d, "tr", {}, row.map(c =>
          el(d, "td", { title: cellTooltip(t, i) }, [c]))));
      preview.append(el(d, "table", {},
                        [el(d, "thead", {}, [head]),
                         el(d, "tbody", {}, body)]));
      const dl = panel.download();
      if (dl !== null) {
        const blob = new Blob([dl.text], { type: "text/csv" });
        preview.append(el(d, "a", {
          href: URL.createObjectURL(blob), download: dl.filename,
        }, ["download project CSV"]));
      }
    };
    const runBtn = el(d, "button", { click: () => void this.guard(
      async () => {
        if (project === null) return;
        await panel.runProject(project);
        renderPreview();
      }) }, ["preview and export"]);
    if (project !== null && schemaMissing(project)
        && !mayManage(role, "ProjectSettings")) {
      // members cannot fix a missing schema, spare them the attempt
      runBtn.disabled = true;
    }
    return el(d, "div", { class: "export" },
              [el(d, "h2", {}, ["project table"]), runBtn, preview]);
  }

  private settingsBlock(): HTMLElement {
    const d = this.dom;
    const project = this.project;
    if (project === null) return el(d, "div", {});
    const desc = el(d, "input", { value: project.settings.description });
    desc.value = project.settings.description;
    const headers = el(d, "input", {
      placeholder: "schema headers, comma separated" });
    headers.value = project.settings.schema?.headers.join(", ") ?? "";
    const save = el(d, "button", { click: () => void this.guard(async () => {
      const names = headers.value.split(",").map(s => s.trim())
        .filter(Boolean);
      const schema = names.length === 0 ? null : {
        headers: names,
        aliases: project.settings.schema?.aliases ?? {},
        label_to_header: project.settings.schema?.label_to_header ?? {},
        meta_to_header: project.settings.schema?.meta_to_header ?? {},
      };
      this.project = await this.api.updateSettings(project.project_id, {
        description: desc.value, schema });
      await this.renderProject();
    }) }, ["save settings"]);
    return el(d, "div", { class: "settings" }, [
      el(d, "h2", {}, ["settings"]),
      el(d, "label", {}, ["description ", desc]),
      el(d, "label", {}, ["schema ", headers]),
      save,
    ]);
  }

  private teamBlock(team: Team, role: Role | "None"): HTMLElement {
    const d = this.dom;
    const rows = team.members.map(m => {
      const cells = [el(d, "td", {}, [m.username]),
                     el(d, "td", {}, [m.role])];
      const actions = el(d, "td", {});
      const manageable = m.role === "Manager" || m.role === "Owner"
        ? "AddRemoveManager" : "AddRemoveMember";
      if (m.role !== "Owner" && mayManage(role, manageable)) {
        actions.append(el(d, "button", { click: () => void this.guard(
          async () => {
            this.team = await this.api.removeMember(team.team_id, m.user_id);
            await this.renderProject();
          }) }, ["remove"]));
      }
      cells.push(actions);
      return el(d, "tr", {}, cells);
    });
    const name = el(d, "input", { placeholder: "username" });
    const rolePick = el(d, "select", {});
    for (const r of ["Member", "Manager"]) {
      rolePick.append(el(d, "option", { value: r }, [r]));
    }
    const addBtn = el(d, "button", { click: () => void this.guard(
      async () => {
        this.team = await this.api.addMember(team.team_id, name.value,
                                             rolePick.value);
        await this.renderProject();
      }) }, ["add member"]);
    const needed = rolePick.value === "Manager"
      ? "AddRemoveManager" : "AddRemoveMember";
    if (!mayManage(role, needed)) addBtn.disabled = true;
    return el(d, "div", { class: "team" }, [
      el(d, "h2", {}, [`team: ${team.name}`]),
      el(d, "table", {}, [el(d, "tbody", {}, rows)]),
      el(d, "div", {}, [name, rolePick, addBtn]),
    ]);
  }

  // --------------------------------------------------------- workspace

  private async openDoc(docId: string): Promise<void> {
    this.docDetail = await this.api.getDoc(docId);
    this.project = await this.api.getProject(this.docDetail.project_id);
    this.team = await this.api.getTeam(this.project.team_id);
    const role = await this.myRole(this.team);
    this.ws = new Workspace(this.username ?? "", role);
    this.ws.setDoc(this.docDetail);
    this.pageIndex = 0;
    this.page = this.docDetail.page_count > 0
      ? await this.api.getPage(docId, 0) : null;
    this.vt = this.page === null ? null
      : ViewportTransform.fit(this.page.width_pt, this.page.height_pt,
                              760, 900);
    this.wizard = null;
    this.picker = new MapPicker(this.api, docId,
                                () => this.redrawWorkspace());
    await this.picker.load().catch(() => {});
    this.panel = new IntegratePanel(this.api, () => this.redrawWorkspace());
    this.redrawWorkspace();
  }

  private stopKeeper(): void {
    this.keeper?.stop();
    this.keeper = null;
  }

  private redrawWorkspace(): void {
    const d = this.dom;
    const ws = this.ws;
    const detail = this.docDetail;
    if (ws === null || detail === null) return;

    const banner = ws.banner();
    const standing = ws.standing();
    const lockBtn = ws.held
      ? el(d, "button", { click: () => void this.guard(async () => {
          this.stopKeeper();
          await this.api.releaseLock(detail.doc_id);
          ws.lockReleased();
          this.docDetail = await this.api.getDoc(detail.doc_id);
          ws.setDoc(this.docDetail);
          this.redrawWorkspace();
        }) }, ["release lock"])
      : el(d, "button", { click: () => void this.guard(async () => {
          await this.api.acquireLock(detail.doc_id);
          ws.lockAcquired();
          this.keeper = new LockKeeper(
            this.api, detail.doc_id, HEARTBEAT_MS,
            () => { ws.lockLost(); this.redrawWorkspace(); });
          this.keeper.start();
          this.redrawWorkspace();
        }) }, ["acquire lock"]);

    const chargeBtn = detail.principal === this.username
      ? el(d, "button", { click: () => void this.guard(async () => {
          await this.api.releaseCharge(detail.doc_id);
          this.docDetail = await this.api.getDoc(detail.doc_id);
          ws.setDoc(this.docDetail);
          this.redrawWorkspace();
        }) }, ["release charge"])
      : el(d, "button", { click: () => void this.guard(async () => {
          await this.api.takeCharge(detail.doc_id);
          this.docDetail = await this.api.getDoc(detail.doc_id);
          ws.setDoc(this.docDetail);
          ws.lockAcquired();
          await this.api.acquireLock(detail.doc_id).catch(() => {
            ws.lockReleased();
          });
          this.redrawWorkspace();
        }) }, ["take charge"]);

    const tabBar = el(d, "div", { class: "tabs" }, TABS.map(name =>
      el(d, "button", {
        class: name === ws.tab ? "tab active" : "tab",
        click: () => { ws.setTab(name); this.redrawWorkspace(); },
      }, [name])));

    const pageNav = el(d, "div", { class: "pagenav" }, [
      el(d, "button", { click: () => void this.showPage(this.pageIndex - 1) },
         ["prev"]),
      ` page ${this.pageIndex + 1} / ${detail.page_count} `,
      el(d, "button", { click: () => void this.showPage(this.pageIndex + 1) },
         ["next"]),
      el(d, "button", { click: () => this.zoomStep(1.25) }, ["zoom in"]),
      el(d, "button", { click: () => this.zoomStep(0.8) }, ["zoom out"]),
    ]);

    const canvas = el(d, "canvas", { class: "pageview" });
    canvas.width = 760;
    canvas.height = 900;
    this.wireCanvas(canvas);

    const side = el(d, "div", { class: "side" });
    if (ws.tab === "Meta") side.append(this.metaPanel(standing));
    if (ws.tab === "Text") side.append(this.textPanel(standing));
    if (ws.tab === "Table") side.append(this.tablePanel(standing));
    if (ws.tab === "Map") side.append(this.mapPanel(standing));
    if (ws.tab === "Integrate") side.append(this.integrateBlock(standing));

    this.root.replaceChildren(el(d, "div", { class: "workspace" }, [
      el(d, "div", { class: "workhead" }, [
        el(d, "a", { href: `#/project/${detail.project_id}` }, ["back"]),
        el(d, "h1", {}, [detail.meta?.title || detail.filename]),
        lockBtn, chargeBtn,
      ]),
      banner === null ? el(d, "div", {})
        : el(d, "div", { class: "banner" }, [banner]),
      tabBar,
      el(d, "div", { class: "workbody" }, [
        el(d, "div", { class: "viewer" }, [pageNav, canvas]),
        side,
      ]),
      el(d, "div", { id: "notice", class: "notice" }, [this.notice]),
    ]));
    this.paint(canvas);
  }

  private async showPage(index: number): Promise<void> {
    const detail = this.docDetail;
    if (detail === null) return;
    if (index < 0 || index >= detail.page_count) return;
    this.pageIndex = index;
    this.page = await this.api.getPage(detail.doc_id, index);
    this.redrawWorkspace();
  }

  private zoomStep(factor: number): void {
    this.vt?.zoomAt({ x: 380, y: 450 }, factor);
    this.redrawWorkspace();
  }

  private paint(canvas: HTMLCanvasElement): void {
    const ctx = canvas.getContext("2d");
    const page = this.page;
    const vt = this.vt;
    if (ctx === null || page === null || vt === null) return;
    ctx.fillStyle = "#e8e8e8";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    drawPage(ctx, page, vt);
    const wizard = this.wizard;
    if (this.ws?.tab === "Table" && wizard !== null
        && wizard.art.region.page_index === this.pageIndex) {
      drawBox(ctx, vt, wizard.art.region.bbox, "#cc6600");
      if (wizard.art.grid !== null) {
        drawGrid(ctx, vt, wizard.art.grid);
        if (wizard.selection !== null) {
          const s = wizard.selection;
          for (let r = s.r0; r <= s.r1; r++) {
            for (let c = s.c0; c <= s.c1; c++) {
              const box = cellRect(wizard.art.grid, vt, r, c);
              ctx.fillStyle = "#2266cc33";
              ctx.fillRect(box.x, box.y, box.w, box.h);
            }
          }
        }
      }
    }
    if (this.ws?.tab === "Map" && this.picker !== null) {
      const cal = this.picker.state.calibration;
      if (cal !== null && cal.region.page_index === this.pageIndex) {
        drawBox(ctx, vt, cal.region.bbox, "#117733");
      }
      drawPoints(ctx, vt, this.picker.points);
    }
  }

  private wireCanvas(canvas: HTMLCanvasElement): void {
    let dragStart: { x: number; y: number } | null = null;
    let dragBox: HTMLElement | null = null;
    canvas.addEventListener("wheel", ev => {
      ev.preventDefault();
      this.vt?.zoomAt({ x: ev.offsetX, y: ev.offsetY },
                      ev.deltaY < 0 ? 1.1 : 0.9);
      this.paint(canvas);
    });
    canvas.addEventListener("mousedown", ev => {
      if (ev.button !== 0) return;
      dragStart = { x: ev.offsetX, y: ev.offsetY };
      if (this.dragMode !== "pan") {
        dragBox = el(this.dom, "div", { class: "dragbox" });
      }
    });
    canvas.addEventListener("mousemove", ev => {
      if (dragStart === null || this.vt === null) return;
      if (this.dragMode === "pan") {
        this.vt.panBy(ev.offsetX - dragStart.x, ev.offsetY - dragStart.y);
        dragStart = { x: ev.offsetX, y: ev.offsetY };
        this.paint(canvas);
      }
    });
    canvas.addEventListener("mouseup", ev => {
      if (dragStart === null || this.vt === null) return;
      const start = dragStart;
      dragStart = null;
      dragBox = null;
      const a = this.vt.toPage(start);
      const b = this.vt.toPage({ x: ev.offsetX, y: ev.offsetY });
      const bbox = [Math.min(a.x, b.x), Math.min(a.y, b.y),
                    Math.max(a.x, b.x), Math.max(a.y, b.y)];
      const moved = Math.abs(ev.offsetX - start.x) > 4
        && Math.abs(ev.offsetY - start.y) > 4;
      if (this.dragMode === "table_region" && moved) {
        this.dragMode = "pan";
        void this.guard(async () => {
          const arts = await this.api.createTable(
            this.docDetail!.doc_id, this.pageIndex, bbox);
          this.adoptTable(arts[arts.length - 1]?.table_id ?? null);
        });
      } else if (this.dragMode === "map_region" && moved) {
        this.dragMode = "pan";
        void this.guard(async () => {
          await this.picker!.calibrate(this.pageIndex, bbox);
        });
      } else if (this.ws?.tab === "Table" && !moved) {
        this.tableClick(b.x, b.y, ev.shiftKey);
      }
    });
    canvas.addEventListener("contextmenu", ev => {
      if (this.ws?.tab !== "Map" || this.picker === null
          || this.vt === null) return;
      if (!canMutate(this.ws.standing(), this.ws.role)) {
        ev.preventDefault();
        this.flash("acquire the edit lock to place points");
        return;
      }
      void this.picker.handleContextMenu(ev, this.vt);
    });
  }

  private adoptTable(tableId: string | null): void {
    if (tableId === null) return;
    void this.guard(async () => {
      const tables = await this.api.listTables(this.docDetail!.doc_id);
      const art = tables.find(t => t.table_id === tableId);
      if (art !== undefined) {
        this.wizard = new TableWizard(this.api, art,
                                      () => this.redrawWorkspace());
        this.redrawWorkspace();
      }
    });
  }

  private tableClick(x: number, y: number, extend: boolean): void {
    const wizard = this.wizard;
    const ws = this.ws;
    if (wizard === null || ws === null || wizard.art.grid === null) return;
    const cell = cellAtPoint(wizard.art.grid, x, y);
    if (cell === null) {
      wizard.select(null);
      return;
    }
    const sel = wizard.selection;
    if (extend && sel !== null) {
      wizard.select({ r0: sel.r0, c0: sel.c0, r1: cell.row, c1: cell.col });
    } else {
      wizard.select({ r0: cell.row, c0: cell.col,
                      r1: cell.row, c1: cell.col });
    }
  }

  // --------------------------------------------------------- tab panels

  private metaPanel(standing: ReturnType<Workspace["standing"]>): HTMLElement {
    const d = this.dom;
    const detail = this.docDetail;
    const ws = this.ws;
    if (detail === null || ws === null) return el(d, "div", {});
    const editable = canMutate(standing, ws.role);
    const meta = detail.meta;
    const title = el(d, "input", { disabled: !editable });
    title.value = meta.title;
    const authors = el(d, "input", { disabled: !editable });
    authors.value = meta.authors.join("; ");
    const venue = el(d, "input", { disabled: !editable });
    venue.value = meta.venue;
    const year = el(d, "input", { disabled: !editable });
    year.value = meta.year === null ? "" : String(meta.year);
    const abstract = el(d, "textarea", { disabled: !editable });
    abstract.value = meta.abstract;
    const save = el(d, "button", { disabled: !editable,
      click: () => void this.guard(async () => {
        this.docDetail = await this.api.putMeta(detail.doc_id, {
          title: title.value,
          authors: authors.value.split(";").map(s => s.trim()).filter(Boolean),
          venue: venue.value,
          year: year.value === "" ? null : Number(year.value),
          abstract: abstract.value,
        });
        ws.setDoc(this.docDetail);
        ws.lockAcquired();
        this.redrawWorkspace();
      }) }, ["save meta"]);
    return el(d, "div", { class: "meta" }, [
      el(d, "h2", {}, ["document meta"]),
      el(d, "label", {}, ["title ", title]),
      el(d, "label", {}, ["authors ", authors]),
      el(d, "p", { class: "muted" }, [fmtAuthors(meta.authors)]),
      el(d, "label", {}, ["venue ", venue]),
      el(d, "label", {}, ["year ", year]),
      el(d, "label", {}, ["abstract ", abstract]),
      save,
    ]);
  }

  private textPanel(standing: ReturnType<Workspace["standing"]>): HTMLElement {
    const d = this.dom;
    const detail = this.docDetail;
    const ws = this.ws;
    if (detail === null || ws === null) return el(d, "div", {});
    const editable = canMutate(standing, ws.role);
    const list = el(d, "ul", { class: "tags" });
    const reload = async () => {
      const anns = await this.api.getAnnotations(detail.doc_id);
      list.replaceChildren(...anns.map(a => el(d, "li", {}, [
        `${a.surface_text} [${a.label_id}] p${a.page_index + 1} by ${a.author}`,
      ])));
    };
    void this.guard(reload);
    const autoBtn = el(d, "button", { disabled: !editable,
      click: () => void this.guard(async () => {
        await this.api.annotate(detail.doc_id, { op: "auto" });
        await reload();
      }) }, ["auto-tag from dictionaries"]);
    return el(d, "div", { class: "text" }, [
      el(d, "h2", {}, ["text tags"]), autoBtn, list,
    ]);
  }

  private tablePanel(standing: ReturnType<Workspace["standing"]>): HTMLElement {
    const d = this.dom;
    const detail = this.docDetail;
    const ws = this.ws;
    if (detail === null || ws === null) return el(d, "div", {});
    const box = el(d, "div", { class: "tablewiz" });
    const pick = el(d, "select", {});
    void this.guard(async () => {
      const tables = await this.api.listTables(detail.doc_id);
      pick.replaceChildren(...tables.map(t =>
        el(d, "option", { value: t.table_id },
           [`${t.table_id} (${t.stage})`])));
      if (this.wizard !== null) pick.value = this.wizard.art.table_id;
    });
    pick.addEventListener("change", () => this.adoptTable(pick.value));

    const controlsBox = el(d, "div", { class: "controls" });
    const wizard = this.wizard;
    if (wizard !== null) {
      const live = new Set(wizard.controls(standing, ws.role));
      const btn = (label: string, enabled: boolean, fn: () => void) => {
        const b = el(d, "button", { click: fn }, [label]);
        b.disabled = !enabled;
        return b;
      };
      const sel = wizard.selection;
      const stage = wizard.art.stage;
      controlsBox.append(
        el(d, "p", {}, [`stage: ${stage}`]),
        btn("redraw region", live.has("region"),
            () => { this.dragMode = "table_region"; }),
        btn("add row", live.has("rows"), () => void this.guard(
          () => wizard.addRow(sel ? sel.r1 + 1 : 0))),
        btn("delete row", live.has("rows") && sel !== null,
            () => void this.guard(() => wizard.deleteRow(sel!.r0))),
        btn("add column", live.has("cols"), () => void this.guard(
          () => wizard.addColumn(sel ? sel.c1 + 1 : 0))),
        btn("delete column", live.has("cols") && sel !== null,
            () => void this.guard(() => wizard.deleteColumn(sel!.c0))),
        btn("merge selection", wizard.canMerge(standing, ws.role),
            () => void this.guard(() => wizard.merge())),
        btn("split cell", live.has("split") && sel !== null
            && wizard.art.grid !== null,
            () => void this.guard(() => {
              const idx = spanAt(wizard.art.grid!, sel!.r0, sel!.c0);
              return idx < 0 ? Promise.resolve() : wizard.split(idx);
            })),
      );
      if (live.has("cells") && sel !== null && wizard.art.grid !== null) {
        const idx = spanAt(wizard.art.grid, sel.r0, sel.c0);
        if (idx >= 0) {
          const input = el(d, "input", {});
          input.value = wizard.art.grid.spans[idx].content;
          controlsBox.append(el(d, "label", {}, ["cell text ", input]),
                             btn("apply", true, () => void this.guard(
                               () => wizard.setCell(sel.r0, sel.c0,
                                                    input.value))));
        }
      }
      const ladder: Record<string, string> = {
        located: "structured", structured: "filled", filled: "confirmed" };
      const back: Record<string, string> = {
        structured: "located", filled: "structured", confirmed: "filled" };
      controlsBox.append(
        btn(`advance to ${ladder[stage] ?? "-"}`,
            live.has("advance") && stage in ladder,
            () => void this.guard(() => wizard.advance(ladder[stage]))),
        btn(`back to ${back[stage] ?? "-"}`,
            live.has("revert") && stage in back,
            () => void this.guard(() => wizard.advance(back[stage]))),
      );
      if (wizard.hint) controlsBox.append(el(d, "p", {}, [wizard.hint]));
    }

    const newBtns = el(d, "div", {}, [
      el(d, "button", { click: () => void this.guard(async () => {
        const arts = await this.api.createTable(detail.doc_id,
                                                this.pageIndex);
        this.flash(`${arts.length} detected on this page`);
        this.adoptTable(arts[arts.length - 1]?.table_id ?? null);
      }) }, ["detect tables on page"]),
      el(d, "button", { click: () => {
        this.dragMode = "table_region";
        this.flash("drag on the page to outline the table");
      } }, ["draw table region"]),
    ]);
    if (!canMutate(standing, ws.role)) {
      for (const b of newBtns.querySelectorAll("button")) b.disabled = true;
    }
    return el(d, "div", { class: "tablewiz" }, [
      el(d, "h2", {}, ["tables"]), pick, newBtns, controlsBox, box,
    ]);
  }

  private mapPanel(standing: ReturnType<Workspace["standing"]>): HTMLElement {
    const d = this.dom;
    const ws = this.ws;
    const picker = this.picker;
    if (ws === null || picker === null) return el(d, "div", {});
    const editable = canMutate(standing, ws.role);
    const calBtn = el(d, "button", { disabled: !editable, click: () => {
      this.dragMode = "map_region";
      this.flash("drag on the page to outline the map");
    } }, ["calibrate from region"]);
    const cal = picker.state.calibration;
    const calInfo = cal === null
      ? el(d, "p", {}, ["not calibrated"])
      : el(d, "p", {}, [
          `${cal.ticks.length} ticks, residual lon `
          + `${(cal.rms_residual_deg["lon"] ?? 0).toExponential(2)} lat `
          + `${(cal.rms_residual_deg["lat"] ?? 0).toExponential(2)}`]);
    const list = el(d, "ol", {}, picker.points.map(p =>
      el(d, "li", {}, [
        picker.display(p) + (p.pending ? " (saving)" : "")
        + (p.outOfRange ? " (outside calibrated area)" : "")])));
    return el(d, "div", { class: "map" }, [
      el(d, "h2", {}, ["map points"]),
      calBtn, calInfo,
      el(d, "p", { class: "muted" },
         ["right-click on the map to place a point"]),
      picker.hint === null ? el(d, "span", {})
        : el(d, "p", { class: "hintline" }, [picker.hint]),
      list,
    ]);
  }

  private integrateBlock(
      standing: ReturnType<Workspace["standing"]>): HTMLElement {
    const d = this.dom;
    const detail = this.docDetail;
    const ws = this.ws;
    const panel = this.panel;
    if (detail === null || ws === null || panel === null) {
      return el(d, "div", {});
    }
    const run = el(d, "button", { disabled: !canMutate(standing, ws.role),
      click: () => void this.guard(async () => {
        await panel.runFile(detail.doc_id);
        this.redrawWorkspace();
      }) }, ["build file summary"]);
    const out = el(d, "div", {});
    const result = panel.fileResult;
    if (result !== null) {
      const t = result.table;
      out.append(el(d, "table", {}, [
        el(d, "thead", {}, [el(d, "tr", {},
          t.headers.map(h => el(d, "th", {}, [h])))]),
        el(d, "tbody", {}, t.rows.map((row, i) =>
          el(d, "tr", {}, row.map(c =>
            el(d, "td", { title: cellTooltip(t, i) }, [c]))))),
      ]));
      if (result.warnings.length > 0) {
        out.append(el(d, "ul", {}, result.warnings.map(w =>
          el(d, "li", {}, [w]))));
      }
    }
    return el(d, "div", { class: "integrate" }, [
      el(d, "h2", {}, ["file summary"]), run, out,
    ]);
  }

  private renderError(err: unknown): void {
    const d = this.dom;
    const message = err instanceof ApiError
      ? `${err.code}: ${err.message}` : String(err);
    this.root.replaceChildren(el(d, "div", { class: "error" }, [
      el(d, "h1", {}, ["something went wrong"]),
      el(d, "p", {}, [message]),
      el(d, "a", { href: "#/home" }, ["back to start"]),
    ]));
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const app = new App(document, new ApiClient(""));
  app.start();
}

export { App };
