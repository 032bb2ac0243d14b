/** Table tab controller: staged extraction over one table artifact.
 *
 * Structural operations (rows, columns, merge, split, stage moves) wait
 * for the server's answer before the grid re-renders; only per-cell
 * text edits are optimistic, with rollback to the server copy when the
 * write is refused.  Span coordinates are visual: row 0 is the top row.
 */

import { ApiClient } from "./api.js";
import { enabledControls, LockStanding, ViewerRole, WizardControl } from "./gating.js";
import type { GridWire, SpanWire, TableWire } from "./types.js";

/** Inclusive rectangle of base cells in visual coordinates. */
export interface CellRect {
  r0: number;
  c0: number;
  r1: number;
  c1: number;
}

export function normalizeRect(a: CellRect): CellRect {
  return {
    r0: Math.min(a.r0, a.r1), r1: Math.max(a.r0, a.r1),
    c0: Math.min(a.c0, a.c1), c1: Math.max(a.c0, a.c1),
  };
}

function overlaps(s: SpanWire, r: CellRect): boolean {
  return !(s.row0 + s.row_extent <= r.r0 || s.row0 > r.r1
           || s.col0 + s.col_extent <= r.c0 || s.col0 > r.c1);
}

function contained(s: SpanWire, r: CellRect): boolean {
  return r.r0 <= s.row0 && s.row0 + s.row_extent <= r.r1 + 1
      && r.c0 <= s.col0 && s.col0 + s.col_extent <= r.c1 + 1;
}

/** True when the rectangle covers at least two cells and no span
 * straddles its border, i.e. exactly what the server would accept. */
export function mergeable(grid: GridWire, sel: CellRect | null): boolean {
  if (sel === null) return false;
  const r = normalizeRect(sel);
  if (r.r0 === r.r1 && r.c0 === r.c1) return false;
  const rows = grid.row_bounds.length - 1;
  const cols = grid.col_bounds.length - 1;
  if (r.r0 < 0 || r.c0 < 0 || r.r1 >= rows || r.c1 >= cols) return false;
  return grid.spans.every(s => !overlaps(s, r) || contained(s, r));
}

export function spanAt(grid: GridWire, row: number, col: number): number {
  return grid.spans.findIndex(
    s => s.row0 <= row && row < s.row0 + s.row_extent
      && s.col0 <= col && col < s.col0 + s.col_extent);
}

export class TableWizard {
  private api: ApiClient;
  private onChange: () => void;

  art: TableWire;
  selection: CellRect | null = null;
  hint: string | null = null;

  constructor(api: ApiClient, art: TableWire,
              onChange: () => void = () => {}) {
    this.api = api;
    this.art = art;
    this.onChange = onChange;
  }

  controls(lock: LockStanding, role: ViewerRole): WizardControl[] {
    return enabledControls(this.art.stage, lock, role);
  }

  /** Merge availability is gated twice: the stage must offer the merge
   * tool at all, and the current selection must be a legal rectangle. */
  canMerge(lock: LockStanding, role: ViewerRole): boolean {
    if (!this.controls(lock, role).includes("merge")) return false;
    return this.art.grid !== null && mergeable(this.art.grid, this.selection);
  }

  select(rect: CellRect | null): void {
    this.selection = rect === null ? null : normalizeRect(rect);
    this.onChange();
  }

  private adopt(art: TableWire): void {
    this.art = art;
    this.hint = null;
    this.onChange();
  }

  private async structural(op: string,
                           params: Record<string, unknown>): Promise<void> {
    this.adopt(await this.api.editTable(this.art.doc_id, this.art.table_id,
                                        op, params));
  }

  async merge(): Promise<void> {
    if (this.selection === null) return;
    const r = normalizeRect(this.selection);
    await this.structural("merge", { row_range: [r.r0, r.r1],
                                     col_range: [r.c0, r.c1] });
    this.selection = null;
    this.onChange();
  }

  async split(spanIndex: number): Promise<void> {
    await this.structural("split", { span_index: spanIndex });
  }

  async addRow(at: number): Promise<void> {
    await this.structural("add_row", { at });
  }

  async deleteRow(at: number): Promise<void> {
    await this.structural("del_row", { at });
  }

  async addColumn(at: number): Promise<void> {
    await this.structural("add_col", { at });
  }

  async deleteColumn(at: number): Promise<void> {
    await this.structural("del_col", { at });
  }

  /** Optimistic: the span's text flips immediately, and on refusal the
   * artifact is re-fetched so the view falls back to the server copy. */
  async setCell(row: number, col: number, content: string): Promise<void> {
    const grid = this.art.grid;
    if (grid === null) return;
    const idx = spanAt(grid, row, col);
    if (idx < 0) return;
    const before = grid.spans[idx].content;
    grid.spans[idx] = { ...grid.spans[idx], content };
    this.onChange();
    try {
      this.adopt(await this.api.editTable(this.art.doc_id, this.art.table_id,
                                          "set_cell", { row, col, content }));
    } catch (err) {
      grid.spans[idx] = { ...grid.spans[idx], content: before };
      this.onChange();
      await this.refresh().catch(() => {});
      // the refusal reason must survive the re-fetch that adopt() clears
      this.hint = err instanceof Error ? err.message : "edit refused";
      this.onChange();
      throw err;
    }
  }

  async advance(to: string): Promise<void> {
    this.adopt(await this.api.stageTable(this.art.doc_id, this.art.table_id,
                                         to as TableWire["stage"]));
  }

  async refresh(): Promise<void> {
    const tables = await this.api.listTables(this.art.doc_id);
    const mine = tables.find(t => t.table_id === this.art.table_id);
    if (mine !== undefined) this.adopt(mine);
  }
}
