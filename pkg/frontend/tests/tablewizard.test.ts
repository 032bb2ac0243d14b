/** Table wizard: merge gating on the current selection, plus the
 * optimistic per-cell edit with rollback.
 */

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { TableWizard, mergeable, normalizeRect,
         spanAt } from "../src/tablewizard.js";
import type { GridWire } from "../src/types.js";
import { fakeServer, lockRoutes, tableWire, unitGrid } from "./helpers.js";

function gridWithMergedTopLeft(): GridWire {
  const grid = unitGrid(3, 3);
  // replace r0c0 and r0c1 with one span two columns wide
  grid.spans = grid.spans.filter(
    s => !(s.row0 === 0 && (s.col0 === 0 || s.col0 === 1)));
  grid.spans.unshift({ row0: 0, col0: 0, row_extent: 1, col_extent: 2,
                       content: "wide" });
  return grid;
}

describe("mergeable", () => {
  const plain = unitGrid(3, 3);

  it("rejects empty and single-cell selections", () => {
    expect(mergeable(plain, null)).toBe(false);
    expect(mergeable(plain, { r0: 1, c0: 1, r1: 1, c1: 1 })).toBe(false);
  });

  it("accepts any rectangle over unit cells", () => {
    expect(mergeable(plain, { r0: 0, c0: 0, r1: 0, c1: 1 })).toBe(true);
    expect(mergeable(plain, { r0: 0, c0: 0, r1: 2, c1: 2 })).toBe(true);
    expect(mergeable(plain, { r0: 2, c0: 1, r1: 1, c1: 0 })).toBe(true);
  });

  it("rejects rectangles leaving the grid", () => {
    expect(mergeable(plain, { r0: 0, c0: 0, r1: 0, c1: 3 })).toBe(false);
    expect(mergeable(plain, { r0: -1, c0: 0, r1: 0, c1: 1 })).toBe(false);
  });

  it("rejects a rectangle that cuts a merged span", () => {
    const grid = gridWithMergedTopLeft();
    // covers only the left half of the wide span
    expect(mergeable(grid, { r0: 0, c0: 0, r1: 1, c1: 0 })).toBe(false);
    // covers the right half plus a neighbor
    expect(mergeable(grid, { r0: 0, c0: 1, r1: 0, c1: 2 })).toBe(false);
  });

  it("accepts a rectangle aligned with whole spans", () => {
    const grid = gridWithMergedTopLeft();
    expect(mergeable(grid, { r0: 0, c0: 0, r1: 0, c1: 1 })).toBe(true);
    expect(mergeable(grid, { r0: 0, c0: 0, r1: 1, c1: 1 })).toBe(true);
    expect(mergeable(grid, { r0: 1, c0: 0, r1: 2, c1: 1 })).toBe(true);
  });

  it("normalizeRect orders the corners", () => {
    expect(normalizeRect({ r0: 2, c0: 3, r1: 0, c1: 1 }))
      .toEqual({ r0: 0, c0: 1, r1: 2, c1: 3 });
  });
});

describe("spanAt", () => {
  it("finds the covering span by visual cell", () => {
    const grid = gridWithMergedTopLeft();
    expect(spanAt(grid, 0, 0)).toBe(spanAt(grid, 0, 1));
    expect(grid.spans[spanAt(grid, 0, 0)].content).toBe("wide");
    expect(grid.spans[spanAt(grid, 2, 2)].content).toBe("r2c2");
    expect(spanAt(grid, 9, 9)).toBe(-1);
  });
});

describe("TableWizard", () => {
  async function wizardOn(stage: "structured" | "filled",
                          grid: GridWire) {
    const server = fakeServer([...lockRoutes("d1")]);
    const api = new ApiClient("http://test", server.fetch);
    await api.acquireLock("d1");
    const wizard = new TableWizard(api, tableWire(stage, grid));
    return { server, api, wizard };
  }

  it("merge is offered only when stage, lock, and selection align", async () => {
    const { wizard } = await wizardOn("structured", unitGrid(3, 3));
    expect(wizard.canMerge("mine", "Member")).toBe(false);  // no selection
    wizard.select({ r0: 0, c0: 0, r1: 0, c1: 1 });
    expect(wizard.canMerge("mine", "Member")).toBe(true);
    expect(wizard.canMerge("none", "Member")).toBe(false);  // lock missing
    expect(wizard.canMerge("mine", "None")).toBe(false);    // not a member
    wizard.select({ r0: 1, c0: 1, r1: 1, c1: 1 });
    expect(wizard.canMerge("mine", "Member")).toBe(false);  // single cell
  });

  it("filled stage never offers merge regardless of selection", async () => {
    const { wizard } = await wizardOn("filled", unitGrid(3, 3));
    wizard.select({ r0: 0, c0: 0, r1: 0, c1: 1 });
    expect(wizard.canMerge("mine", "Member")).toBe(false);
    expect(wizard.controls("mine", "Member"))
      .toEqual(["advance", "cells", "revert"]);
  });

  it("merge sends the normalized inclusive ranges", async () => {
    const { server, wizard } = await wizardOn("structured", unitGrid(3, 3));
    server.routes.push({
      method: "POST", path: "/tables/t1/edits",
      reply: tableWire("structured", gridWithMergedTopLeft()) });
    wizard.select({ r0: 0, c0: 1, r1: 0, c1: 0 });
    await wizard.merge();
    const sent = server.calls[server.calls.length - 1];
    expect(sent.body).toEqual({ op: "merge", params: {
      row_range: [0, 0], col_range: [0, 1] } });
    expect(wizard.selection).toBeNull();
    expect(wizard.art.grid!.spans[0].content).toBe("wide");
  });

  it("applies a cell edit optimistically and keeps the server copy", async () => {
    const { server, wizard } = await wizardOn("filled", unitGrid(2, 2));
    const confirmedGrid = unitGrid(2, 2);
    confirmedGrid.spans[0] = { ...confirmedGrid.spans[0], content: "fixed" };
    let resolveNow: () => void = () => {};
    const gate = new Promise<void>(r => { resolveNow = r; });
    server.routes.push({
      method: "POST", path: "/tables/t1/edits",
      reply: () => tableWire("filled", confirmedGrid) });
    const original = server.fetch;
    const apiSlow = new ApiClient("http://test", async (url, init) => {
      if (url.endsWith("/edits")) await gate;
      return original(url, init);
    });
    await apiSlow.acquireLock("d1");
    const slow = new TableWizard(apiSlow, tableWire("filled", unitGrid(2, 2)));
    const done = slow.setCell(0, 0, "fixed");
    // before the server answers, the local grid already shows the edit
    expect(slow.art.grid!.spans[0].content).toBe("fixed");
    resolveNow();
    await done;
    expect(slow.art.grid!.spans[0].content).toBe("fixed");
    expect(slow.art.version).toBe(1);
  });

  it("rolls a refused cell edit back to the server copy", async () => {
    const { server, wizard } = await wizardOn("filled", unitGrid(2, 2));
    server.routes.push(
      { method: "POST", path: "/tables/t1/edits", status: 400,
        reply: { code: "invalid_transition",
                 message: "confirmed artifacts are read-only",
                 details: {} } },
      { method: "GET", path: "/files/d1/tables",
        reply: [tableWire("confirmed", unitGrid(2, 2))] });
    await expect(wizard.setCell(0, 0, "nope"))
      .rejects.toBeInstanceOf(ApiError);
    expect(wizard.art.stage).toBe("confirmed");
    expect(wizard.art.grid!.spans[0].content).toBe("r0c0");
    expect(wizard.hint).toMatch(/read-only/);
  });

  it("stage moves go through the stage endpoint", async () => {
    const { server, wizard } = await wizardOn("structured", unitGrid(2, 2));
    server.routes.push({
      method: "POST", path: "/tables/t1/stage",
      reply: tableWire("filled", unitGrid(2, 2)) });
    await wizard.advance("filled");
    expect(wizard.art.stage).toBe("filled");
    const sent = server.calls[server.calls.length - 1];
    expect(sent.body).toEqual({ to: "filled" });
  });
});
