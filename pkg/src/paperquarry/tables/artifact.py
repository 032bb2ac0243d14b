"""Staged table extraction with an event-sourced edit log.

An artifact walks through four stages: located (a region on a page),
structured (a cell lattice), filled (cell text), confirmed.  Moving
forward one stage runs the matching recognizer when the data is not
already there; moving backward any number of stages discards downstream
data.  Every accepted mutation appends one log entry, and replaying the
log over the same page content reproduces the artifact exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from ..config import PipelineConfig
from ..errors import InvalidTransition, NotFilled
from ..model import PageContent, Region
from . import grid as ops
from .grid import CellGrid
from .recognize import recognize_content, recognize_structure

__all__ = ["STAGES", "TableArtifact", "advance_stage", "apply_edit",
           "export_table", "export_edit_log", "replay_log"]

STAGES = ("located", "structured", "filled", "confirmed")


@dataclass(frozen=True)
class TableArtifact:
    table_id: str
    doc_id: str
    region: Region
    stage: str = "located"
    grid: CellGrid | None = None
    edit_log: tuple[dict, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "table_id": self.table_id,
            "doc_id": self.doc_id,
            "region": self.region.to_json(),
            "stage": self.stage,
            "grid": self.grid.to_json() if self.grid is not None else None,
            "edit_log": [dict(e) for e in self.edit_log],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TableArtifact":
        grid = data.get("grid")
        return cls(
            table_id=str(data["table_id"]),
            doc_id=str(data["doc_id"]),
            region=Region.from_json(data["region"]),
            stage=str(data.get("stage", "located")),
            grid=CellGrid.from_json(grid) if grid is not None else None,
            edit_log=tuple(dict(e) for e in data.get("edit_log", [])),
        )


def _log(artifact: TableArtifact, op: str, params: dict,
         user: str, ts: float) -> tuple[dict, ...]:
    return artifact.edit_log + ({"op": op, "params": params, "user": user, "ts": ts},)


def _clear_contents(grid: CellGrid) -> CellGrid:
    spans = tuple(replace(s, content="") for s in grid.spans)
    return replace(grid, spans=spans)


def advance_stage(artifact: TableArtifact, to_stage: str, page: PageContent,
                  cfg: PipelineConfig | None = None,
                  user: str = "", ts: float = 0.0,
                  ocr: str | None = "embedded") -> TableArtifact:
    """Moves the artifact to `to_stage`.

    Forward moves must be exactly one step and run the recognizer for the
    entered stage when its data is missing.  Backward moves are resets
    and clear everything downstream of the target stage.
    """
    if to_stage not in STAGES:
        raise InvalidTransition(f"unknown stage {to_stage!r}")
    cur = STAGES.index(artifact.stage)
    new = STAGES.index(to_stage)
    if new == cur:
        raise InvalidTransition(f"already at stage {to_stage!r}")
    if new > cur + 1:
        raise InvalidTransition(
            f"cannot skip from {artifact.stage!r} to {to_stage!r}")

    grid = artifact.grid
    region = artifact.region
    if new == cur + 1:
        if to_stage == "structured" and grid is None:
            grid = recognize_structure(page, region, cfg)
        elif to_stage == "filled":
            if grid is None:
                raise InvalidTransition("no structure to fill")
            if all(not s.content for s in grid.spans):
                grid = recognize_content(page, grid, cfg, ocr=ocr)
        elif to_stage == "confirmed" and grid is None:
            raise InvalidTransition("nothing to confirm")
    else:
        # reset: drop data produced after the target stage
        if to_stage == "located":
            grid = None
        elif to_stage == "structured" and grid is not None:
            grid = _clear_contents(grid)
    if grid is not None:
        region = grid.region
    return replace(
        artifact, stage=to_stage, grid=grid, region=region,
        edit_log=_log(artifact, "stage", {"to": to_stage}, user, ts))


def _pair(p, key) -> tuple[int, int]:
    lo, hi = p[key]
    return (int(lo), int(hi))


_GRID_OPS = {
    "merge": lambda g, p: ops.merge_cells(
        g, _pair(p, "row_range"), _pair(p, "col_range")),
    "split": lambda g, p: ops.split_cell(g, int(p["span_index"])),
    "add_row": lambda g, p: ops.add_row(g, int(p["at"])),
    "del_row": lambda g, p: ops.delete_row(g, int(p["at"])),
    "add_col": lambda g, p: ops.add_column(g, int(p["at"])),
    "del_col": lambda g, p: ops.delete_column(g, int(p["at"])),
    "set_cell": lambda g, p: ops.set_cell(
        g, int(p["row"]), int(p["col"]), str(p["content"])),
}

_STRUCTURE_OPS = {"merge", "split", "add_row", "del_row", "add_col", "del_col"}


def apply_edit(artifact: TableArtifact, op: str, params: dict,
               user: str = "", ts: float = 0.0) -> TableArtifact:
    """Applies one manual edit and logs it.

    set_region is valid only while located; structure edits while
    structured or filled; set_cell only while filled.  A confirmed
    artifact accepts no edits.
    """
    if op == "set_region":
        if artifact.stage != "located":
            raise InvalidTransition("region can only change at the located stage")
        bbox = tuple(float(v) for v in params["bbox"])
        if not (bbox[2] > bbox[0] and bbox[3] > bbox[1]):
            raise InvalidTransition(f"degenerate region {bbox}")
        region = replace(artifact.region, bbox=bbox, source="user_drawn")
        return replace(artifact, region=region,
                       edit_log=_log(artifact, op, {"bbox": list(bbox)}, user, ts))
    if op not in _GRID_OPS:
        raise InvalidTransition(f"unknown edit op {op!r}")
    if artifact.stage == "confirmed":
        raise InvalidTransition("confirmed artifacts are read-only")
    if op in _STRUCTURE_OPS and artifact.stage not in ("structured", "filled"):
        raise InvalidTransition(f"{op} requires a structured table")
    if op == "set_cell" and artifact.stage != "filled":
        raise InvalidTransition("cell text edits require the filled stage")
    if artifact.grid is None:
        raise InvalidTransition("no grid to edit")
    grid = _GRID_OPS[op](artifact.grid, params)
    return replace(artifact, grid=grid, region=grid.region,
                   edit_log=_log(artifact, op, dict(params), user, ts))


def replay_log(table_id: str, doc_id: str, page: PageContent, region: Region,
               log, cfg: PipelineConfig | None = None) -> TableArtifact:
    """Rebuilds an artifact by replaying its edit log from scratch over the
    same page content."""
    artifact = TableArtifact(table_id, doc_id, region)
    for entry in log:
        op = entry["op"]
        params = entry.get("params", {})
        user = entry.get("user", "")
        ts = entry.get("ts", 0.0)
        if op == "stage":
            artifact = advance_stage(artifact, params["to"], page, cfg, user, ts)
        else:
            artifact = apply_edit(artifact, op, params, user, ts)
    return artifact


def export_table(artifact: TableArtifact) -> list[list[str]]:
    """The grid as a dense matrix; merged text is replicated into every
    base cell the span covers.  Requires the filled or confirmed stage."""
    if artifact.stage not in ("filled", "confirmed") or artifact.grid is None:
        raise NotFilled(f"artifact is at stage {artifact.stage!r}")
    grid = artifact.grid
    out = [["" for _ in range(grid.n_cols)] for _ in range(grid.n_rows)]
    for span in grid.spans:
        for r in range(span.row0, span.row0 + span.row_extent):
            for c in range(span.col0, span.col0 + span.col_extent):
                out[r][c] = span.content
    return out


def export_edit_log(artifact: TableArtifact) -> str:
    """The edit log as JSON lines, one entry per line, oldest first."""
    return "\n".join(
        json.dumps(entry, sort_keys=True, ensure_ascii=False)
        for entry in artifact.edit_log
    )
