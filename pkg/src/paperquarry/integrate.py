"""Project-level data integration and CSV export.

A project schema names the output columns.  For each file, confirmed
tables are scanned for a header row (more than half of its non-empty
cells must match a schema column, directly or through an alias); the
rows below it land in the matching columns.  Document metadata, the
first picked map point, and the first annotation per mapped label are
broadcast into every row of that file, filling only cells the table
left empty.  File tables stack into one project table whose CSV ships
with a provenance sidecar tracing every row back to its sources.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

from .errors import NoHeaderRowFound, SchemaMismatch
from .model import DocumentRecord, MetaInfo
from .tables.artifact import TableArtifact, export_table

__all__ = [
    "PROV_KINDS", "ProjectSchema", "SummaryTable",
    "normalize_header", "match_header", "find_header_row",
    "integrate_file", "integrate_project",
    "export_csv", "export_provenance_csv",
]

PROV_KINDS = ("table", "meta", "text", "map")

_PAREN_SUFFIX_RE = re.compile(r"\s*\([^()]*\)\s*$")
_PUNCT_RE = re.compile(r"[^\w\s]")
_WS_RE = re.compile(r"\s+")


def normalize_header(raw: str) -> str:
    """Canonical form of a column header: trailing parenthesized unit
    stripped, punctuation removed, case folded, whitespace collapsed."""
    s = _PAREN_SUFFIX_RE.sub("", raw or "")
    s = _PUNCT_RE.sub("", s)
    s = _WS_RE.sub(" ", s).strip().casefold()
    return s


@dataclass(frozen=True)
class ProjectSchema:
    headers: tuple[str, ...]
    aliases: dict = field(default_factory=dict)          # alias -> header
    label_to_header: dict = field(default_factory=dict)  # label_id -> header
    meta_to_header: dict = field(default_factory=dict)   # meta field -> header

    def __post_init__(self):
        if not self.headers:
            raise ValueError("schema needs at least one header")
        if len(set(self.headers)) != len(self.headers):
            raise ValueError("duplicate schema headers")
        for name, mapping in (("alias", self.aliases),
                              ("label", self.label_to_header),
                              ("meta", self.meta_to_header)):
            for key, header in mapping.items():
                if header not in self.headers:
                    raise ValueError(
                        f"{name} {key!r} points at unknown header {header!r}")

    def to_json(self) -> dict:
        return {
            "headers": list(self.headers),
            "aliases": dict(self.aliases),
            "label_to_header": dict(self.label_to_header),
            "meta_to_header": dict(self.meta_to_header),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProjectSchema":
        return cls(
            headers=tuple(str(h) for h in data["headers"]),
            aliases=dict(data.get("aliases", {})),
            label_to_header=dict(data.get("label_to_header", {})),
            meta_to_header=dict(data.get("meta_to_header", {})),
        )


@dataclass(frozen=True)
class SummaryTable:
    level: str                                 # file | project
    headers: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    provenance: tuple[tuple, ...]              # per row: (doc_id, kind, source_id) triples

    def __post_init__(self):
        if self.level not in ("file", "project"):
            raise ValueError(f"level must be file or project, got {self.level!r}")
        if len(self.rows) != len(self.provenance):
            raise ValueError("one provenance entry per row required")
        for row in self.rows:
            if len(row) != len(self.headers):
                raise ValueError("row width must match headers")

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "headers": list(self.headers),
            "rows": [list(r) for r in self.rows],
            "provenance": [[list(t) for t in row] for row in self.provenance],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SummaryTable":
        return cls(
            level=str(data["level"]),
            headers=tuple(str(h) for h in data["headers"]),
            rows=tuple(tuple(str(c) for c in r) for r in data["rows"]),
            provenance=tuple(
                tuple((str(d), str(k), str(s)) for d, k, s in row)
                for row in data["provenance"]),
        )


def match_header(raw: str, schema: ProjectSchema) -> str | None:
    """Schema header for a raw table header, or None.

    A normalized exact match wins; otherwise the alias map is consulted
    with the same normalization on its keys.
    """
    norm = normalize_header(raw)
    if not norm:
        return None
    for header in schema.headers:
        if normalize_header(header) == norm:
            return header
    for alias, header in schema.aliases.items():
        if normalize_header(alias) == norm:
            return header
    return None


def find_header_row(matrix: list[list[str]],
                    schema: ProjectSchema) -> tuple[int, dict]:
    """First row where matched cells are the majority of non-empty cells.

    Returns (row index, {column index: schema header}).  Raises
    NoHeaderRowFound when no row qualifies.
    """
    for ri, row in enumerate(matrix):
        non_empty = [(ci, cell) for ci, cell in enumerate(row) if cell.strip()]
        if not non_empty:
            continue
        col_map: dict[int, str] = {}
        for ci, cell in non_empty:
            header = match_header(cell, schema)
            if header is not None and header not in col_map.values():
                col_map[ci] = header
        if len(col_map) * 2 > len(non_empty):
            return ri, col_map
    raise NoHeaderRowFound("no row matches a majority of schema headers")


def _fmt_float(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-") else "0"


def _broadcast_values(doc: DocumentRecord, schema: ProjectSchema,
                      meta: MetaInfo | None, annotations, geo_points):
    """Per-file fill-in values and their provenance triples."""
    values: dict[str, str] = {}
    prov: list[tuple[str, str, str]] = []
    if meta is not None and schema.meta_to_header:
        used = False
        for fld, header in schema.meta_to_header.items():
            raw = getattr(meta, fld, None)
            if raw is None or raw == "" or raw == []:
                continue
            if isinstance(raw, (list, tuple)):
                text = "; ".join(str(v) for v in raw)
            else:
                text = str(raw)
            values[header] = text
            used = True
        if used:
            prov.append((doc.doc_id, "meta", doc.doc_id))
    if geo_points:
        point = geo_points[0]
        lon_h = match_header("longitude", schema)
        lat_h = match_header("latitude", schema)
        used = False
        if lon_h is not None:
            values[lon_h] = _fmt_float(point.longitude)
            used = True
        if lat_h is not None:
            values[lat_h] = _fmt_float(point.latitude)
            used = True
        if used:
            prov.append((doc.doc_id, "map", "0"))
    if annotations and schema.label_to_header:
        ordered = sorted(annotations,
                         key=lambda a: (a.page_index, a.char_span[0], a.char_span[1]))
        for label_id, header in schema.label_to_header.items():
            first = next((a for a in ordered if a.label_id == label_id), None)
            if first is None:
                continue
            values[header] = first.surface_text
            prov.append((doc.doc_id, "text", label_id))
    return values, prov


def integrate_file(doc: DocumentRecord, artifacts, schema: ProjectSchema,
                   meta: MetaInfo | None = None, annotations=(),
                   geo_points=()) -> tuple[SummaryTable, list[str]]:
    """One summary table for one file, plus non-fatal warnings.

    Only confirmed table artifacts contribute rows.  A confirmed table
    without a recognizable header row is skipped with a warning.  With no
    contributing table at all the file still yields a single row holding
    just the broadcast values.
    """
    fills, fill_prov = _broadcast_values(doc, schema, meta, annotations,
                                         geo_points)
    warnings: list[str] = []
    rows: list[tuple[str, ...]] = []
    prov: list[tuple] = []
    for art in artifacts:
        if art.stage != "confirmed":
            continue
        matrix = export_table(art)
        try:
            hdr_idx, col_map = find_header_row(matrix, schema)
        except NoHeaderRowFound:
            warnings.append(f"table {art.table_id}: no header row recognized")
            continue
        for raw in matrix[hdr_idx + 1:]:
            cells = {h: "" for h in schema.headers}
            for ci, header in col_map.items():
                cells[header] = raw[ci].strip()
            for header, value in fills.items():
                if not cells[header]:
                    cells[header] = value
            rows.append(tuple(cells[h] for h in schema.headers))
            prov.append(tuple([(doc.doc_id, "table", art.table_id)] + fill_prov))
    if not rows:
        cells = {h: "" for h in schema.headers}
        cells.update(fills)
        rows.append(tuple(cells[h] for h in schema.headers))
        prov.append(tuple(fill_prov))
    return (
        SummaryTable("file", tuple(schema.headers), tuple(rows), tuple(prov)),
        warnings,
    )


def integrate_project(file_tables, schema: ProjectSchema) -> SummaryTable:
    """Stacks per-file tables in the given order.

    Every input must be a file-level table over exactly the schema
    headers; anything else raises SchemaMismatch.  With no input files
    the result is header-only.
    """
    headers = tuple(schema.headers)
    rows: list[tuple[str, ...]] = []
    prov: list[tuple] = []
    for t in file_tables:
        if t.level != "file":
            raise SchemaMismatch(f"expected a file-level table, got {t.level!r}")
        if tuple(t.headers) != headers:
            raise SchemaMismatch(
                f"headers {list(t.headers)} do not match schema {list(headers)}")
        rows.extend(t.rows)
        prov.extend(t.provenance)
    return SummaryTable("project", headers, tuple(rows), tuple(prov))


def export_csv(table: SummaryTable) -> str:
    """The summary table as CSV: header row first, CRLF line endings,
    quoting only where needed."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.headers)
    for row in table.rows:
        writer.writerow(row)
    return buf.getvalue()


def export_provenance_csv(table: SummaryTable) -> str:
    """Sidecar CSV: one line per (row, source) pair, rows numbered from 0."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["row_index", "doc_id", "kind", "source_id"])
    for i, sources in enumerate(table.provenance):
        for doc_id, kind, source_id in sources:
            writer.writerow([i, doc_id, kind, source_id])
    return buf.getvalue()
