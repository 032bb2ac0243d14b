"""Cell lattice: a region tiled by bounds and a span partition.

A grid covers its region with R x C base cells defined by strictly
increasing y bounds (bottom-up, page points) and x bounds; the region
bbox always equals the outer bounds.  Span/row/column indices in the
editing API are visual: row 0 is the top row, column 0 the leftmost.
Cell spans tile the base grid exactly; a merged cell is a span wider or
taller than one unit.  All edit operations are pure and return a new
grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from statistics import median

from ..errors import (
    AlreadyUnit,
    CannotDeleteLast,
    IndexOutOfRange,
    PartialSpanOverlap,
    SpanOutOfRange,
)
from ..model import Region

__all__ = [
    "CellSpan", "CellGrid", "unit_grid",
    "merge_cells", "split_cell", "set_cell",
    "add_row", "delete_row", "add_column", "delete_column",
]


@dataclass(frozen=True)
class CellSpan:
    """One logical cell: anchored at (row0, col0) counted from the top-left,
    covering row_extent x col_extent base cells, holding extracted text."""

    row0: int
    col0: int
    row_extent: int = 1
    col_extent: int = 1
    content: str = ""

    def covers(self, r: int, c: int) -> bool:
        return (self.row0 <= r < self.row0 + self.row_extent
                and self.col0 <= c < self.col0 + self.col_extent)

    def to_json(self) -> dict:
        return {
            "row0": self.row0, "col0": self.col0,
            "row_extent": self.row_extent, "col_extent": self.col_extent,
            "content": self.content,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CellSpan":
        return cls(
            row0=int(data["row0"]), col0=int(data["col0"]),
            row_extent=int(data.get("row_extent", 1)),
            col_extent=int(data.get("col_extent", 1)),
            content=str(data.get("content", "")),
        )


@dataclass(frozen=True)
class CellGrid:
    region: Region
    row_bounds: tuple[float, ...]     # increasing y, bottom edge first
    col_bounds: tuple[float, ...]     # increasing x, left edge first
    spans: tuple[CellSpan, ...]

    def __post_init__(self):
        if len(self.row_bounds) < 2 or len(self.col_bounds) < 2:
            raise ValueError("grid needs at least one row and one column")
        for seq, what in ((self.row_bounds, "row"), (self.col_bounds, "col")):
            for a, b in zip(seq, seq[1:]):
                if not b > a:
                    raise ValueError(f"{what} bounds must be strictly increasing")
        x0, y0, x1, y1 = self.region.bbox
        if (x0, y0, x1, y1) != (self.col_bounds[0], self.row_bounds[0],
                                self.col_bounds[-1], self.row_bounds[-1]):
            raise ValueError("region bbox must equal the outer bounds")

    @property
    def n_rows(self) -> int:
        return len(self.row_bounds) - 1

    @property
    def n_cols(self) -> int:
        return len(self.col_bounds) - 1

    def row_interval(self, r: int) -> tuple[float, float]:
        """Y interval (low, high) of visual row r; row 0 is the top row."""
        if not 0 <= r < self.n_rows:
            raise IndexOutOfRange(f"row {r} outside 0..{self.n_rows - 1}")
        k = self.n_rows - r
        return (self.row_bounds[k - 1], self.row_bounds[k])

    def col_interval(self, c: int) -> tuple[float, float]:
        if not 0 <= c < self.n_cols:
            raise IndexOutOfRange(f"col {c} outside 0..{self.n_cols - 1}")
        return (self.col_bounds[c], self.col_bounds[c + 1])

    def span_rect(self, span: CellSpan) -> tuple[float, float, float, float]:
        x0 = self.col_bounds[span.col0]
        x1 = self.col_bounds[span.col0 + span.col_extent]
        top_k = self.n_rows - span.row0
        bot_k = self.n_rows - (span.row0 + span.row_extent)
        return (x0, self.row_bounds[bot_k], x1, self.row_bounds[top_k])

    def span_at(self, r: int, c: int) -> CellSpan:
        if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
            raise IndexOutOfRange(
                f"cell ({r}, {c}) outside {self.n_rows}x{self.n_cols}")
        for span in self.spans:
            if span.covers(r, c):
                return span
        raise ValueError(f"partition hole at ({r}, {c})")

    def check_partition(self) -> None:
        """Every base cell must be covered by exactly one span."""
        cover = set()
        for span in self.spans:
            if span.row0 < 0 or span.col0 < 0 or span.row_extent < 1 or span.col_extent < 1:
                raise ValueError(f"bad span geometry {span}")
            if (span.row0 + span.row_extent > self.n_rows
                    or span.col0 + span.col_extent > self.n_cols):
                raise ValueError(
                    f"span {span} exceeds grid {self.n_rows}x{self.n_cols}")
            for r in range(span.row0, span.row0 + span.row_extent):
                for c in range(span.col0, span.col0 + span.col_extent):
                    if (r, c) in cover:
                        raise ValueError(f"cell ({r}, {c}) covered twice")
                    cover.add((r, c))
        if len(cover) != self.n_rows * self.n_cols:
            missing = self.n_rows * self.n_cols - len(cover)
            raise ValueError(f"partition has {missing} uncovered cells")

    def to_json(self) -> dict:
        return {
            "region": self.region.to_json(),
            "row_bounds": list(self.row_bounds),
            "col_bounds": list(self.col_bounds),
            "spans": [s.to_json() for s in self.spans],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CellGrid":
        return cls(
            region=Region.from_json(data["region"]),
            row_bounds=tuple(float(v) for v in data["row_bounds"]),
            col_bounds=tuple(float(v) for v in data["col_bounds"]),
            spans=tuple(CellSpan.from_json(s) for s in data.get("spans", [])),
        )


def _sorted_spans(spans) -> tuple[CellSpan, ...]:
    return tuple(sorted(spans, key=lambda s: (s.row0, s.col0)))


def _rebuild(grid: CellGrid, row_bounds, col_bounds, spans) -> CellGrid:
    """New grid with the region bbox tracking the outer bounds."""
    rb, cb = tuple(row_bounds), tuple(col_bounds)
    region = replace(grid.region, bbox=(cb[0], rb[0], cb[-1], rb[-1]))
    return CellGrid(region, rb, cb, _sorted_spans(spans))


def unit_grid(region: Region, row_bounds, col_bounds) -> CellGrid:
    """All-unit grid over the given bounds."""
    rb = tuple(float(v) for v in row_bounds)
    cb = tuple(float(v) for v in col_bounds)
    rows, cols = len(rb) - 1, len(cb) - 1
    spans = tuple(CellSpan(r, c) for r in range(rows) for c in range(cols))
    region = replace(region, bbox=(cb[0], rb[0], cb[-1], rb[-1]))
    return CellGrid(region, rb, cb, spans)


# --- content edits ----------------------------------------------------------

def set_cell(grid: CellGrid, row: int, col: int, content: str) -> CellGrid:
    """Replaces the text of the span covering (row, col)."""
    target = grid.span_at(row, col)
    spans = tuple(
        replace(s, content=content) if s is target else s
        for s in grid.spans
    )
    return replace(grid, spans=spans)


def merge_cells(grid: CellGrid, row_range: tuple[int, int],
                col_range: tuple[int, int]) -> CellGrid:
    """Merges the rectangle of base cells given by inclusive ranges.

    The rectangle must cover whole spans; a span straddling its border
    raises PartialSpanOverlap.  Text of the merged spans is joined with a
    single space in reading order.
    """
    r_lo, r_hi = int(row_range[0]), int(row_range[1])
    c_lo, c_hi = int(col_range[0]), int(col_range[1])
    if r_lo > r_hi or c_lo > c_hi:
        raise SpanOutOfRange(f"empty range {row_range} x {col_range}")
    if r_lo < 0 or c_lo < 0 or r_hi >= grid.n_rows or c_hi >= grid.n_cols:
        raise SpanOutOfRange(
            f"rectangle rows {row_range} cols {col_range} exceeds grid "
            f"{grid.n_rows}x{grid.n_cols}")
    inside, outside = [], []
    for s in grid.spans:
        overlaps = not (s.row0 + s.row_extent <= r_lo or s.row0 > r_hi
                        or s.col0 + s.col_extent <= c_lo or s.col0 > c_hi)
        if not overlaps:
            outside.append(s)
        elif (r_lo <= s.row0 and s.row0 + s.row_extent <= r_hi + 1
              and c_lo <= s.col0 and s.col0 + s.col_extent <= c_hi + 1):
            inside.append(s)
        else:
            raise PartialSpanOverlap(
                f"span at ({s.row0},{s.col0}) straddles the merge rectangle")
    inside.sort(key=lambda s: (s.row0, s.col0))
    content = " ".join(s.content for s in inside if s.content)
    merged = CellSpan(r_lo, c_lo, r_hi - r_lo + 1, c_hi - c_lo + 1, content)
    return replace(grid, spans=_sorted_spans(outside + [merged]))


def split_cell(grid: CellGrid, span_index: int) -> CellGrid:
    """Splits the span at `span_index` back into unit cells; its text stays
    in the top-left unit."""
    if not 0 <= span_index < len(grid.spans):
        raise IndexOutOfRange(
            f"span index {span_index} outside 0..{len(grid.spans) - 1}")
    target = grid.spans[span_index]
    if target.row_extent == 1 and target.col_extent == 1:
        raise AlreadyUnit(
            f"span {span_index} at ({target.row0},{target.col0}) is already a unit cell")
    units = [
        CellSpan(r, c, 1, 1,
                 target.content if (r == target.row0 and c == target.col0) else "")
        for r in range(target.row0, target.row0 + target.row_extent)
        for c in range(target.col0, target.col0 + target.col_extent)
    ]
    others = [s for i, s in enumerate(grid.spans) if i != span_index]
    return replace(grid, spans=_sorted_spans(others + units))


# --- structure edits --------------------------------------------------------

def _median_gap(bounds) -> float:
    return median(b - a for a, b in zip(bounds, bounds[1:]))


def add_row(grid: CellGrid, at: int) -> CellGrid:
    """Inserts a new row boundary at position `at` of row_bounds.

    Interior positions split the enclosing interval at its midpoint: a
    span covering both halves of the split base row grows by one extent,
    while a unit-height span keeps the upper half and a fresh empty cell
    appears in the lower half.  Position 0 extends the region downward by
    the median row height, position n_rows+1 extends it upward; either
    way the new outer row is fresh empty cells.
    """
    rows = grid.n_rows
    if not 0 <= at <= rows + 1:
        raise IndexOutOfRange(f"boundary position {at} outside 0..{rows + 1}")
    step = _median_gap(grid.row_bounds)
    if at == 0:
        rb = (grid.row_bounds[0] - step,) + grid.row_bounds
        fresh = [CellSpan(rows, c) for c in range(grid.n_cols)]
        return _rebuild(grid, rb, grid.col_bounds, grid.spans + tuple(fresh))
    if at == rows + 1:
        rb = grid.row_bounds + (grid.row_bounds[-1] + step,)
        moved = [replace(s, row0=s.row0 + 1) for s in grid.spans]
        fresh = [CellSpan(0, c) for c in range(grid.n_cols)]
        return _rebuild(grid, rb, grid.col_bounds, moved + fresh)
    mid = (grid.row_bounds[at - 1] + grid.row_bounds[at]) / 2.0
    rb = grid.row_bounds[:at] + (mid,) + grid.row_bounds[at:]
    split_row = rows - at    # visual index of the base row being split
    new_spans: list[CellSpan] = []
    for s in grid.spans:
        if s.row0 + s.row_extent - 1 < split_row:
            new_spans.append(s)
        elif s.row0 > split_row:
            new_spans.append(replace(s, row0=s.row0 + 1))
        elif s.row_extent > 1:
            new_spans.append(replace(s, row_extent=s.row_extent + 1))
        else:
            new_spans.append(s)
            for c in range(s.col0, s.col0 + s.col_extent):
                new_spans.append(CellSpan(split_row + 1, c))
    return _rebuild(grid, rb, grid.col_bounds, new_spans)


def delete_row(grid: CellGrid, at: int) -> CellGrid:
    """Removes visual row `at`; rows below move up to close the gap.

    Unit-height spans on the row are dropped with their text; spans
    crossing the row shrink by one extent.
    """
    rows = grid.n_rows
    if rows == 1:
        raise CannotDeleteLast("cannot delete the only row")
    if not 0 <= at < rows:
        raise IndexOutOfRange(f"row {at} outside 0..{rows - 1}")
    lo, hi = grid.row_interval(at)
    h = hi - lo
    k = rows - at
    rb = tuple(b + h for b in grid.row_bounds[:k - 1]) + grid.row_bounds[k:]
    new_spans: list[CellSpan] = []
    for s in grid.spans:
        if s.row0 + s.row_extent - 1 < at:
            new_spans.append(s)
        elif s.row0 > at:
            new_spans.append(replace(s, row0=s.row0 - 1))
        elif s.row_extent > 1:
            shifted = replace(s, row_extent=s.row_extent - 1)
            new_spans.append(shifted)
        # unit-height span on the deleted row: dropped
    return _rebuild(grid, rb, grid.col_bounds, new_spans)


def add_column(grid: CellGrid, at: int) -> CellGrid:
    """Column counterpart of add_row over col_bounds positions 0..n_cols+1;
    position 0 extends the region to the left, the last to the right."""
    cols = grid.n_cols
    if not 0 <= at <= cols + 1:
        raise IndexOutOfRange(f"boundary position {at} outside 0..{cols + 1}")
    step = _median_gap(grid.col_bounds)
    if at == 0:
        cb = (grid.col_bounds[0] - step,) + grid.col_bounds
        moved = [replace(s, col0=s.col0 + 1) for s in grid.spans]
        fresh = [CellSpan(r, 0) for r in range(grid.n_rows)]
        return _rebuild(grid, grid.row_bounds, cb, moved + fresh)
    if at == cols + 1:
        cb = grid.col_bounds + (grid.col_bounds[-1] + step,)
        fresh = [CellSpan(r, cols) for r in range(grid.n_rows)]
        return _rebuild(grid, grid.row_bounds, cb, grid.spans + tuple(fresh))
    mid = (grid.col_bounds[at - 1] + grid.col_bounds[at]) / 2.0
    cb = grid.col_bounds[:at] + (mid,) + grid.col_bounds[at:]
    split_col = at - 1    # visual index of the base column being split
    new_spans: list[CellSpan] = []
    for s in grid.spans:
        if s.col0 + s.col_extent - 1 < split_col:
            new_spans.append(s)
        elif s.col0 > split_col:
            new_spans.append(replace(s, col0=s.col0 + 1))
        elif s.col_extent > 1:
            new_spans.append(replace(s, col_extent=s.col_extent + 1))
        else:
            new_spans.append(s)
            for r in range(s.row0, s.row0 + s.row_extent):
                new_spans.append(CellSpan(r, split_col + 1))
    return _rebuild(grid, grid.row_bounds, cb, new_spans)


def delete_column(grid: CellGrid, at: int) -> CellGrid:
    """Removes column `at`; columns to the right move left."""
    cols = grid.n_cols
    if cols == 1:
        raise CannotDeleteLast("cannot delete the only column")
    if not 0 <= at < cols:
        raise IndexOutOfRange(f"col {at} outside 0..{cols - 1}")
    lo, hi = grid.col_interval(at)
    w = hi - lo
    cb = grid.col_bounds[:at + 1] + tuple(b - w for b in grid.col_bounds[at + 2:])
    new_spans: list[CellSpan] = []
    for s in grid.spans:
        if s.col0 + s.col_extent - 1 < at:
            new_spans.append(s)
        elif s.col0 > at:
            new_spans.append(replace(s, col0=s.col0 - 1))
        elif s.col_extent > 1:
            new_spans.append(replace(s, col_extent=s.col_extent - 1))
    return _rebuild(grid, grid.row_bounds, cb, new_spans)
