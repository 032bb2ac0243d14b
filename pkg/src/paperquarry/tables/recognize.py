"""Rule-based table detection and structure/content recognition.

Structure recovery prefers rulings: clustered horizontal and vertical
lines become row and column bounds.  When an axis has fewer than two
ruling clusters the bounds are inferred from text layout instead - row
breaks from unusually large baseline gaps, column breaks from whitespace
valleys in the x projection.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import replace

from ..config import PipelineConfig
from ..errors import EmptyRegion, UnknownAdapter, UnknownDetector
from ..model import BBox, PageContent, Region, TextBox
from .grid import CellGrid, CellSpan, unit_grid

__all__ = ["detect_table_regions", "recognize_structure", "recognize_content",
           "TABLE_DETECTORS", "OCR_ADAPTERS"]


def _seg_is_horizontal(seg) -> bool:
    x0, y0, x1, y1 = seg
    return abs(y1 - y0) <= abs(x1 - x0)


def _center(box: TextBox) -> tuple[float, float]:
    x0, y0, x1, y1 = box.bbox
    return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


def _in_rect(x: float, y: float, rect: BBox, pad: float = 0.0) -> bool:
    x0, y0, x1, y1 = rect
    return x0 - pad <= x <= x1 + pad and y0 - pad <= y <= y1 + pad


# --- detection --------------------------------------------------------------

def _boxes_touch(a: BBox, b: BBox, pad: float) -> bool:
    return (a[0] - pad <= b[2] and b[0] - pad <= a[2]
            and a[1] - pad <= b[3] and b[1] - pad <= a[3])


def _detect_rulings(page: PageContent, cfg: PipelineConfig) -> list[BBox]:
    segs = page.ruling_segments
    n = len(segs)
    if n == 0:
        return []
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    pad = cfg.detect_cluster_pad_pt
    rects = [(min(s[0], s[2]), min(s[1], s[3]), max(s[0], s[2]), max(s[1], s[3]))
             for s in segs]
    for i in range(n):
        for j in range(i + 1, n):
            if _boxes_touch(rects[i], rects[j], pad):
                union(i, j)
    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)
    out: list[BBox] = []
    for members in clusters.values():
        n_h = sum(1 for i in members if _seg_is_horizontal(segs[i]))
        n_v = len(members) - n_h
        if n_h < 2 or n_v < 2:
            continue
        x0 = min(rects[i][0] for i in members)
        y0 = min(rects[i][1] for i in members)
        x1 = max(rects[i][2] for i in members)
        y1 = max(rects[i][3] for i in members)
        if x1 - x0 < cfg.detect_min_extent_pt or y1 - y0 < cfg.detect_min_extent_pt:
            continue
        out.append((x0, y0, x1, y1))
    # merge overlapping candidates until stable
    changed = True
    while changed and len(out) > 1:
        changed = False
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                if _boxes_touch(out[i], out[j], 0.0):
                    a, b = out[i], out[j]
                    merged = (min(a[0], b[0]), min(a[1], b[1]),
                              max(a[2], b[2]), max(a[3], b[3]))
                    out = [r for k, r in enumerate(out) if k not in (i, j)]
                    out.append(merged)
                    changed = True
                    break
            if changed:
                break
    out.sort(key=lambda r: (-r[3], r[0]))
    return out


TABLE_DETECTORS = {"rulings": _detect_rulings}


def detect_table_regions(page: PageContent, cfg: PipelineConfig | None = None,
                         detector: str = "rulings") -> list[Region]:
    """Candidate table regions on a page, ordered top to bottom."""
    cfg = cfg or PipelineConfig()
    try:
        fn = TABLE_DETECTORS[detector]
    except KeyError:
        raise UnknownDetector(f"no table detector named {detector!r}",
                              known=sorted(TABLE_DETECTORS))
    return [Region(page.page_index, rect, source="detected")
            for rect in fn(page, cfg)]


# --- structure --------------------------------------------------------------

def _cluster_positions(values: list[float], merge_dist: float) -> list[float]:
    """Groups close 1-d positions; each cluster is represented by its mean."""
    if not values:
        return []
    values = sorted(values)
    groups: list[list[float]] = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] <= merge_dist:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [sum(g) / len(g) for g in groups]


def _rect_segments(page: PageContent, rect: BBox, cfg: PipelineConfig):
    pad = cfg.ruling_merge_pt
    h, v = [], []
    for seg in page.ruling_segments:
        x0, y0, x1, y1 = seg
        mx, my = (x0 + x1) / 2.0, (y0 + y1) / 2.0
        if not _in_rect(mx, my, rect, pad):
            continue
        if _seg_is_horizontal(seg):
            h.append((y0 + y1) / 2.0)
        else:
            v.append((x0 + x1) / 2.0)
    return h, v


def _rows_from_text(boxes: list[TextBox], cfg: PipelineConfig) -> list[float]:
    """Interior row boundaries inferred from baseline gaps."""
    if not boxes:
        return []
    heights = sorted(b.bbox[3] - b.bbox[1] for b in boxes)
    med_h = heights[len(heights) // 2]
    # group boxes into visual lines by y-center
    lines: list[list[TextBox]] = []
    for box in sorted(boxes, key=lambda b: -_center(b)[1]):
        cy = _center(box)[1]
        if lines and abs(_center(lines[-1][0])[1] - cy) <= med_h * 0.6:
            lines[-1].append(box)
        else:
            lines.append([box])
    extents = [
        (min(b.bbox[1] for b in line), max(b.bbox[3] for b in line))
        for line in lines
    ]
    line_heights = sorted(hi - lo for lo, hi in extents)
    med_line = line_heights[len(line_heights) // 2] or med_h
    bottoms = [lo for lo, _ in extents]
    boundaries = []
    for i in range(len(extents) - 1):
        gap = bottoms[i] - bottoms[i + 1]    # baseline-to-baseline, top-down
        if gap > cfg.row_gap_factor * med_line:
            upper_lo = extents[i][0]
            lower_hi = extents[i + 1][1]
            boundaries.append((upper_lo + lower_hi) / 2.0)
    return boundaries


def _cols_from_text(boxes: list[TextBox], cfg: PipelineConfig) -> list[float]:
    """Interior column boundaries at whitespace valleys in the x projection."""
    if not boxes:
        return []
    char_ws = sorted(
        (b.bbox[2] - b.bbox[0]) / max(1, len(b.text)) for b in boxes
    )
    med_cw = char_ws[len(char_ws) // 2]
    intervals = sorted((b.bbox[0], b.bbox[2]) for b in boxes)
    merged: list[list[float]] = [list(intervals[0])]
    for x0, x1 in intervals[1:]:
        if x0 <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], x1)
        else:
            merged.append([x0, x1])
    boundaries = []
    for (_, right), (nxt_left, _) in zip(merged, merged[1:]):
        if nxt_left - right > cfg.col_gap_factor * med_cw:
            boundaries.append((right + nxt_left) / 2.0)
    return boundaries


def recognize_structure(page: PageContent, region: Region,
                        cfg: PipelineConfig | None = None) -> CellGrid:
    """Row and column bounds for the table inside `region`, as an all-unit
    grid anchored to that region.

    Raises EmptyRegion when the region holds neither rulings nor text.
    """
    cfg = cfg or PipelineConfig()
    rect = region.bbox
    x0, y0, x1, y1 = rect
    if not (x1 > x0 and y1 > y0):
        raise EmptyRegion(f"degenerate region {rect}")
    boxes = [b for b in page.text_boxes if _in_rect(*_center(b), rect)]
    h_pos, v_pos = _rect_segments(page, rect, cfg)
    h_clusters = _cluster_positions(h_pos, cfg.ruling_merge_pt)
    v_clusters = _cluster_positions(v_pos, cfg.ruling_merge_pt)
    if not boxes and not h_clusters and not v_clusters:
        raise EmptyRegion("region holds no rulings and no text")

    tol = cfg.ruling_merge_pt
    if len(h_clusters) >= 2:
        interior_rows = [y for y in h_clusters if y0 + tol < y < y1 - tol]
    else:
        interior_rows = _rows_from_text(boxes, cfg)
    if len(v_clusters) >= 2:
        interior_cols = [x for x in v_clusters if x0 + tol < x < x1 - tol]
    else:
        interior_cols = _cols_from_text(boxes, cfg)
    row_bounds = [y0] + _sanitize_interior(interior_rows, y0, y1) + [y1]
    col_bounds = [x0] + _sanitize_interior(interior_cols, x0, x1) + [x1]
    return unit_grid(region, row_bounds, col_bounds)


def _sanitize_interior(values: list[float], lo: float, hi: float,
                       eps: float = 1e-6) -> list[float]:
    out: list[float] = []
    for v in sorted(values):
        if v <= lo + eps or v >= hi - eps:
            continue
        if out and v - out[-1] <= eps:
            continue
        out.append(v)
    return out


# --- content ----------------------------------------------------------------

def _ocr_embedded(page: PageContent, rect: BBox) -> str:
    """Fallback text source: joins boxes that merely intersect the rect."""
    x0, y0, x1, y1 = rect
    hits = [
        b for b in page.text_boxes
        if b.bbox[0] < x1 and b.bbox[2] > x0 and b.bbox[1] < y1 and b.bbox[3] > y0
    ]
    hits.sort(key=lambda b: (-_center(b)[1], b.bbox[0]))
    return " ".join(b.text for b in hits)


OCR_ADAPTERS = {"embedded": _ocr_embedded}


def _locate_index(bounds: tuple[float, ...], v: float) -> int | None:
    """Interval index for a coordinate; an exact boundary hit belongs to the
    interval above it (larger index)."""
    if v < bounds[0] or v > bounds[-1]:
        return None
    idx = bisect_right(bounds, v) - 1
    return min(idx, len(bounds) - 2)


def recognize_content(page: PageContent, grid: CellGrid,
                      cfg: PipelineConfig | None = None,
                      ocr: str | None = "embedded") -> CellGrid:
    """Fills span contents from text boxes whose centers fall inside them.

    A center exactly on a shared boundary goes to the left / upper cell.
    Spans left empty are offered to the named OCR adapter; pass None to
    skip the fallback entirely.
    """
    cfg = cfg or PipelineConfig()
    adapter = None
    if ocr is not None:
        try:
            adapter = OCR_ADAPTERS[ocr]
        except KeyError:
            raise UnknownAdapter(f"no OCR adapter named {ocr!r}",
                                 known=sorted(OCR_ADAPTERS))

    rows = grid.n_rows
    anchor_of: dict[tuple[int, int], CellSpan] = {}
    for span in grid.spans:
        for r in range(span.row0, span.row0 + span.row_extent):
            for c in range(span.col0, span.col0 + span.col_extent):
                anchor_of[(r, c)] = span

    collected: dict[CellSpan, list[TextBox]] = {s: [] for s in grid.spans}
    for box in page.text_boxes:
        cx, cy = _center(box)
        ci = _locate_index(grid.col_bounds, cx)
        yi = _locate_index(grid.row_bounds, cy)
        if ci is None or yi is None:
            continue
        # y interval index counts bottom-up; on an exact boundary the upper
        # cell wins, which bisect toward larger y already provides
        r = rows - 1 - yi
        # x boundary tie should go left, so nudge exact hits down one cell
        if ci > 0 and cx == grid.col_bounds[ci]:
            ci -= 1
        collected[anchor_of[(r, ci)]].append(box)

    # the fallback must only see boxes no span has already claimed,
    # or boundary-straddling text would be counted twice
    claimed = {id(b) for boxes in collected.values() for b in boxes}
    leftover = replace(page, text_boxes=[
        b for b in page.text_boxes if id(b) not in claimed])

    new_spans = []
    for span in grid.spans:
        boxes = collected[span]
        boxes.sort(key=lambda b: (-_center(b)[1], b.bbox[0]))
        text = " ".join(b.text for b in boxes)
        if not text and adapter is not None:
            text = adapter(leftover, grid.span_rect(span))
        new_spans.append(replace(span, content=text))
    return replace(grid, spans=tuple(sorted(
        new_spans, key=lambda s: (s.row0, s.col0))))
