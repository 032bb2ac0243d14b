"""Synthetic fixture generators for tables, maps, and documents.

Each generator returns the drawn artifact together with the ground truth
used to draw it, so a test can treat the generation parameters as the
expected answer instead of re-deriving them from the output.
"""

from __future__ import annotations

import io
import random
from dataclasses import dataclass

from reportlab.pdfbase import pdfmetrics
from reportlab.pdfgen import canvas as rl_canvas

from .model import BBox, PageContent, TextBox

__all__ = [
    "RuledTable", "make_ruled_table", "ruled_table_page", "ruled_table_pdf",
    "BorderlessTable", "make_borderless_table", "borderless_page",
    "MapSheet", "make_map_sheet", "map_page", "map_pdf",
    "article_pdf",
]

_WORDS = (
    "basalt", "shale", "quartz", "olivine", "gneiss", "sample", "depth",
    "zone", "unit", "grain", "flux", "delta", "ratio", "phase", "core",
    "site", "age", "mass", "oxide", "vein",
)

PAGE_W = 612.0
PAGE_H = 792.0

_FONT = "Helvetica"


def _str_width(text: str, size: float) -> float:
    return pdfmetrics.stringWidth(text, _FONT, size)


def _fit_text(text: str, size: float, max_w: float) -> str:
    while text and _str_width(text, size) > max_w:
        text = text[:-1]
    return text or "x"


# --- ruled tables -----------------------------------------------------------

@dataclass
class RuledTable:
    """A fully ruled grid with known per-cell text.

    Cell keys are (row, col) with row 0 at the top; bounds are stored
    bottom-up in page coordinates.
    """

    region: BBox
    row_bounds: list[float]
    col_bounds: list[float]
    cells: dict[tuple[int, int], str]
    font_size: float

    @property
    def n_rows(self) -> int:
        return len(self.row_bounds) - 1

    @property
    def n_cols(self) -> int:
        return len(self.col_bounds) - 1

    def cell_rect(self, row: int, col: int) -> BBox:
        rb = self.row_bounds
        top_down = len(rb) - 1 - row
        return (
            self.col_bounds[col], rb[top_down - 1],
            self.col_bounds[col + 1], rb[top_down],
        )


def _partition(rng: random.Random, lo: float, hi: float, n: int) -> list[float]:
    weights = [rng.uniform(0.7, 1.3) for _ in range(n)]
    total = sum(weights)
    bounds = [lo]
    acc = lo
    for w in weights[:-1]:
        acc += (hi - lo) * w / total
        bounds.append(acc)
    bounds.append(hi)
    return bounds


def make_ruled_table(rng: random.Random, rows: int | None = None, cols: int | None = None,
                     region: BBox | None = None, fill: float = 1.0) -> RuledTable:
    rows = rows if rows is not None else rng.randint(1, 8)
    cols = cols if cols is not None else rng.randint(1, 8)
    if region is None:
        width = rng.uniform(330.0, 460.0)
        height = rng.uniform(260.0, 470.0)
        x0 = rng.uniform(60.0, PAGE_W - 60.0 - width)
        y0 = rng.uniform(80.0, PAGE_H - 80.0 - height)
        region = (x0, y0, x0 + width, y0 + height)
    x0, y0, x1, y1 = region
    col_bounds = _partition(rng, x0, x1, cols)
    row_bounds = _partition(rng, y0, y1, rows)
    min_cell_h = min(b - a for a, b in zip(row_bounds, row_bounds[1:]))
    size = max(5.0, min(9.0, min_cell_h - 5.0))
    cells: dict[tuple[int, int], str] = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() >= fill:
                cells[(r, c)] = ""
                continue
            word = rng.choice(_WORDS)
            text = f"{word} {r}{c}" if rng.random() < 0.5 else f"{word}{r}{c}"
            cx0, _, cx1, _ = (col_bounds[c], 0, col_bounds[c + 1], 0)
            cells[(r, c)] = _fit_text(text, size, cx1 - cx0 - 6.0)
    return RuledTable(region, row_bounds, col_bounds, cells, size)


def _table_rulings(table: RuledTable, rng: random.Random | None,
                   jitter: float, split_prob: float) -> list[tuple[float, float, float, float]]:
    x0, y0, x1, y1 = table.region
    segs = []
    for y in table.row_bounds:
        yy = y + (rng.uniform(-jitter, jitter) if rng and jitter else 0.0)
        if rng and rng.random() < split_prob:
            mid = rng.uniform(x0 + 20, x1 - 20)
            segs.append((x0, yy, mid, yy))
            segs.append((mid + 1.0, yy, x1, yy))
        else:
            segs.append((x0, yy, x1, yy))
    for x in table.col_bounds:
        xx = x + (rng.uniform(-jitter, jitter) if rng and jitter else 0.0)
        if rng and rng.random() < split_prob:
            mid = rng.uniform(y0 + 20, y1 - 20)
            segs.append((xx, y0, xx, mid))
            segs.append((xx, mid + 1.0, xx, y1))
        else:
            segs.append((xx, y0, xx, y1))
    return segs


def _cell_boxes(table: RuledTable) -> list[TextBox]:
    boxes = []
    size = table.font_size
    for (r, c), text in table.cells.items():
        if not text:
            continue
        cx0, cy0, cx1, cy1 = table.cell_rect(r, c)
        w = _str_width(text, size)
        tx = cx0 + 3.0
        cy = (cy0 + cy1) / 2.0
        boxes.append(TextBox((tx, cy - size / 2.0, tx + w, cy + size / 2.0), text, size))
    return boxes


def ruled_table_page(table: RuledTable, rng: random.Random | None = None,
                     jitter: float = 0.0, split_prob: float = 0.0,
                     noise_boxes: int = 0) -> PageContent:
    """Renders the table onto a page model, optionally with ruling jitter,
    split rulings, and unrelated text elsewhere on the page."""
    boxes = _cell_boxes(table)
    if noise_boxes and rng:
        x0, y0, x1, y1 = table.region
        for _ in range(noise_boxes):
            text = rng.choice(_WORDS)
            w = _str_width(text, 10.0)
            for _ in range(20):
                bx = rng.uniform(10.0, PAGE_W - w - 10.0)
                by = rng.uniform(10.0, PAGE_H - 20.0)
                if not (x0 - w < bx < x1 + 5 and y0 - 12 < by < y1 + 5):
                    boxes.append(TextBox((bx, by, bx + w, by + 10.0), text, 10.0))
                    break
    return PageContent(
        page_index=0, width_pt=PAGE_W, height_pt=PAGE_H,
        text_boxes=boxes,
        ruling_segments=_table_rulings(table, rng, jitter, split_prob),
    )


def ruled_table_pdf(table: RuledTable, title: str | None = None) -> bytes:
    """Draws the table into a real single-page PDF."""
    buf = io.BytesIO()
    c = rl_canvas.Canvas(buf, pagesize=(PAGE_W, PAGE_H))
    if title:
        c.setFont(_FONT, 14)
        c.drawString(72, PAGE_H - 60, title)
    c.setLineWidth(0.8)
    x0, y0, x1, y1 = table.region
    for y in table.row_bounds:
        c.line(x0, y, x1, y)
    for x in table.col_bounds:
        c.line(x, y0, x, y1)
    size = table.font_size
    c.setFont(_FONT, size)
    asc, desc = pdfmetrics.getAscentDescent(_FONT, size)
    for (r, col), text in table.cells.items():
        if not text:
            continue
        cx0, cy0, cx1, cy1 = table.cell_rect(r, col)
        baseline = (cy0 + cy1) / 2.0 - (asc + desc) / 2.0
        c.drawString(cx0 + 3.0, baseline, text)
    c.showPage()
    c.save()
    return buf.getvalue()


# --- borderless tables ------------------------------------------------------

@dataclass
class BorderlessTable:
    """Aligned text columns with no rulings."""

    region: BBox
    col_count: int
    rows: list[list[str]]
    col_lefts: list[float]
    baselines: list[float]      # top-down
    font_size: float


def make_borderless_table(rng: random.Random, cols: int | None = None,
                          rows: int | None = None) -> BorderlessTable:
    cols = cols if cols is not None else rng.randint(2, 4)
    rows = rows if rows is not None else rng.randint(3, 8)
    size = 10.0
    char_w = _str_width("x", size)
    grid: list[list[str]] = []
    for r in range(rows):
        row = []
        for c in range(cols):
            if rng.random() < 0.5:
                row.append(f"{rng.uniform(0, 99):.2f}")
            else:
                row.append(rng.choice(_WORDS)[: rng.randint(3, 6)])
        grid.append(row)
    col_widths = [
        max(_str_width(grid[r][c], size) for r in range(rows))
        for c in range(cols)
    ]
    # gaps comfortably above the one-character valley threshold
    gaps = [char_w * rng.uniform(2.0, 3.5) for _ in range(cols - 1)]
    x0 = rng.uniform(70.0, 160.0)
    col_lefts = [x0]
    for c in range(cols - 1):
        col_lefts.append(col_lefts[-1] + col_widths[c] + gaps[c])
    line_step = size * 1.9
    y_top = rng.uniform(PAGE_H - 320.0, PAGE_H - 160.0)
    baselines = [y_top - r * line_step for r in range(rows)]
    x_end = col_lefts[-1] + col_widths[-1]
    region = (x0 - 4.0, baselines[-1] - 4.0, x_end + 4.0, y_top + size + 2.0)
    return BorderlessTable(region, cols, grid, col_lefts, baselines, size)


def borderless_page(table: BorderlessTable) -> PageContent:
    boxes = []
    size = table.font_size
    for r, baseline in enumerate(table.baselines):
        for c, text in enumerate(table.rows[r]):
            x = table.col_lefts[c]
            w = _str_width(text, size)
            boxes.append(TextBox((x, baseline - size * 0.21, x + w, baseline + size * 0.72), text, size))
    return PageContent(
        page_index=0, width_pt=PAGE_W, height_pt=PAGE_H,
        text_boxes=boxes, ruling_segments=[],
    )


# --- map sheets -------------------------------------------------------------

@dataclass
class MapSheet:
    """A rectangular map frame with labeled margin ticks.

    lon(px) = x_slope * px + x_intercept, and likewise for lat.
    """

    region: BBox
    x_ticks: list[tuple[float, str, float]]    # (pixel x, label, degrees)
    y_ticks: list[tuple[float, str, float]]
    x_slope: float
    x_intercept: float
    y_slope: float
    y_intercept: float

    def lon_at(self, px: float) -> float:
        return self.x_slope * px + self.x_intercept

    def lat_at(self, py: float) -> float:
        return self.y_slope * py + self.y_intercept


def _fmt_coord(value: float, axis: str, dms: bool) -> str:
    if axis == "x":
        hemi = "E" if value >= 0 else "W"
    else:
        hemi = "N" if value >= 0 else "S"
    v = abs(value)
    if dms:
        deg = int(v)
        minutes = int(round((v - deg) * 60))
        if minutes == 60:
            deg, minutes = deg + 1, 0
        if minutes:
            return f"{deg}°{minutes}′{hemi}"
        return f"{deg}°{hemi}"
    if v == int(v):
        return f"{int(v)}°{hemi}"
    return f"{v:g}°{hemi}"


def make_map_sheet(rng: random.Random, n_x: int = 4, n_y: int = 4,
                   dms: bool = False) -> MapSheet:
    x0 = rng.uniform(80.0, 140.0)
    y0 = rng.uniform(120.0, 200.0)
    width = rng.uniform(300.0, 420.0)
    height = rng.uniform(260.0, 400.0)
    region = (x0, y0, x0 + width, y0 + height)

    def build(n: int, lo_px: float, hi_px: float, axis: str):
        if dms:
            step_deg = rng.choice([0.25, 0.5, 0.75, 1.0])
        else:
            step_deg = float(rng.choice([1, 2, 5, 10]))
        max_abs = 170.0 if axis == "x" else 80.0
        extent = step_deg * (n - 1)
        sign = rng.choice([1.0, -1.0])
        # quarter-degree alignment keeps every label an exact rendering
        # of its value, so parsed ticks reproduce the truth bit-for-bit
        if sign > 0:
            base = rng.randint(int(-max_abs * 4), int((max_abs - extent) * 4)) / 4.0
        else:
            base = rng.randint(int((-max_abs + extent) * 4), int(max_abs * 4)) / 4.0
        values = [base + sign * i * step_deg for i in range(n)]
        span_px = hi_px - lo_px
        margin = span_px * 0.12
        pixels = [lo_px + margin + i * (span_px - 2 * margin) / (n - 1) for i in range(n)]
        slope = (values[-1] - values[0]) / (pixels[-1] - pixels[0])
        intercept = values[0] - slope * pixels[0]
        ticks = [(px, _fmt_coord(v, axis, dms), v) for px, v in zip(pixels, values)]
        return ticks, slope, intercept

    x_ticks, xs, xi = build(n_x, x0, x0 + width, "x")
    y_ticks, ys, yi = build(n_y, y0, y0 + height, "y")
    return MapSheet(region, x_ticks, y_ticks, xs, xi, ys, yi)


def map_page(sheet: MapSheet, label_size: float = 8.0) -> PageContent:
    x0, y0, x1, y1 = sheet.region
    segs = [
        (x0, y0, x1, y0), (x0, y1, x1, y1),
        (x0, y0, x0, y1), (x1, y0, x1, y1),
    ]
    boxes = []
    band_h = (y1 - y0) * 0.08
    band_w = (x1 - x0) * 0.08
    for px, label, _ in sheet.x_ticks:
        w = _str_width(label, label_size)
        cy = y0 - band_h / 2.0
        boxes.append(TextBox(
            (px - w / 2.0, cy - label_size / 2.0, px + w / 2.0, cy + label_size / 2.0),
            label, label_size))
    for py, label, _ in sheet.y_ticks:
        w = _str_width(label, label_size)
        cx = x0 - band_w / 2.0
        boxes.append(TextBox(
            (cx - w / 2.0, py - label_size / 2.0, cx + w / 2.0, py + label_size / 2.0),
            label, label_size))
    return PageContent(
        page_index=0, width_pt=PAGE_W, height_pt=PAGE_H,
        text_boxes=boxes, ruling_segments=segs,
    )


def map_pdf(sheet: MapSheet, label_size: float = 8.0) -> bytes:
    """Draws the map frame and its tick labels into a real PDF.

    Prime marks fall outside the base font encoding, so DMS labels use
    the apostrophe forms the coordinate grammar equally accepts.
    """
    buf = io.BytesIO()
    c = rl_canvas.Canvas(buf, pagesize=(PAGE_W, PAGE_H))
    x0, y0, x1, y1 = sheet.region
    c.setLineWidth(1.0)
    c.rect(x0, y0, x1 - x0, y1 - y0)
    c.setFont(_FONT, label_size)
    asc, desc = pdfmetrics.getAscentDescent(_FONT, label_size)
    band_h = (y1 - y0) * 0.08
    band_w = (x1 - x0) * 0.08

    def draw(label: str, cx: float, cy: float) -> None:
        label = label.replace("\u2032", "'").replace("\u2033", '"')
        w = _str_width(label, label_size)
        c.drawString(cx - w / 2.0, cy - (asc + desc) / 2.0, label)

    for px, label, _ in sheet.x_ticks:
        draw(label, px, y0 - band_h / 2.0)
    for py, label, _ in sheet.y_ticks:
        draw(label, x0 - band_w / 2.0, py)
    c.showPage()
    c.save()
    return buf.getvalue()


# --- article-like documents -------------------------------------------------

def article_pdf(title: str, authors: list[str], body_lines: list[str],
                venue: str | None = None, year: int | None = None,
                abstract: str | None = None,
                set_doc_info: bool = True) -> bytes:
    """A small article-shaped PDF: big title line, author line below it,
    optional venue/year line, then body text."""
    buf = io.BytesIO()
    c = rl_canvas.Canvas(buf, pagesize=(PAGE_W, PAGE_H))
    if set_doc_info:
        c.setTitle(title)
        c.setAuthor("; ".join(authors))
        if abstract:
            c.setSubject(abstract)
    y = PAGE_H - 90
    c.setFont(_FONT, 18)
    c.drawString(72, y, title)
    y -= 26
    c.setFont(_FONT, 11)
    c.drawString(72, y, ", ".join(authors))
    y -= 18
    if venue or year:
        parts = [p for p in (venue, str(year) if year else None) if p]
        c.drawString(72, y, " ".join(parts))
        y -= 18
    y -= 14
    c.setFont(_FONT, 10)
    for line in body_lines:
        if y < 72:
            c.showPage()
            c.setFont(_FONT, 10)
            y = PAGE_H - 72
        c.drawString(72, y, line)
        y -= 14
    c.showPage()
    c.save()
    return buf.getvalue()
