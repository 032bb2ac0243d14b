"""Core document data model: pages, text boxes, meta information.

The JSON field names here are the stored wire format, so renames are
breaking changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

from .errors import PageOutOfRange

BBox = tuple[float, float, float, float]  # x0, y0, x1, y1 in PDF points, origin bottom-left

META_FIELDS = ("title", "authors", "venue", "year", "abstract")

REGION_SOURCES = ("detected", "user_drawn")


@dataclass(frozen=True)
class Region:
    """A rectangular area on one page, either machine-detected or drawn by
    a user."""

    page_index: int
    bbox: BBox
    source: str = "user_drawn"

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate region bbox {self.bbox}")
        if self.source not in REGION_SOURCES:
            raise ValueError(f"unknown region source {self.source!r}")
        if self.page_index < 0:
            raise ValueError("negative page index")

    def to_json(self) -> dict:
        return {"page_index": self.page_index, "bbox": list(self.bbox),
                "source": self.source}

    @classmethod
    def from_json(cls, data: dict) -> "Region":
        return cls(int(data["page_index"]),
                   tuple(float(v) for v in data["bbox"]),
                   str(data.get("source", "user_drawn")))


@dataclass(frozen=True)
class TextBox:
    bbox: BBox
    text: str
    font_size_pt: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if not self.text:
            raise ValueError("empty text box")

    @property
    def center(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.bbox
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


@dataclass
class PageContent:
    page_index: int
    width_pt: float
    height_pt: float
    text_boxes: list[TextBox] = field(default_factory=list)
    ruling_segments: list[BBox] = field(default_factory=list)  # (x0, y0, x1, y1) line segments

    def reading_order(self) -> list[TextBox]:
        """Boxes top-to-bottom, then left-to-right (origin is bottom-left)."""
        return sorted(self.text_boxes, key=lambda b: (-b.bbox[3], b.bbox[0]))

    def text(self) -> str:
        """Concatenated reading-order text, one box per line.

        Annotation char spans index into this string, so the join rule is
        part of the stored-data contract.
        """
        return "\n".join(b.text for b in self.reading_order())

    def to_json(self) -> dict:
        return {
            "page_index": self.page_index,
            "width_pt": self.width_pt,
            "height_pt": self.height_pt,
            "text_boxes": [
                {"bbox": list(b.bbox), "text": b.text, "font_size_pt": b.font_size_pt}
                for b in self.text_boxes
            ],
            "ruling_segments": [list(s) for s in self.ruling_segments],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PageContent":
        return cls(
            page_index=data["page_index"],
            width_pt=data["width_pt"],
            height_pt=data["height_pt"],
            text_boxes=[
                TextBox(tuple(b["bbox"]), b["text"], b["font_size_pt"])
                for b in data["text_boxes"]
            ],
            ruling_segments=[tuple(s) for s in data["ruling_segments"]],
        )


@dataclass
class MetaInfo:
    title: str = ""
    authors: list[str] = field(default_factory=list)
    venue: str = ""
    year: Optional[int] = None
    abstract: str = ""

    def __post_init__(self):
        if self.year is not None and not (1500 <= self.year <= 2100):
            raise ValueError(f"year {self.year} outside [1500, 2100]")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "MetaInfo":
        return cls(
            title=data.get("title", ""),
            authors=list(data.get("authors") or []),
            venue=data.get("venue", ""),
            year=data.get("year"),
            abstract=data.get("abstract", ""),
        )


@dataclass
class MetaCandidate:
    """One adapter's partial view of a document's meta information.

    ``fields`` holds only the keys the adapter produced; absent keys
    abstain from voting entirely.
    """
    adapter_id: str
    fields: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.fields) - set(META_FIELDS)
        if unknown:
            raise ValueError(f"unknown meta fields {sorted(unknown)}")


@dataclass
class DocumentRecord:
    doc_id: str
    project_id: str
    page_count: int
    pages: list[PageContent]
    meta: MetaInfo
    import_user: str
    import_time: str                       # RFC 3339 UTC
    last_editor: Optional[str] = None
    last_edit_time: Optional[str] = None
    principal: Optional[str] = None
    status: str = "parsing"                # parsing | ready | failed

    def check_invariants(self) -> None:
        if self.status == "ready" and self.page_count != len(self.pages):
            raise ValueError("page_count does not match pages")
        if self.last_edit_time is not None and self.last_edit_time < self.import_time:
            raise ValueError("last_edit_time precedes import_time")


def get_page_text(doc: DocumentRecord, page_index: int) -> list[TextBox]:
    """Stored text boxes of one page in reading order.

    Raises PageOutOfRange for an index outside 0..page_count-1.
    """
    if not 0 <= page_index < doc.page_count:
        raise PageOutOfRange(
            f"page {page_index} outside 0..{doc.page_count - 1}")
    return doc.pages[page_index].reading_order()
