"""Dictionary and pattern tagging of document text.

Labels carry matchers; each matcher is either a dictionary (a list of
terms matched whole-word, case-insensitive) or a raw regex.  Automatic
annotation scans each page's reading-order text and resolves overlaps by
preferring longer matches, then earlier ones, then the label that comes
first in the label set.  Manual annotations always survive automatic
re-runs; automatic spans overlapping a manual one are dropped.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

from .errors import InvalidPattern, SpanOutOfRange, UnknownLabel
from .model import DocumentRecord

__all__ = [
    "MATCHER_KINDS", "ORIGINS", "LabelDef", "Annotation", "CompiledLabelSet",
    "compile_labelset", "auto_annotate", "add_manual_annotation",
    "list_annotations", "export_annotations_csv",
]

MATCHER_KINDS = ("dictionary", "regex")
ORIGINS = ("auto", "manual")


@dataclass(frozen=True)
class LabelDef:
    label_id: str
    display_name: str = ""
    color: str = "#e8b931"
    visible: bool = True
    matchers: tuple = field(default_factory=tuple)   # (kind, payload) pairs

    def __post_init__(self):
        for kind, _ in self.matchers:
            if kind not in MATCHER_KINDS:
                raise ValueError(
                    f"matcher kind must be one of {MATCHER_KINDS}, got {kind!r}")

    def to_json(self) -> dict:
        return {
            "label_id": self.label_id, "display_name": self.display_name,
            "color": self.color, "visible": self.visible,
            "matchers": [[k, p] for k, p in self.matchers],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabelDef":
        return cls(
            label_id=str(data["label_id"]),
            display_name=str(data.get("display_name", "")),
            color=str(data.get("color", "#e8b931")),
            visible=bool(data.get("visible", True)),
            matchers=tuple((str(k), p) for k, p in data.get("matchers", [])),
        )


@dataclass(frozen=True)
class Annotation:
    doc_id: str
    page_index: int
    char_span: tuple[int, int]
    surface_text: str
    label_id: str
    origin: str = "auto"
    author: str = ""
    created_at: str = ""

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        start, end = self.char_span
        if not (0 <= start < end):
            raise ValueError(f"bad char span {self.char_span}")

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id, "page_index": self.page_index,
            "char_span": list(self.char_span), "surface_text": self.surface_text,
            "label_id": self.label_id, "origin": self.origin,
            "author": self.author, "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Annotation":
        return cls(
            doc_id=str(data["doc_id"]), page_index=int(data["page_index"]),
            char_span=tuple(int(v) for v in data["char_span"]),
            surface_text=str(data["surface_text"]),
            label_id=str(data["label_id"]),
            origin=str(data.get("origin", "auto")),
            author=str(data.get("author", "")),
            created_at=str(data.get("created_at", "")),
        )


@dataclass(frozen=True)
class CompiledLabelSet:
    labels: tuple[LabelDef, ...]
    patterns: tuple[tuple[str, tuple[re.Pattern, ...]], ...]   # label_id, regexes

    def label(self, label_id: str) -> LabelDef:
        for lab in self.labels:
            if lab.label_id == label_id:
                return lab
        raise UnknownLabel(f"no label named {label_id!r}")

    def rank(self, label_id: str) -> int:
        for i, lab in enumerate(self.labels):
            if lab.label_id == label_id:
                return i
        raise UnknownLabel(f"no label named {label_id!r}")


def _dictionary_pattern(payload) -> re.Pattern:
    """Whole-word, case-insensitive alternation over the term list."""
    terms = [payload] if isinstance(payload, str) else list(payload)
    terms = [t for t in (str(t).strip() for t in terms) if t]
    if not terms:
        raise InvalidPattern("dictionary matcher holds no terms")
    terms.sort(key=len, reverse=True)   # longest alternative wins inside the regex
    alts = "|".join(re.escape(t) for t in terms)
    return re.compile(
        rf"(?<![A-Za-z0-9])(?:{alts})(?![A-Za-z0-9])", re.IGNORECASE)


def compile_labelset(labels) -> CompiledLabelSet:
    """Compiles every matcher of every label; bad regexes raise
    InvalidPattern naming the label."""
    labels = tuple(labels)
    seen = set()
    for lab in labels:
        if lab.label_id in seen:
            raise ValueError(f"duplicate label id {lab.label_id!r}")
        seen.add(lab.label_id)
    compiled = []
    for lab in labels:
        pats = []
        for kind, payload in lab.matchers:
            if kind == "dictionary":
                pats.append(_dictionary_pattern(payload))
            else:
                try:
                    pats.append(re.compile(str(payload)))
                except re.error as exc:
                    raise InvalidPattern(
                        f"label {lab.label_id!r}: bad pattern {payload!r}: {exc}")
        compiled.append((lab.label_id, tuple(pats)))
    return CompiledLabelSet(labels, tuple(compiled))


def _page_matches(text: str, compiled: CompiledLabelSet):
    """All raw matches on one page as (start, end, label_id, surface)."""
    out = []
    for label_id, pats in compiled.patterns:
        for pat in pats:
            for m in pat.finditer(text):
                if m.start() < m.end():
                    out.append((m.start(), m.end(), label_id, m.group()))
    return out


def _resolve_overlaps(matches, compiled: CompiledLabelSet):
    """Greedy selection: longer first, then earlier, then label order."""
    ranked = sorted(
        matches,
        key=lambda t: (-(t[1] - t[0]), t[0], compiled.rank(t[2])),
    )
    taken: list[tuple[int, int]] = []
    out = []
    for start, end, label_id, surface in ranked:
        if any(s < end and start < e for s, e in taken):
            continue
        taken.append((start, end))
        out.append((start, end, label_id, surface))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def _overlaps_any(page: int, start: int, end: int, anns) -> bool:
    return any(
        a.page_index == page and a.char_span[0] < end and start < a.char_span[1]
        for a in anns
    )


def auto_annotate(doc: DocumentRecord, compiled: CompiledLabelSet,
                  existing=(), created_at: str = "") -> list[Annotation]:
    """Re-tags the whole document.

    Returns the full annotation list: manual entries from `existing` kept
    as they are, previous automatic entries discarded, and fresh
    automatic matches added wherever they do not overlap a manual span.
    Running this twice with the same inputs yields the same output.
    """
    manuals = [a for a in existing if a.origin == "manual"]
    out = list(manuals)
    for page in doc.pages:
        text = page.text()
        resolved = _resolve_overlaps(_page_matches(text, compiled), compiled)
        for start, end, label_id, surface in resolved:
            if _overlaps_any(page.page_index, start, end, manuals):
                continue
            out.append(Annotation(
                doc_id=doc.doc_id, page_index=page.page_index,
                char_span=(start, end), surface_text=surface,
                label_id=label_id, origin="auto", author="",
                created_at=created_at))
    out.sort(key=lambda a: (a.page_index, a.char_span[0], a.char_span[1]))
    return out


def add_manual_annotation(doc: DocumentRecord, page_index: int,
                          char_span: tuple[int, int], label_id: str,
                          author: str, compiled: CompiledLabelSet,
                          existing=(), created_at: str = "") -> list[Annotation]:
    """Appends one human-placed annotation and returns the new list.

    The span must lie inside the page text; the label must exist in the
    label set, hidden or not.  Overlapping automatic annotations are
    dropped in favor of the new manual one.
    """
    compiled.label(label_id)    # raises UnknownLabel
    if not 0 <= page_index < len(doc.pages):
        raise SpanOutOfRange(f"page {page_index} outside document")
    text = doc.pages[page_index].text()
    start, end = int(char_span[0]), int(char_span[1])
    if not (0 <= start < end <= len(text)):
        raise SpanOutOfRange(
            f"span ({start}, {end}) outside page text of length {len(text)}")
    ann = Annotation(
        doc_id=doc.doc_id, page_index=page_index, char_span=(start, end),
        surface_text=text[start:end], label_id=label_id, origin="manual",
        author=author, created_at=created_at)
    out = [
        a for a in existing
        if not (a.origin == "auto"
                and _overlaps_any(a.page_index, a.char_span[0], a.char_span[1], [ann]))
    ]
    out.append(ann)
    out.sort(key=lambda a: (a.page_index, a.char_span[0], a.char_span[1]))
    return out


def list_annotations(annotations, compiled: CompiledLabelSet,
                     include_hidden: bool = False) -> list[Annotation]:
    """Annotations sorted by (page, start); entries whose label is hidden
    are filtered out unless include_hidden is set."""
    out = []
    for a in annotations:
        lab = compiled.label(a.label_id)
        if lab.visible or include_hidden:
            out.append(a)
    out.sort(key=lambda a: (a.page_index, a.char_span[0], a.char_span[1]))
    return out


def export_annotations_csv(annotations) -> str:
    """Annotations as CSV with CRLF line endings, sorted by (page, start)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["doc_id", "page", "start", "end", "text",
                     "label", "origin", "author"])
    for a in sorted(annotations,
                    key=lambda a: (a.page_index, a.char_span[0], a.char_span[1])):
        writer.writerow([a.doc_id, a.page_index, a.char_span[0], a.char_span[1],
                         a.surface_text, a.label_id, a.origin, a.author])
    return buf.getvalue()
