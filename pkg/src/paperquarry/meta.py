"""Bibliographic metadata: per-adapter extraction and field voting.

Several independent adapters each propose values for title, authors,
venue, year, and abstract.  A per-field vote picks the value most
adapters agree on, with a configurable adapter priority order breaking
ties.  Adapters are allowed to fail or to return partial fields.
"""

from __future__ import annotations

import re

from .errors import NoAdapters, UnknownAdapter
from .model import META_FIELDS, MetaCandidate, MetaInfo, PageContent
from .pdfread import read_doc_info

__all__ = ["META_ADAPTERS", "extract_candidates", "vote_fields", "extract_meta"]

_YEAR_RE = re.compile(r"\b(1[5-9]\d\d|20\d\d)\b")
_AUTHOR_SPLIT_RE = re.compile(r"\s*(?:,|;|\band\b|&)\s*")


def _split_authors(text: str) -> list[str]:
    parts = [p.strip() for p in _AUTHOR_SPLIT_RE.split(text)]
    return [p for p in parts if p]


def _adapter_first_page(raw: bytes, pages: list[PageContent]) -> dict:
    """Layout heuristics on page one: biggest line is the title, the line
    under it names the authors, a year token marks the venue line."""
    if not pages or not pages[0].text_boxes:
        return {}
    page = pages[0]
    upper = [b for b in page.text_boxes
             if (b.bbox[1] + b.bbox[3]) / 2.0 > page.height_pt / 2.0]
    pool = upper or page.text_boxes
    max_size = max(b.font_size_pt for b in pool)
    title_boxes = sorted(
        (b for b in pool if b.font_size_pt >= max_size - 0.25),
        key=lambda b: (-b.bbox[3], b.bbox[0]))
    fields: dict = {"title": " ".join(b.text for b in title_boxes)}
    title_bottom = min(b.bbox[1] for b in title_boxes)
    below = sorted(
        (b for b in page.text_boxes if b.bbox[3] <= title_bottom),
        key=lambda b: (-b.bbox[3], b.bbox[0]))
    if below:
        authors = _split_authors(below[0].text)
        if authors:
            fields["authors"] = authors
    for box in below[1:6]:
        m = _YEAR_RE.search(box.text)
        if m:
            fields["year"] = int(m.group(1))
            venue = (box.text[:m.start()] + box.text[m.end():]).strip(" ,.;:-")
            if venue:
                fields["venue"] = venue
            break
    return fields


def _adapter_docinfo(raw: bytes, pages: list[PageContent]) -> dict:
    """Values the producing software wrote into the document information
    dictionary."""
    info = read_doc_info(raw)
    fields: dict = {}
    title = (info.get("Title") or "").strip()
    if title:
        fields["title"] = title
    authors = _split_authors(info.get("Author") or "")
    if authors:
        fields["authors"] = authors
    abstract = (info.get("Subject") or "").strip()
    if abstract:
        fields["abstract"] = abstract
    return fields


META_ADAPTERS = {
    "first_page": _adapter_first_page,
    "docinfo": _adapter_docinfo,
}


def extract_candidates(raw: bytes, pages: list[PageContent],
                       adapters: list[str] | None = None) -> list[MetaCandidate]:
    """Runs the requested adapters; a crashing adapter is skipped, an
    unknown name raises UnknownAdapter."""
    names = adapters if adapters is not None else ["first_page", "docinfo"]
    out = []
    for name in names:
        try:
            fn = META_ADAPTERS[name]
        except KeyError:
            raise UnknownAdapter(f"no metadata adapter named {name!r}",
                                 known=sorted(META_ADAPTERS))
        try:
            fields = fn(raw, pages)
        except Exception:
            continue
        fields = {k: v for k, v in fields.items() if k in META_FIELDS and not _is_empty(v)}
        if fields:
            out.append(MetaCandidate(adapter_id=name, fields=fields))
    return out


def _is_empty(value) -> bool:
    if value is None:
        return True
    if isinstance(value, str):
        return not value.strip()
    if isinstance(value, (list, tuple)):
        return len(value) == 0
    return False


def _norm_text(value: str) -> str:
    return " ".join(value.casefold().split())


def _vote_key(field: str, value):
    if field == "authors":
        return tuple(_norm_text(str(v)) for v in value)
    if field == "year":
        return int(value)
    return _norm_text(str(value))


def vote_fields(candidates: list[MetaCandidate],
                priority: list[str]) -> MetaInfo:
    """Majority vote per metadata field.

    Equivalent values (case and whitespace insensitive) pool their votes.
    Ties go to the value backed by the adapter earliest in `priority`,
    and the returned value is the raw one from the earliest such backer.
    Candidates from adapters absent from `priority` raise UnknownAdapter.
    """
    rank = {name: i for i, name in enumerate(priority)}
    for cand in candidates:
        if cand.adapter_id not in rank:
            raise UnknownAdapter(
                f"candidate from adapter {cand.adapter_id!r} not in priority list",
                known=list(priority))
    ordered = sorted(candidates, key=lambda c: rank[c.adapter_id])
    chosen: dict = {}
    for field in META_FIELDS:
        votes: dict = {}
        for cand in ordered:
            value = cand.fields.get(field)
            if _is_empty(value):
                continue
            key = _vote_key(field, value)
            entry = votes.setdefault(
                key, {"count": 0, "first_rank": rank[cand.adapter_id], "value": value})
            entry["count"] += 1
        if not votes:
            continue
        best = min(votes.values(), key=lambda e: (-e["count"], e["first_rank"]))
        chosen[field] = best["value"]
    return MetaInfo(
        title=chosen.get("title", ""),
        authors=list(chosen["authors"]) if "authors" in chosen else [],
        venue=chosen.get("venue", ""),
        # votes pool "2001" with 2001, so the raw winner may be a string
        year=int(chosen["year"]) if "year" in chosen else None,
        abstract=chosen.get("abstract", ""),
    )


def extract_meta(raw: bytes, pages: list[PageContent],
                 adapters: list[str] | None = None) -> MetaInfo:
    """Candidates from every configured adapter, then the field vote.

    Raises NoAdapters when the adapter list is empty; the adapter order
    doubles as the voting priority.
    """
    names = adapters if adapters is not None else ["first_page", "docinfo"]
    if not names:
        raise NoAdapters("no metadata adapters configured")
    return vote_fields(extract_candidates(raw, pages, names), names)
