import pytest

from paperquarry.annotate import (
    Annotation,
    LabelDef,
    add_manual_annotation,
    auto_annotate,
    compile_labelset,
    export_annotations_csv,
    list_annotations,
)
from paperquarry.errors import InvalidPattern, SpanOutOfRange, UnknownLabel
from paperquarry.model import DocumentRecord, MetaInfo, PageContent, TextBox


def page_with(text, index=0):
    boxes = [TextBox((72.0, 700.0 - 14.0 * i, 500.0, 710.0 - 14.0 * i),
                     line, 10.0)
             for i, line in enumerate(text.split("\n"))]
    return PageContent(page_index=index, width_pt=612.0, height_pt=792.0,
                       text_boxes=boxes, ruling_segments=[])


def doc_with(*page_texts):
    pages = [page_with(t, i) for i, t in enumerate(page_texts)]
    return DocumentRecord(
        doc_id="doc1", project_id="p1", page_count=len(pages), pages=pages,
        meta=MetaInfo(), import_user="kim", import_time="2026-01-01T00:00:00Z",
        status="ready")


def taxa_labels(**kw):
    defaults = dict(label_id="taxa", display_name="Taxa", visible=True,
                    matchers=(("dictionary", ("Abies", "Picea abies")),))
    defaults.update(kw)
    return [LabelDef(**defaults)]


def test_dictionary_whole_word_matching():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies grows here.\nNot in Abieship though.")
    anns = auto_annotate(doc, compiled)
    assert len(anns) == 1
    assert anns[0].surface_text == "Abies"


def test_dictionary_case_insensitive_longest_first():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("We saw picea abies near the ridge.")
    anns = auto_annotate(doc, compiled)
    assert len(anns) == 1
    assert anns[0].surface_text == "picea abies"


def test_regex_matcher():
    labels = [LabelDef(label_id="mass", matchers=(
        ("regex", r"\d+(?:\.\d+)?\s*kg"),))]
    compiled = compile_labelset(labels)
    doc = doc_with("Samples weighed 3.5 kg and 12 kg overall.")
    anns = auto_annotate(doc, compiled)
    assert [a.surface_text for a in anns] == ["3.5 kg", "12 kg"]


def test_bad_regex_reports_label():
    labels = [LabelDef(label_id="broken", matchers=(("regex", "(unclosed"),))]
    with pytest.raises(InvalidPattern) as err:
        compile_labelset(labels)
    assert "broken" in str(err.value)


def test_overlap_longest_wins():
    labels = [
        LabelDef(label_id="genus", matchers=(("dictionary", ("Picea",)),)),
        LabelDef(label_id="species", matchers=(
            ("dictionary", ("Picea abies",)),)),
    ]
    compiled = compile_labelset(labels)
    doc = doc_with("Stands of Picea abies were tall.")
    anns = auto_annotate(doc, compiled)
    assert len(anns) == 1
    assert anns[0].label_id == "species"


def test_equal_length_overlap_uses_label_rank():
    labels = [
        LabelDef(label_id="first", matchers=(("dictionary", ("shared",)),)),
        LabelDef(label_id="second", matchers=(("dictionary", ("shared",)),)),
    ]
    compiled = compile_labelset(labels)
    doc = doc_with("One shared token.")
    anns = auto_annotate(doc, compiled)
    assert len(anns) == 1
    assert anns[0].label_id == "first"


def test_auto_idempotent():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies here. Picea abies there.")
    first = auto_annotate(doc, compiled)
    second = auto_annotate(doc, compiled, existing=first)
    assert second == first


def test_manual_survives_auto_rerun():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies here, mystery word there.")
    text = doc.pages[0].text()
    start = text.index("mystery")
    anns = add_manual_annotation(doc, 0, (start, start + 7), "taxa", "kim",
                                 compiled)
    rerun = auto_annotate(doc, compiled, existing=anns)
    origins = sorted(a.origin for a in rerun)
    assert origins == ["auto", "manual"]
    manual = next(a for a in rerun if a.origin == "manual")
    assert manual.surface_text == "mystery"
    assert manual.author == "kim"


def test_auto_overlapping_manual_dropped():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies stands measured.")
    text = doc.pages[0].text()
    start = text.index("Abies")
    anns = add_manual_annotation(doc, 0, (start, start + 11), "taxa", "kim",
                                 compiled)
    rerun = auto_annotate(doc, compiled, existing=anns)
    assert len(rerun) == 1
    assert rerun[0].origin == "manual"


def test_manual_unknown_label():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("text")
    with pytest.raises(UnknownLabel):
        add_manual_annotation(doc, 0, (0, 2), "nope", "kim", compiled)


def test_manual_span_out_of_range():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("short")
    with pytest.raises(SpanOutOfRange):
        add_manual_annotation(doc, 0, (0, 999), "taxa", "kim", compiled)
    with pytest.raises(SpanOutOfRange):
        add_manual_annotation(doc, 5, (0, 2), "taxa", "kim", compiled)


def test_hidden_labels_filtered():
    labels = taxa_labels(visible=False)
    compiled = compile_labelset(labels)
    doc = doc_with("Abies here.")
    anns = auto_annotate(doc, compiled)
    assert list_annotations(anns, compiled) == []
    assert list_annotations(anns, compiled, include_hidden=True) == anns


def test_multi_page_spans_are_per_page():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies on page one.", "Picea abies on page two.")
    anns = auto_annotate(doc, compiled)
    assert [a.page_index for a in anns] == [0, 1]
    page2 = doc.pages[1].text()
    a2 = anns[1]
    assert page2[a2.char_span[0]:a2.char_span[1]] == a2.surface_text


def test_csv_export():
    compiled = compile_labelset(taxa_labels())
    doc = doc_with("Abies here.")
    anns = auto_annotate(doc, compiled, created_at="2026-01-01T00:00:00Z")
    out = export_annotations_csv(anns)
    lines = out.split("\r\n")
    assert lines[0] == "doc_id,page,start,end,text,label,origin,author"
    assert lines[1].startswith("doc1,0,0,5,Abies,taxa,auto,")


def test_annotation_json_round_trip():
    ann = Annotation(doc_id="d", page_index=1, char_span=(3, 9),
                     surface_text="sample", label_id="taxa", origin="manual",
                     author="kim", created_at="2026-01-01T00:00:00Z")
    assert Annotation.from_json(ann.to_json()) == ann
