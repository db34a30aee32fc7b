from __future__ import annotations

import io

import pytest

from slashchart.lexicon import (ClosedClassTable, LexiconError, TagHypothesis, dump_model,
                                gold_distributions, load_closed_class, load_default_closed_class,
                                load_model, tag_token, train_tagger)


def book_model():
    return train_tagger([[("book", "NN")]] * 3 + [[("book", "VB")]])


def test_single_tag_form():
    m = train_tagger([[("the", "DT")]] * 3)
    assert m.distribution("the") == [("DT", 1.0)]


def test_relative_frequency():
    assert dict(book_model().distribution("book")) == {"NN": 0.75, "VB": 0.25}


def test_unknown_form_uses_fallback():
    m = train_tagger([[("dog", "NN"), ("runs", "VBZ"), ("the", "DT")]])
    d = tag_token(m, None, "zyzzx", 0.0)
    assert d.hypotheses
    assert {h.tag for h in d.hypotheses} <= {"NN", "VBZ"}  # DT is closed-class


def test_fallback_limited_to_k_open_tags():
    sents = [[(f"w{i}", t)] * (i + 1) for i, t in enumerate(
        ["NN", "NNS", "JJ", "RB", "VB", "VBD", "VBZ", "VBG", "VBN", "CD"])]
    m = train_tagger(sents, fallback_k=3)
    assert [t for t, _ in m.open_class_fallback] == ["CD", "VBN", "VBG"]
    assert sum(w for _, w in m.open_class_fallback) == pytest.approx(1.0)


def test_empty_training_is_an_error():
    with pytest.raises(LexiconError):
        train_tagger([])


def test_closed_class_wins():
    closed = ClosedClassTable({"in": [TagHypothesis("IN", 1.0, ("loc",))]})
    m = train_tagger([[("in", "RP")]] * 5)
    d = tag_token(m, closed, "in", 0.05)
    assert d.hypotheses == (TagHypothesis("IN", 1.0, ("loc",)),)
    assert tag_token(m, closed, "In", 0.05).hypotheses == d.hypotheses


def test_cutoff_then_renormalize():
    d = tag_token(book_model(), None, "book", 0.5)
    assert [(h.tag, h.weight) for h in d.hypotheses] == [("NN", 1.0)]


def test_zero_cutoff_keeps_everything():
    d = tag_token(book_model(), None, "book", 0.0)
    assert [(h.tag, h.weight) for h in d.hypotheses] == [("NN", 0.75), ("VB", 0.25)]


def test_all_below_cutoff_keeps_best():
    m = train_tagger([[("x", t)] for t in "ABCDEFGHIJ"] + [[("x", "A")]])
    d = tag_token(m, None, "x", 0.5)
    assert [(h.tag, h.weight) for h in d.hypotheses] == [("A", 1.0)]


def test_cutoff_is_strict():
    d = tag_token(book_model(), None, "book", 0.25)
    assert [h.tag for h in d.hypotheses] == ["NN"]


def test_case_fallback():
    m = train_tagger([[("Apple", "NNP"), ("apple", "NN")]])
    assert tag_token(m, None, "Apple", 0).best.tag == "NNP"
    assert tag_token(m, None, "APPLE", 0).best.tag == "NN"


def test_open_class_features_from_table():
    m = train_tagger([[("ran", "VBD")]])
    assert tag_token(m, None, "ran", 0).best.features == ("fin", "past")


def test_load_closed_class_row():
    t = load_closed_class(io.StringIO("be,AUX,be,1.0\n"))
    assert t.get("be") == [TagHypothesis("AUX", 1.0, ("be",))]


def test_load_closed_class_empty_and_multi():
    assert len(load_closed_class(io.StringIO(""))) == 0
    t = load_closed_class(io.StringIO("that,IN,,0.5\nthat,WDT,,0.5\n"))
    assert [h.tag for h in t.get("That")] == ["IN", "WDT"]
    d = tag_token(None, t, "that", 0.05)
    assert [(h.tag, h.weight) for h in d.hypotheses] == [("IN", 0.5), ("WDT", 0.5)]


@pytest.mark.parametrize("text, lineno", [
    ("a,DT,,1.0\nb,DT\n", 2),
    ("# c\na,DT,,x\n", 2),
    ("a,DT,,1.5\n", 1),
])
def test_closed_class_errors_carry_line(text, lineno):
    with pytest.raises(LexiconError, match=f"line {lineno}"):
        load_closed_class(io.StringIO(text))


def test_model_round_trip():
    m = train_tagger([[("book", "NN"), ("a", "DT")], [("book", "VB")]])
    buf = io.StringIO()
    dump_model(m, buf)
    text = buf.getvalue()
    assert text.splitlines()[0].startswith("#slashchart-tagger\tversion=1\ttotal=3")
    m2 = load_model(io.StringIO(text))
    assert m2.form_counts == m.form_counts
    assert m2.open_class_fallback == m.open_class_fallback
    buf2 = io.StringIO()
    dump_model(m2, buf2)
    assert buf2.getvalue() == text


def test_model_total_checked():
    with pytest.raises(LexiconError):
        load_model(io.StringIO("#slashchart-tagger\tversion=1\ttotal=5\nx\tNN\t2\n"))


def test_gold_tags_passthrough():
    closed = load_default_closed_class()
    d = gold_distributions(["is", "running", "in"], ["VBZ", "VBG", "IN"], closed)
    assert d[0].best.tag == "AUX" and "be" in d[0].best.features
    assert d[1].best == TagHypothesis("VBG", 1.0, ("ing",))
    assert d[2].best.tag == "IN" and d[2].best.features == ("loc",)
    assert all(len(x.hypotheses) == 1 for x in d)


def test_shipped_closed_class():
    closed = load_default_closed_class()
    assert closed.get("in")[0] == TagHypothesis("IN", 1.0, ("loc",))
    for hyps in closed.entries.values():
        assert sum(h.weight for h in hyps) <= 1 + 1e-9
