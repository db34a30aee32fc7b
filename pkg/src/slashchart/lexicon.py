"""Weighted tag hypotheses for tokens.

Tags come from two sources: a hand-written closed-class table (function
words with custom tags and features, e.g. ``in -> IN[loc]``) and a
relative-frequency model trained on (form, XPOS) pairs. Listed forms never
consult the model. Each token gets a list of (tag, weight, features)
hypotheses that sums to one after cutoff filtering.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence, TextIO

DEFAULT_CUTOFF = 0.05
DEFAULT_FALLBACK_K = 8
MODEL_FORMAT = "slashchart-tagger"
MODEL_VERSION = 1

# Penn-style tags an unseen word may plausibly carry.
OPEN_CLASS_TAGS = frozenset({
    "NN", "NNS", "NNP", "NNPS", "JJ", "JJR", "JJS", "RB", "RBR", "RBS",
    "VB", "VBD", "VBG", "VBN", "VBP", "VBZ", "CD", "FW", "UH", "ADD",
})


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class TagHypothesis:
    tag: str
    weight: float
    features: tuple[str, ...] = ()


@dataclass(frozen=True)
class TagDistribution:
    token_index: int
    form: str
    hypotheses: tuple[TagHypothesis, ...]

    @property
    def best(self) -> TagHypothesis:
        return self.hypotheses[0]


@dataclass
class TaggerModel:
    form_counts: dict[str, dict[str, int]]
    tag_totals: dict[str, int]
    open_class_fallback: list[tuple[str, float]]
    case_sensitive: bool = True
    fallback_k: int = DEFAULT_FALLBACK_K

    def distribution(self, form: str) -> list[tuple[str, float]]:
        counts = self.form_counts.get(form if self.case_sensitive else form.lower())
        if counts is None and self.case_sensitive:
            counts = self.form_counts.get(form.lower())
        if counts is None:
            return list(self.open_class_fallback)
        total = sum(counts.values())
        return [(tag, n / total) for tag, n in counts.items()]


@dataclass
class ClosedClassTable:
    entries: dict[str, list[TagHypothesis]] = field(default_factory=dict)

    def __contains__(self, form: str) -> bool:
        return form.lower() in self.entries

    def __len__(self):
        return len(self.entries)

    def get(self, form: str) -> list[TagHypothesis] | None:
        return self.entries.get(form.lower())


def train_tagger(sentences: Iterable[Sequence[tuple[str, str]]],
                 fallback_k: int = DEFAULT_FALLBACK_K,
                 case_sensitive: bool = True) -> TaggerModel:
    """Count (form, tag) pairs; weights are count(form, tag) / count(form)."""
    form_counts: dict[str, Counter] = defaultdict(Counter)
    for sent in sentences:
        for form, tag in sent:
            form_counts[form if case_sensitive else form.lower()][tag] += 1
    if not form_counts:
        raise LexiconError("no training tokens")
    return _model_from_counts({f: dict(c) for f, c in form_counts.items()},
                              fallback_k, case_sensitive)


def _model_from_counts(form_counts, fallback_k, case_sensitive) -> TaggerModel:
    tag_totals: Counter = Counter()
    for counts in form_counts.values():
        tag_totals.update(counts)
    open_counts = [(t, n) for t, n in tag_totals.items() if t in OPEN_CLASS_TAGS]
    if not open_counts:
        open_counts = list(tag_totals.items())
    open_counts.sort(key=lambda tn: (-tn[1], tn[0]))
    top = open_counts[:fallback_k]
    z = sum(n for _, n in top)
    fallback = [(t, n / z) for t, n in top]
    return TaggerModel(form_counts, dict(tag_totals), fallback, case_sensitive, fallback_k)


def tag_token(model: TaggerModel | None, closed: ClosedClassTable | None, form: str,
              cutoff: float = DEFAULT_CUTOFF, token_index: int = 0,
              tag_features: dict[str, tuple[str, ...]] | None = None) -> TagDistribution:
    """Weighted tags for one token.

    Hypotheses at or below ``cutoff`` are dropped and the rest renormalized;
    if nothing survives, the single best hypothesis is kept at weight 1.
    """
    if not 0 <= cutoff < 1:
        raise ValueError("cutoff must lie in [0, 1)")
    listed = closed.get(form) if closed is not None else None
    if listed:
        raw = [(h.tag, h.weight, h.features) for h in listed]
    elif model is not None:
        feats = tag_features if tag_features is not None else default_tag_features()
        raw = [(t, w, feats.get(t, ())) for t, w in model.distribution(form)]
    else:
        raise LexiconError(f"no tag source for {form!r}")
    return TagDistribution(token_index, form, _normalize(raw, cutoff))


def _normalize(raw, cutoff) -> tuple[TagHypothesis, ...]:
    # Sort by weight, then tag name, so equal weights come out in a fixed order.
    raw = sorted(raw, key=lambda h: (-h[1], h[0], h[2]))
    kept = [h for h in raw if h[1] > cutoff]
    if not kept:
        tag, _, feats = raw[0]
        return (TagHypothesis(tag, 1.0, tuple(feats)),)
    z = sum(h[1] for h in kept)
    return tuple(TagHypothesis(t, w / z, tuple(f)) for t, w, f in kept)


def tag_sentence(tokens: Sequence[str], model, closed, cutoff=DEFAULT_CUTOFF,
                 tag_features=None) -> list[TagDistribution]:
    return [tag_token(model, closed, form, cutoff, i, tag_features)
            for i, form in enumerate(tokens)]


def gold_distributions(tokens: Sequence[str], xpos: Sequence[str],
                       closed: ClosedClassTable | None = None,
                       tag_features=None) -> list[TagDistribution]:
    """One weight-1 hypothesis per token taken from treebank tags.

    Closed-class forms keep their table entry when one carries the gold tag
    (so features survive); listed forms whose gold tag is not in the table
    use the table entries as they stand, since the grammar is written
    against the custom tags.
    """
    feats = tag_features if tag_features is not None else default_tag_features()
    out = []
    for i, (form, tag) in enumerate(zip(tokens, xpos)):
        listed = closed.get(form) if closed is not None else None
        if listed:
            same = [h for h in listed if h.tag == tag]
            hyp = same[0] if same else max(listed, key=lambda h: h.weight)
            hyp = TagHypothesis(hyp.tag, 1.0, hyp.features)
        else:
            hyp = TagHypothesis(tag, 1.0, feats.get(tag, ()))
        out.append(TagDistribution(i, form, (hyp,)))
    return out


# --- closed-class and tag-feature tables -------------------------------------

def _csv_rows(source: TextIO, ncols: int, header: tuple[str, ...]):
    lines = [(n, line) for n, line in enumerate(source, 1)
             if line.strip() and not line.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("".join(line for _, line in lines)))
    for (lineno, _), row in zip(lines, reader):
        row = [c.strip() for c in row]
        if tuple(c.lower() for c in row) == header:
            continue
        if len(row) != ncols:
            raise LexiconError(f"line {lineno}: expected {ncols} columns, got {len(row)}")
        yield lineno, row


def load_closed_class(source: TextIO) -> ClosedClassTable:
    """Read ``form,tag,features,weight`` rows; features are ``;``-separated."""
    entries: dict[str, list[TagHypothesis]] = defaultdict(list)
    for lineno, (form, tag, feats, weight) in _csv_rows(
            source, 4, ("form", "tag", "features", "weight")):
        if not form or not tag:
            raise LexiconError(f"line {lineno}: empty form or tag")
        try:
            w = float(weight)
        except ValueError:
            raise LexiconError(f"line {lineno}: bad weight {weight!r}") from None
        if not 0 < w <= 1:
            raise LexiconError(f"line {lineno}: weight {w} outside (0, 1]")
        features = tuple(f for f in feats.split(";") if f)
        entries[form.lower()].append(TagHypothesis(tag, w, features))
    for form, hyps in entries.items():
        if sum(h.weight for h in hyps) > 1 + 1e-9:
            raise LexiconError(f"weights for {form!r} sum above 1")
    return ClosedClassTable(dict(entries))


def load_tag_features(source: TextIO) -> dict[str, tuple[str, ...]]:
    """Read ``tag,features`` rows mapping open-class tags to leaf features."""
    table = {}
    for _, (tag, feats) in _csv_rows(source, 2, ("tag", "features")):
        table[tag] = tuple(f for f in feats.split(";") if f)
    return table


_TAG_FEATURES: dict[str, tuple[str, ...]] | None = None


def default_tag_features() -> dict[str, tuple[str, ...]]:
    global _TAG_FEATURES
    if _TAG_FEATURES is None:
        with data_path("tag_features.csv").open(encoding="utf-8") as fh:
            _TAG_FEATURES = load_tag_features(fh)
    return _TAG_FEATURES


def data_path(name: str):
    return resources.files("slashchart") / "data" / name


def load_default_closed_class() -> ClosedClassTable:
    with data_path("closed_class.csv").open(encoding="utf-8") as fh:
        return load_closed_class(fh)


# --- model serialization -------------------------------------------------------

def dump_model(model: TaggerModel, out: TextIO) -> None:
    total = sum(model.tag_totals.values())
    out.write(f"#{MODEL_FORMAT}\tversion={MODEL_VERSION}\ttotal={total}"
              f"\tfallback_k={model.fallback_k}"
              f"\tcase_sensitive={int(model.case_sensitive)}\n")
    for form in sorted(model.form_counts):
        for tag, n in sorted(model.form_counts[form].items()):
            out.write(f"{form}\t{tag}\t{n}\n")


def load_model(source: TextIO) -> TaggerModel:
    header = source.readline().rstrip("\n").split("\t")
    if not header or header[0] != f"#{MODEL_FORMAT}":
        raise LexiconError("not a tagger model file")
    meta = dict(item.split("=", 1) for item in header[1:])
    if int(meta.get("version", -1)) != MODEL_VERSION:
        raise LexiconError(f"unsupported model version {meta.get('version')}")
    form_counts: dict[str, dict[str, int]] = defaultdict(dict)
    total = 0
    for lineno, line in enumerate(source, 2):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise LexiconError(f"line {lineno}: expected form, tag, count")
        form, tag, n = parts
        count = int(n)
        if count < 1:
            raise LexiconError(f"line {lineno}: count must be positive")
        form_counts[form][tag] = count
        total += count
    if total != int(meta["total"]):
        raise LexiconError(f"token total {total} does not match header {meta['total']}")
    return _model_from_counts(dict(form_counts), int(meta.get("fallback_k", DEFAULT_FALLBACK_K)),
                              bool(int(meta.get("case_sensitive", 1))))


def load_model_file(path) -> TaggerModel:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh)


def save_model_file(model: TaggerModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_model(model, fh)
