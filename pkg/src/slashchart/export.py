"""Dependency, bracketed and combined JSON renderings of a parse."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

ROOT = -1

_BRACKET_ESCAPES = {"(": "-LRB-", ")": "-RRB-"}


def local_heads(chunk, n: int) -> list[int | None]:
    """Heads induced by one chunk alone; its head word gets ROOT, others None."""
    heads: list[int | None] = [None] * n
    heads[chunk.head_loc] = ROOT
    for p in chunk.walk():
        for c in p.children:
            if c.head_loc != p.head_loc:
                heads[c.head_loc] = p.head_loc
    return heads


def chunk_heads(chunks, skipped: Sequence[int], n: int, root_policy: str = "leftmost") -> list[int]:
    """Head array (0-based, ROOT = -1) for a chunk sequence.

    Inside a phrase every non-head child's head word depends on the head
    child's head word. The root policy picks one chunk head as the sentence
    root; remaining chunk heads and all skipped tokens attach to it.
    """
    heads = [ROOT] * n
    if n == 0:
        return heads
    chunks = sorted(chunks, key=lambda c: c.start)
    if not chunks:
        return [ROOT] + [0] * (n - 1)
    for chunk in chunks:
        for p in chunk.walk():
            for c in p.children:
                if c.head_loc != p.head_loc:
                    heads[c.head_loc] = p.head_loc
    if root_policy == "heaviest":
        top = min(chunks, key=lambda c: (-c.wt, c.start)).head_loc
    else:
        top = chunks[0].head_loc
    for chunk in chunks:
        if chunk.head_loc != top:
            heads[chunk.head_loc] = top
    for i in skipped:
        heads[i] = top
    heads[top] = ROOT
    return heads


def to_dependency(result) -> list[int]:
    return list(result.heads)


def conll_heads(heads: Sequence[int]) -> list[int]:
    """0-based heads with ROOT=-1 to CoNLL-U 1-based heads with 0 for root."""
    return [0 if h == ROOT else h + 1 for h in heads]


def _label(p, show_features: bool) -> str:
    if show_features and p.feat:
        return f"{p.cat}[{','.join(p.feat)}]"
    return p.cat


def _escape(form: str) -> str:
    return _BRACKET_ESCAPES.get(form, form).replace(" ", "_")


def bracket(p, tokens: Sequence[str], show_features: bool = False) -> str:
    if p.is_leaf:
        return f"({_label(p, show_features)} {_escape(tokens[p.start])})"
    inner = " ".join(bracket(c, tokens, show_features) for c in p.children)
    return f"({_label(p, show_features)} {inner})"


def to_constituency(result, tokens: Sequence[str], show_features: bool = False) -> str:
    """One bracketed tree per chunk, one ``(SKIP form)`` per skipped token, in order."""
    items = [(c.start, 0, bracket(c, tokens, show_features)) for c in result.path.chunks]
    items += [(i, 1, f"(SKIP {_escape(tokens[i])})") for i in result.path.skipped]
    items.sort()
    return "\n".join(text for _, _, text in items)


def result_phrases(result) -> list:
    """Every phrase under the chosen chunks, children before parents."""
    seen, out = set(), []
    for chunk in result.path.chunks:
        for p in chunk.walk():
            if p.id not in seen:
                seen.add(p.id)
                out.append(p)
    return out


def to_combined(result, tokens: Sequence[str]) -> dict:
    toks = []
    for i, form in enumerate(tokens):
        head = result.heads[i]
        tag = result.tags[i] if result.tags else None
        toks.append({"id": i, "form": form, "tag": tag,
                     "head": "ROOT" if head == ROOT else head})
    return {"tokens": toks, "phrases": [p.as_record() for p in result_phrases(result)]}


@dataclass
class CombinedRecord:
    forms: list[str]
    tags: list[str | None]
    heads: list[int]
    phrases: dict  # id -> Phrase, children relinked


def from_combined(record: dict | str) -> CombinedRecord:
    """Rebuild tokens, heads and phrase objects from a combined record."""
    from .chart import Phrase

    if isinstance(record, str):
        record = json.loads(record)
    forms = [t["form"] for t in record["tokens"]]
    tags = [t["tag"] for t in record["tokens"]]
    heads = [ROOT if t["head"] == "ROOT" else int(t["head"]) for t in record["tokens"]]
    phrases: dict[int, Phrase] = {}
    for r in record["phrases"]:
        phrases[r["id"]] = Phrase(
            wt=r["wt"], start=r["start"], end=r["end"], span=r["span"], cat=r["cat"],
            feat=tuple(r["feat"]), head_loc=r["head_loc"],
            children=tuple(phrases[c] for c in r["children"]), level=r["level"], id=r["id"])
    return CombinedRecord(forms, tags, heads, phrases)


def to_conllu(result, tokens: Sequence[str], sent_id: str | None = None,
              comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    if sent_id is not None:
        lines.insert(0, f"# sent_id = {sent_id}")
    heads = conll_heads(result.heads)
    for i, form in enumerate(tokens):
        tag = (result.tags[i] if result.tags else None) or "_"
        lines.append("\t".join([str(i + 1), form, "_", "_", tag, "_", str(heads[i]),
                                "dep", "_", "_"]))
    return "\n".join(lines) + "\n"
