"""CoNLL-U reading and unlabelled attachment scoring."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence, TextIO

from .export import conll_heads


class ConlluError(ValueError):
    pass


@dataclass(frozen=True)
class GoldToken:
    id: int
    form: str
    xpos: str
    head: int  # 1-based, 0 = root


@dataclass(frozen=True)
class GoldSentence:
    tokens: tuple[GoldToken, ...]
    sent_id: str | None = None

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def xpos(self) -> list[str]:
        return [t.xpos for t in self.tokens]

    @property
    def heads(self) -> list[int]:
        return [t.head for t in self.tokens]


def read_conllu(source: TextIO) -> Iterator[GoldSentence]:
    """Yield sentences, dropping multiword ranges (``3-4``) and empty nodes (``5.1``)."""
    block: list[tuple[int, str]] = []
    sent_id = None
    index = 0
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            if block:
                yield _sentence(block, sent_id, index)
                index += 1
            block, sent_id = [], None
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            if key.strip() == "sent_id":
                sent_id = value.strip()
            continue
        block.append((lineno, line))
    if block:
        yield _sentence(block, sent_id, index)


def _sentence(block, sent_id, index) -> GoldSentence:
    tokens = []
    for lineno, line in block:
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"sentence {index}, line {lineno}: "
                              f"expected 10 columns, got {len(cols)}")
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue
        try:
            n = int(tid)
        except ValueError:
            raise ConlluError(f"sentence {index}, line {lineno}: bad id {tid!r}") from None
        if n != len(tokens) + 1:
            raise ConlluError(f"sentence {index}, line {lineno}: id {n} out of sequence")
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"sentence {index}, line {lineno}: bad head {cols[6]!r}") from None
        tokens.append(GoldToken(n, cols[1], cols[4], head))
    for t in tokens:
        if not 0 <= t.head <= len(tokens):
            raise ConlluError(f"sentence {index}: head {t.head} of token {t.id} out of range")
    return GoldSentence(tuple(tokens), sent_id)


def read_conllu_file(path) -> list[GoldSentence]:
    with open(path, encoding="utf-8") as fh:
        return list(read_conllu(fh))


def uas(pred_heads: Sequence[int], gold_heads: Sequence[int]) -> tuple[int, int]:
    """(correct, total); both sides use 1-based heads with 0 for the root."""
    if len(pred_heads) != len(gold_heads):
        raise ValueError(f"length mismatch: {len(pred_heads)} vs {len(gold_heads)}")
    return sum(p == g for p, g in zip(pred_heads, gold_heads)), len(gold_heads)


# --- corpus evaluation -------------------------------------------------------

_WORKER_BUNDLE = None


def _init_worker(bundle):
    global _WORKER_BUNDLE
    _WORKER_BUNDLE = bundle


def _score_sentence(sent: GoldSentence, bundle=None):
    bundle = bundle or _WORKER_BUNDLE
    results = bundle.parse(sent.forms, sent.xpos, k=1)
    if not results:
        return 0, 0, False
    correct, total = uas(conll_heads(results[0].heads), sent.heads)
    return correct, total, results[0].budget_exceeded


def evaluate_corpus(files: Sequence, bundle, jobs: int = 1, timings: bool = False) -> dict:
    """Per-file and averaged UAS.

    Unreadable or malformed files are reported with an ``error`` entry and
    left out of the averages. Wall-clock seconds are only included when
    ``timings`` is set, so that reports are reproducible byte for byte.
    """
    per_file = []
    pool = None
    if jobs > 1:
        pool = ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(bundle,))
    try:
        for path in files:
            entry: dict = {"file": os.fspath(path)}
            t0 = time.perf_counter()
            try:
                sentences = read_conllu_file(path)
            except (OSError, UnicodeDecodeError, ConlluError) as exc:
                entry["error"] = f"{type(exc).__name__}: {exc}"
                per_file.append(entry)
                continue
            if pool is not None:
                scored = list(pool.map(_score_sentence, sentences, chunksize=8))
            else:
                scored = [_score_sentence(s, bundle) for s in sentences]
            correct = sum(c for c, _, _ in scored)
            total = sum(t for _, t, _ in scored)
            entry.update(sentences=len(sentences), tokens=total, correct=correct,
                         uas=correct / total if total else 0.0,
                         budget_exceeded=sum(1 for *_, b in scored if b))
            if timings:
                entry["seconds"] = round(time.perf_counter() - t0, 3)
            per_file.append(entry)
    finally:
        if pool is not None:
            pool.shutdown()

    ok = [e for e in per_file if "error" not in e]
    tokens = sum(e["tokens"] for e in ok)
    correct = sum(e["correct"] for e in ok)
    return {
        "files": per_file,
        "macro_uas": sum(e["uas"] for e in ok) / len(ok) if ok else 0.0,
        "micro_uas": correct / tokens if tokens else 0.0,
        "sentences": sum(e["sentences"] for e in ok),
        "tokens": tokens,
        "correct": correct,
        "rules": len(bundle.grammar),
        "gold_tags": bundle.gold_tags,
    }


def format_report(report: dict) -> str:
    rows = [f"{'file':<40} {'sents':>6} {'tokens':>7} {'correct':>8} {'UAS':>7}"]
    for e in report["files"]:
        name = os.path.basename(e["file"])
        if "error" in e:
            rows.append(f"{name:<40} ERROR {e['error']}")
            continue
        line = f"{name:<40} {e['sentences']:>6} {e['tokens']:>7} {e['correct']:>8} {e['uas']:>7.2%}"
        if "seconds" in e:
            line += f" {e['seconds']:>8.1f}s"
        rows.append(line)
    rows.append(f"macro UAS {report['macro_uas']:.2%}   micro UAS {report['micro_uas']:.2%}"
                f"   ({report['rules']} rules)")
    return "\n".join(rows)
