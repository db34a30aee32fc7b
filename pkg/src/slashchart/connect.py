"""Chunk connection and hypothesis ranking.

When no phrase covers the whole sentence, the best sequence of phrases is
found as a shortest path over token boundaries 0..n. A phrase over
``start..end`` is an edge ``start -> end + 1``; every boundary also has a
skip edge to the next one. Phrase edges get cheaper with weight and dearer
with internal gaps; skip edges cost a flat ``sigma``.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field

from .chart import Chart, Phrase
from .export import ROOT, chunk_heads


@dataclass(frozen=True)
class ConnectConfig:
    lam: float = 0.5      # edge cost per token skipped inside a phrase
    mu: float = 0.25      # edge discount per unit of phrase weight
    eps: float = 0.01     # floor keeping every edge cost positive
    sigma: float = 2.0    # cost of a skip edge
    alpha: float = 0.5    # score penalty per extra chunk
    beta: float = 1.0     # score penalty per skipped token
    alternatives: int = 8  # phrases considered per chunk extent when ranking
    root: str = "leftmost"  # or "heaviest"

    def __post_init__(self):
        if self.eps <= 0 or self.sigma <= 0:
            raise ValueError("edge costs must be positive")
        if self.root not in ("leftmost", "heaviest"):
            raise ValueError(f"unknown root policy {self.root!r}")


@dataclass
class ChunkPath:
    chunks: list[Phrase]
    skipped: list[int]
    cost: float = 0.0


@dataclass
class ParseResult:
    path: ChunkPath
    score: float
    heads: list[int]
    tags: list[str | None] = field(default_factory=list)
    budget_exceeded: bool = False

    @property
    def phrases(self) -> list[Phrase]:
        return self.path.chunks

    @property
    def root(self) -> int:
        return self.heads.index(ROOT)


def edge_cost(p: Phrase, cfg: ConnectConfig) -> float:
    return max(cfg.eps, 1 + cfg.lam * (p.extent - p.span) - cfg.mu * p.wt)


def skipped_tokens(chunks, n: int) -> list[int]:
    covered = set()
    for c in chunks:
        covered.update(c.covered())
    return [i for i in range(n) if i not in covered]


def connect_chunks(chart: Chart, cfg: ConnectConfig = ConnectConfig()) -> ChunkPath:
    """Cheapest left-to-right chunk sequence over the whole sentence.

    Ties go to fewer chunks, then fewer skip edges, then the smaller
    sequence of phrase ids.
    """
    n = chart.sentence_length
    by_start: dict[int, list[Phrase]] = defaultdict(list)
    for p in chart.all_phrases:
        by_start[p.start].append(p)

    # label = (cost, chunks, skip edges, phrase ids); compared lexicographically
    start_label = (0.0, 0, 0, ())
    best = {0: start_label}
    back: dict[int, tuple[int, Phrase | None]] = {}
    heap = [(start_label, 0)]
    done = set()
    while heap:
        label, node = heapq.heappop(heap)
        if node in done or best.get(node) != label:
            continue
        done.add(node)
        if node == n:
            break
        cost, nchunks, nskips, ids = label
        edges = [(node + 1, (cost + cfg.sigma, nchunks, nskips + 1, ids), None)]
        for p in by_start.get(node, ()):
            edges.append((p.end + 1,
                          (cost + edge_cost(p, cfg), nchunks + 1, nskips, ids + (p.id,)), p))
        for target, new, p in edges:
            if target not in done and (target not in best or new < best[target]):
                best[target] = new
                back[target] = (node, p)
                heapq.heappush(heap, (new, target))

    chunks = []
    node = n
    while node != 0:
        prev, p = back[node]
        if p is not None:
            chunks.append(p)
        node = prev
    chunks.reverse()
    return ChunkPath(chunks, skipped_tokens(chunks, n), best[n][0])


def score_hypothesis(chunks, n_skipped: int, cfg: ConnectConfig = ConnectConfig()) -> float:
    """Summed chunk weight less penalties for extra chunks and skipped tokens."""
    total = 0.0
    for c in chunks:
        total += c.wt
    return total - cfg.alpha * (len(chunks) - 1) - cfg.beta * n_skipped


def _alternatives(chart: Chart, chunk: Phrase, limit: int, cfg: ConnectConfig) -> list[Phrase]:
    same = [p for cats in chart.index.get(chunk.end, {}).get(chunk.start, {}).values()
            for p in cats]
    same.sort(key=lambda p: (-(p.wt - cfg.beta * p.skipped), p.skipped, p.id))
    top = same[:limit]
    if chunk not in top:
        top.append(chunk)
        top.sort(key=lambda p: (-(p.wt - cfg.beta * p.skipped), p.skipped, p.id))
    return top


def rank_results(chart: Chart, path: ChunkPath, k: int = 1,
                 cfg: ConnectConfig = ConnectConfig()) -> list[ParseResult]:
    """Up to ``k`` hypotheses over the chunk extents of ``path``, best first.

    Each chunk may be replaced by another phrase over the same extent; the
    score decomposes per chunk, so the k best combinations are enumerated
    lazily from the per-chunk lists sorted best first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = chart.sentence_length
    options = [_alternatives(chart, c, cfg.alternatives, cfg) for c in path.chunks]

    def entry(idx):
        chunks = [opts[i] for opts, i in zip(options, idx)]
        skipped = skipped_tokens(chunks, n)
        score = score_hypothesis(chunks, len(skipped), cfg)
        return (-score, len(skipped), tuple(c.id for c in chunks)), idx, chunks, skipped

    results = []
    first = tuple(0 for _ in options)
    heap = [entry(first)]
    seen = {first}
    while heap and len(results) < k:
        key, idx, chunks, skipped = heapq.heappop(heap)
        heads = chunk_heads(chunks, skipped, n, cfg.root)
        cost = sum(edge_cost(c, cfg) for c in chunks) + cfg.sigma * (
            n - sum(c.extent for c in chunks))
        results.append(ParseResult(ChunkPath(chunks, skipped, cost), -key[0], heads,
                                   chosen_tags(chart, chunks), chart.budget_exceeded))
        for i in range(len(idx)):
            nxt = idx[:i] + (idx[i] + 1,) + idx[i + 1:]
            if nxt[i] < len(options[i]) and nxt not in seen:
                seen.add(nxt)
                heapq.heappush(heap, entry(nxt))
    if not results:  # sentence with no chunks at all
        skipped = list(range(n))
        results.append(ParseResult(ChunkPath([], skipped, cfg.sigma * n),
                                   score_hypothesis([], n, cfg),
                                   chunk_heads([], skipped, n, cfg.root),
                                   chosen_tags(chart, []), chart.budget_exceeded))
    return results


def chosen_tags(chart: Chart, chunks) -> list[str | None]:
    """Leaf category per token: from the chunks, else the heaviest leaf."""
    tags: list[str | None] = [None] * chart.sentence_length
    for c in chunks:
        for leaf in c.leaves():
            tags[leaf.start] = leaf.cat
    for i, t in enumerate(tags):
        if t is None:
            leaves = chart.leaves_at(i)
            if leaves:
                tags[i] = min(leaves, key=lambda p: (-p.wt, p.id)).cat
    return tags


def best_parses(chart: Chart, k: int = 1, cfg: ConnectConfig = ConnectConfig()):
    return rank_results(chart, connect_chunks(chart, cfg), k, cfg)
