"""Phrase records and the per-sentence phrase index.

Phrases are looked up as ``index[end][start][cat]``. A second index keyed
by ``[end][cat]`` serves left-neighbour scans, which always fix the end
position and category of the phrase they want.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .grammar import FeatureConstraint, satisfies


class ChartInvariantError(AssertionError):
    pass


@dataclass(eq=False, slots=True)
class Phrase:
    wt: float
    start: int
    end: int
    span: int
    cat: str
    feat: tuple[str, ...] = ()
    head_loc: int = 0
    children: tuple[Phrase, ...] = ()
    level: int = 0
    id: int = -1
    rule_id: int | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def extent(self) -> int:
        return self.end - self.start + 1

    @property
    def skipped(self) -> int:
        """Tokens inside the extent not covered by any leaf."""
        return self.extent - self.span

    @property
    def head_child(self) -> Phrase | None:
        for c in self.children:
            if c.head_loc == self.head_loc:
                return c
        return None

    def key(self):
        return (self.cat, self.start, self.end, frozenset(self.feat), self.head_loc,
                tuple(c.id for c in self.children))

    def item(self):
        return (self.cat, self.start, self.end, frozenset(self.feat))

    def leaves(self) -> list[Phrase]:
        out, stack = [], [self]
        while stack:
            p = stack.pop()
            if p.children:
                stack.extend(reversed(p.children))
            else:
                out.append(p)
        return out

    def covered(self) -> list[int]:
        return [leaf.start for leaf in self.leaves()]

    def walk(self):
        """Every phrase in this subtree, children before parents."""
        for c in self.children:
            yield from c.walk()
        yield self

    def as_record(self) -> dict:
        return {"id": self.id, "wt": self.wt, "span": self.span, "start": self.start,
                "end": self.end, "cat": self.cat, "feat": list(self.feat),
                "head_loc": self.head_loc, "children": [c.id for c in self.children],
                "level": self.level}

    def __repr__(self):
        feats = f"[{','.join(self.feat)}]" if self.feat else ""
        return f"<{self.id} {self.cat}{feats} {self.start}-{self.end} wt={self.wt:g}>"


def _retention_key(p: Phrase):
    # Smaller is better: heavier, then deeper, then older.
    return (-p.wt, -p.level, p.id)


def check_phrase(p: Phrase, n: int) -> None:
    def fail(msg):
        raise ChartInvariantError(f"{msg}: {p!r}")

    if not 0 <= p.start <= p.end < n:
        fail("extent outside sentence")
    if not p.start <= p.head_loc <= p.end:
        fail("head outside extent")
    if not 1 <= p.span <= p.extent:
        fail("span outside [1, extent]")
    if p.wt < 0:
        fail("negative weight")
    if not p.children:
        if p.level != 0 or p.span != 1 or p.start != p.end:
            fail("malformed leaf")
        return
    if len(p.children) > 2:
        fail("too many children")
    if p.level == 0:
        fail("non-leaf at level 0")
    if len(p.children) == 2 and not p.children[0].end < p.children[1].start:
        fail("children overlap or are out of order")
    if p.start != p.children[0].start or p.end != p.children[-1].end:
        fail("extent does not match children")
    if p.head_child is None:
        fail("head_loc matches no child")
    if p.span != sum(c.span for c in p.children):
        fail("span is not the sum of child spans")
    if p.wt != sum(c.wt for c in p.children):
        fail("weight is not the sum of child weights")


@dataclass
class Chart:
    sentence_length: int
    beam_per_cell: int | None = None
    index: dict[int, dict[int, dict[str, list[Phrase]]]] = field(default_factory=dict)
    budget_exceeded: bool = False
    evicted: int = 0
    tokens: list[str] = field(default_factory=list)
    distributions: list = field(default_factory=list)

    def __post_init__(self):
        # insertion-ordered id -> phrase maps, so evictions are cheap
        self._by_end_cat: dict[int, dict[str, dict[int, Phrase]]] = {}
        self._phrases: dict[int, Phrase] = {}
        self._keys: set = set()
        self._next_id = 0
        self._worst: dict[tuple, tuple] = {}  # full cells: (retention key, phrase)

    @property
    def all_phrases(self) -> list[Phrase]:
        return list(self._phrases.values())

    def __len__(self):
        return len(self._phrases)

    def __contains__(self, p: Phrase) -> bool:
        return self._phrases.get(p.id) is p

    def has_key(self, key) -> bool:
        return key in self._keys

    def cell(self, end: int, start: int, cat: str) -> list[Phrase]:
        return self.index.get(end, {}).get(start, {}).get(cat, [])

    def ending_at(self, end: int, cat: str) -> list[Phrase]:
        return list(self._by_end_cat.get(end, {}).get(cat, {}).values())

    def leaves_at(self, pos: int) -> list[Phrase]:
        cats = self.index.get(pos, {}).get(pos, {})
        return [p for ps in cats.values() for p in ps if p.is_leaf]

    def would_reject(self, end: int, start: int, cat: str, wt: float, level: int) -> bool:
        """True when a new phrase with this weight and level cannot enter its cell."""
        worst = self._worst.get((end, start, cat))
        return worst is not None and (-wt, -level, self._next_id) > worst[0]

    def add(self, p: Phrase, key=None) -> bool:
        check_phrase(p, self.sentence_length)
        if key is None:
            key = p.key()
        if key in self._keys:
            return False
        if p.id < 0:
            p.id = self._next_id
        elif p.id in self._phrases:
            raise ChartInvariantError(f"duplicate phrase id {p.id}")
        self._next_id = max(self._next_id, p.id) + 1

        cell = self.index.setdefault(p.end, {}).setdefault(p.start, {}).setdefault(p.cat, [])
        beam = self.beam_per_cell
        if beam is not None and len(cell) >= beam:
            worst_key, worst = self._worst[(p.end, p.start, p.cat)]
            if _retention_key(p) > worst_key:
                self.evicted += 1
                return False
            self._remove(worst, cell)
        cell.append(p)
        self._by_end_cat.setdefault(p.end, {}).setdefault(p.cat, {})[p.id] = p
        self._phrases[p.id] = p
        self._keys.add(key)
        if beam is not None and len(cell) >= beam:
            worst = max(cell, key=_retention_key)
            self._worst[(p.end, p.start, p.cat)] = (_retention_key(worst), worst)
        return True

    def _remove(self, p: Phrase, cell: list[Phrase]) -> None:
        cell.remove(p)
        del self._by_end_cat[p.end][p.cat][p.id]
        del self._phrases[p.id]
        self._keys.discard(p.key())
        self.evicted += 1

    def dump(self) -> str:
        lines = []
        for p in self.all_phrases:
            kids = ",".join(str(c.id) for c in p.children) or "-"
            feats = ",".join(p.feat)
            rule = "" if p.rule_id is None else f" rule={p.rule_id}"
            lines.append(f"{p.id}\t{p.cat}[{feats}]\t{p.start}-{p.end}\tspan={p.span}"
                         f"\twt={p.wt:.6g}\thead={p.head_loc}\tlevel={p.level}"
                         f"\tchildren={kids}{rule}")
        return "\n".join(lines)


def add_phrase(chart: Chart, p: Phrase) -> bool:
    """Insert ``p``; False when an equivalent phrase exists or the beam rejects it."""
    return chart.add(p)


def left_neighbors(chart: Chart, right_start: int, max_skip: int, cat: str,
                   constraints: Sequence[FeatureConstraint] = ()) -> list[Phrase]:
    """Phrases of ``cat`` ending 0..max_skip tokens before ``right_start``.

    Ordered by end (nearest first), then by weight (heaviest first), then id.
    """
    if max_skip < 0:
        raise ValueError("max_skip must be >= 0")
    out: list[Phrase] = []
    for end in range(right_start - 1, max(right_start - 2 - max_skip, -1), -1):
        found = [p for p in chart.ending_at(end, cat) if satisfies(constraints, p.feat)]
        found.sort(key=lambda p: (-p.wt, p.id))
        out.extend(found)
    return out


def leaf(pos: int, cat: str, wt: float = 1.0, feat: Iterable[str] = ()) -> Phrase:
    return Phrase(wt=wt, start=pos, end=pos, span=1, cat=cat, feat=tuple(feat),
                  head_loc=pos)
