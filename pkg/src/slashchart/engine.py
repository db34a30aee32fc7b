"""Left-to-right phrase projection.

Tokens are consumed in order. Each leaf is inserted into the chart and
projected to quiescence before the next token is read: every rule whose
last child accepts the phrase is tried, binary rules pairing it with
phrases that end at most ``max_skip`` tokens to its left. Every phrase a
rule builds is inserted and projected in turn, depth first.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from .chart import Chart, Phrase, left_neighbors
from .grammar import Grammar, Rule, rules_for_last_child
from .lexicon import DEFAULT_CUTOFF, TagDistribution, tag_sentence

log = logging.getLogger(__name__)

TraceFn = Callable[[Rule, Sequence[Phrase], Phrase, bool], None]


@dataclass(frozen=True)
class ParseConfig:
    max_skip: int = 2
    beam_per_cell: int | None = 8  # None disables the beam
    max_phrases: int = 50_000
    tag_cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.max_skip < 0:
            raise ValueError("max_skip must be >= 0")
        if self.beam_per_cell is not None and self.beam_per_cell < 1:
            raise ValueError("beam_per_cell must be >= 1")
        if self.max_phrases < 1:
            raise ValueError("max_phrases must be >= 1")
        if not 0 <= self.tag_cutoff < 1:
            raise ValueError("tag_cutoff must lie in [0, 1)")


def create_leaf_phrases(distributions: Sequence[TagDistribution]) -> list[Phrase]:
    leaves = []
    for dist in distributions:
        i = dist.token_index
        for h in dist.hypotheses:
            leaves.append(Phrase(wt=h.weight, start=i, end=i, span=1, cat=h.tag,
                                 feat=tuple(h.features), head_loc=i))
    return leaves


def build_phrase(rule: Rule, children: Sequence[Phrase]) -> Phrase:
    head = children[rule.head_index]
    return Phrase(
        wt=sum(c.wt for c in children),
        start=children[0].start,
        end=children[-1].end,
        span=sum(c.span for c in children),
        cat=rule.parent,
        feat=rule.parent_features,
        head_loc=head.head_loc,
        children=tuple(children),
        level=1 + max(c.level for c in children),
        rule_id=rule.id,
    )


def _unary_chain_labels(p: Phrase) -> set:
    labels = set()
    while True:
        labels.add((p.cat, frozenset(p.feat)))
        if len(p.children) != 1:
            return labels
        p = p.children[0]


class _Budget(Exception):
    pass


class _Projector:
    def __init__(self, chart: Chart, grammar: Grammar, cfg: ParseConfig,
                 trace: TraceFn | None = None):
        self.chart = chart
        self.grammar = grammar
        self.cfg = cfg
        self.trace = trace
        self.created = len(chart)
        # Cells ending before the token being read are final, so neighbour
        # lists to the left of any phrase can be reused.
        self._left_cache: dict[tuple, list[Phrase]] = {}
        self._rule_cache: dict[tuple, list[Rule]] = {}

    def _rules(self, p: Phrase) -> list[Rule]:
        key = (p.cat, p.feat)
        found = self._rule_cache.get(key)
        if found is None:
            found = self._rule_cache[key] = rules_for_last_child(self.grammar, p.cat, p.feat)
        return found

    def _left(self, start: int, child) -> list[list[Phrase]]:
        """Left neighbours for a phrase starting at ``start``, grouped by their start.

        Every phrase in a group yields a parent in the same chart cell. Groups
        run by ascending start, so the widest parent comes first; inside a group phrases run heaviest, then deepest,
        then oldest first, which is the order the beam itself keeps them in.
        """
        key = (start, child.category, child.constraints)
        found = self._left_cache.get(key)
        if found is None:
            groups: dict[int, list[Phrase]] = {}
            for q in left_neighbors(self.chart, start, self.cfg.max_skip,
                                    child.category, child.constraints):
                groups.setdefault(q.start, []).append(q)
            found = [sorted(g, key=lambda q: (-q.wt, -q.level, q.id))
                     for _, g in sorted(groups.items())]
            self._left_cache[key] = found
        return found

    def _expansions(self, p: Phrase):
        chart = self.chart
        reject = chart.would_reject
        start, end, wt, level = p.start, p.end, p.wt, p.level
        labels = None
        for rule in self._rules(p):
            if p not in chart:
                return  # evicted by the beam while we were deeper in the stack
            if rule.is_unary:
                # A unary chain never revisits a (category, features) label.
                if labels is None:
                    labels = _unary_chain_labels(p)
                if (rule.parent, frozenset(rule.parent_features)) in labels:
                    continue
                if reject(end, start, rule.parent, wt, level + 1):
                    continue
                yield rule, (p,)
            else:
                parent = rule.parent
                for group in self._left(start, rule.children[0]):
                    refused = None
                    for left in group:
                        total = left.wt + wt
                        if refused is not None and total < refused:
                            break  # the rest of the group is lighter still
                        lvl = left.level if left.level > level else level
                        if reject(end, left.start, parent, total, lvl + 1):
                            refused = total
                            continue
                        yield rule, (left, p)

    def project(self, p: Phrase) -> list[Phrase]:
        created = []
        stack = [self._expansions(p)]
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                continue
            rule, children = step
            new = build_phrase(rule, children)
            key = new.key()
            if self.chart.has_key(key):
                continue
            added = self.chart.add(new, key)
            if self.trace is not None:
                self.trace(rule, children, new, added)
            if not added:
                continue
            created.append(new)
            self.created += 1
            if self.created > self.cfg.max_phrases:
                self.chart.budget_exceeded = True
                raise _Budget
            stack.append(self._expansions(new))
        return created


def project(chart: Chart, p: Phrase, grammar: Grammar, cfg: ParseConfig,
            trace: TraceFn | None = None) -> list[Phrase]:
    """Project ``p`` (already in the chart) recursively; return new phrases.

    On budget exhaustion the chart is flagged and the phrases built so far
    are kept.
    """
    projector = _Projector(chart, grammar, cfg, trace)
    try:
        return projector.project(p)
    except _Budget:
        return []


def parse_distributions(distributions: Sequence[TagDistribution], grammar: Grammar,
                        cfg: ParseConfig = ParseConfig(),
                        trace: TraceFn | None = None) -> Chart:
    chart = Chart(len(distributions), cfg.beam_per_cell)
    chart.tokens = [d.form for d in distributions]
    chart.distributions = list(distributions)
    projector = _Projector(chart, grammar, cfg, trace)
    for dist in distributions:
        for leaf in create_leaf_phrases([dist]):
            if not chart.add(leaf) or chart.budget_exceeded:
                continue
            projector.created += 1
            try:
                projector.project(leaf)
            except _Budget:
                log.warning("phrase budget of %d exceeded after token %d",
                            cfg.max_phrases, dist.token_index)
    return chart


def parse_sentence(tokens: Sequence[str], model, closed, grammar: Grammar,
                   cfg: ParseConfig = ParseConfig(), tag_features=None,
                   trace: TraceFn | None = None) -> Chart:
    if not tokens:
        raise ValueError("empty sentence")
    dists = tag_sentence(tokens, model, closed, cfg.tag_cutoff, tag_features)
    return parse_distributions(dists, grammar, cfg, trace)
