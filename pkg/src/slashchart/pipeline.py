"""Everything needed to go from tokens to ranked parses, bundled together."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .chart import Chart
from .connect import ConnectConfig, ParseResult, best_parses
from .engine import ParseConfig, TraceFn, parse_distributions
from .grammar import Grammar, load_grammar_file
from .lexicon import (ClosedClassTable, TaggerModel, default_tag_features, gold_distributions,
                      load_closed_class, load_default_closed_class, load_model_file,
                      tag_sentence)


@dataclass
class ParserBundle:
    grammar: Grammar
    model: TaggerModel | None
    closed: ClosedClassTable | None
    parse_cfg: ParseConfig = field(default_factory=ParseConfig)
    connect_cfg: ConnectConfig = field(default_factory=ConnectConfig)
    gold_tags: bool = False
    tag_features: dict = field(default_factory=default_tag_features)

    def distributions(self, tokens: Sequence[str], xpos: Sequence[str] | None = None):
        if self.gold_tags:
            if xpos is None:
                raise ValueError("gold tags requested but none supplied")
            return gold_distributions(tokens, xpos, self.closed, self.tag_features)
        return tag_sentence(tokens, self.model, self.closed, self.parse_cfg.tag_cutoff,
                            self.tag_features)

    def chart(self, tokens, xpos=None, trace: TraceFn | None = None) -> Chart:
        return parse_distributions(self.distributions(tokens, xpos), self.grammar,
                                   self.parse_cfg, trace)

    def parse(self, tokens, xpos=None, k: int = 1,
              trace: TraceFn | None = None) -> list[ParseResult]:
        if not tokens:
            return []
        return best_parses(self.chart(tokens, xpos, trace), k, self.connect_cfg)


def load_bundle(grammar_path, model_path=None, closed_path=None, *, max_rules=None,
                parse_cfg=None, connect_cfg=None, gold_tags=False) -> ParserBundle:
    grammar = load_grammar_file(grammar_path)
    if max_rules is not None:
        grammar = grammar.subset(max_rules)
    model = load_model_file(model_path) if model_path else None
    if closed_path:
        with open(closed_path, encoding="utf-8") as fh:
            closed = load_closed_class(fh)
    else:
        closed = load_default_closed_class()
    if model is None and not gold_tags:
        raise ValueError("a tagger model is required unless gold tags are used")
    return ParserBundle(grammar, model, closed, parse_cfg or ParseConfig(),
                        connect_cfg or ConnectConfig(), gold_tags)
