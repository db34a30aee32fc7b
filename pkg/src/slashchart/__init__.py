"""Rule-driven chart parsing with slash categories, producing ranked parses
that carry both dependency and constituency structure."""

__version__ = "0.1.0"

from .chart import Chart, Phrase, add_phrase, left_neighbors
from .connect import (ChunkPath, ConnectConfig, ParseResult, best_parses, connect_chunks,
                      rank_results, score_hypothesis)
from .engine import ParseConfig, create_leaf_phrases, parse_distributions, parse_sentence, project
from .export import ROOT, to_combined, to_conllu, to_constituency, to_dependency
from .grammar import (FeatureConstraint, Grammar, GrammarError, Rule, RuleChild, format_rule,
                      load_grammar, parse_rule_line, rules_for_last_child)
from .lexicon import (ClosedClassTable, TagDistribution, TaggerModel, TagHypothesis,
                      load_closed_class, tag_token, train_tagger)
from .pipeline import ParserBundle, load_bundle
from .treebank import GoldSentence, evaluate_corpus, read_conllu, uas

__all__ = [
    "Chart",
    "Phrase",
    "add_phrase",
    "left_neighbors",
    "ChunkPath",
    "ConnectConfig",
    "ParseResult",
    "best_parses",
    "connect_chunks",
    "rank_results",
    "score_hypothesis",
    "ParseConfig",
    "create_leaf_phrases",
    "parse_distributions",
    "parse_sentence",
    "project",
    "ROOT",
    "to_combined",
    "to_conllu",
    "to_constituency",
    "to_dependency",
    "FeatureConstraint",
    "Grammar",
    "GrammarError",
    "Rule",
    "RuleChild",
    "format_rule",
    "load_grammar",
    "parse_rule_line",
    "rules_for_last_child",
    "ClosedClassTable",
    "TagDistribution",
    "TaggerModel",
    "TagHypothesis",
    "load_closed_class",
    "tag_token",
    "train_tagger",
    "ParserBundle",
    "load_bundle",
    "GoldSentence",
    "evaluate_corpus",
    "read_conllu",
    "uas",
]
