"""Rule formalism, rule-file loading and last-child rule lookup.

A rule file holds one rule per line::

    # comment
    NP -> AP ^NP-U
    BE -> AUX[+be]
    VP-O[fin] -> ^V[+fin] NP

The parent may carry a bracketed list of bare feature names that are
assigned to every phrase the rule builds. Child brackets hold constraints,
each with an explicit ``+`` (feature required) or ``-`` (feature forbidden)
polarity. ``^`` marks the head child; it is optional on unary rules.
Categories are opaque strings, so ``S/NP`` is a category of its own and
never matches ``S``.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, TextIO

log = logging.getLogger(__name__)

ARROW = "->"
HEAD_MARK = "^"

_CATEGORY_RE = re.compile(r"[^\s\[\]\^#]+")
_FEATURE_RE = re.compile(r"[^\s\[\]\^,#+\-]+")


class GrammarError(ValueError):
    """A rule line (or several, when raised by :func:`load_grammar`) is malformed."""

    def __init__(self, message: str, line: str = "", lineno: int | None = None,
                 column: int | None = None, errors: list[GrammarError] | None = None,
                 reason: str = ""):
        self.reason = reason or message
        self.line = line
        self.lineno = lineno
        self.column = column
        self.errors = errors or []
        super().__init__(message)


def is_category(name: str) -> bool:
    return bool(name) and _CATEGORY_RE.fullmatch(name) is not None


def is_feature_name(name: str) -> bool:
    return bool(name) and _FEATURE_RE.fullmatch(name) is not None


@dataclass(frozen=True)
class FeatureConstraint:
    name: str
    positive: bool = True

    def __post_init__(self):
        if not is_feature_name(self.name):
            raise ValueError(f"bad feature name {self.name!r}")

    def satisfied_by(self, feats) -> bool:
        return (self.name in feats) == self.positive

    def __str__(self):
        return ("+" if self.positive else "-") + self.name


def satisfies(constraints: Iterable[FeatureConstraint], feats) -> bool:
    """True when every constraint holds for the feature collection ``feats``."""
    return all(c.satisfied_by(feats) for c in constraints)


@dataclass(frozen=True)
class RuleChild:
    category: str
    constraints: tuple[FeatureConstraint, ...] = ()
    is_head: bool = False

    def __post_init__(self):
        if not is_category(self.category):
            raise ValueError(f"bad category {self.category!r}")
        names = [c.name for c in self.constraints]
        if len(set(names)) != len(names):
            raise ValueError(f"repeated feature constraint in {names}")

    def matches(self, cat: str, feats) -> bool:
        return cat == self.category and satisfies(self.constraints, feats)


@dataclass(frozen=True)
class Rule:
    parent: str
    children: tuple[RuleChild, ...]
    parent_features: tuple[str, ...] = ()
    id: int = 0

    def __post_init__(self):
        if not is_category(self.parent):
            raise ValueError(f"bad category {self.parent!r}")
        if len(self.children) not in (1, 2):
            raise ValueError("a rule has one or two children")
        if sum(c.is_head for c in self.children) != 1:
            raise ValueError("a rule has exactly one head child")
        for f in self.parent_features:
            if not is_feature_name(f):
                raise ValueError(f"bad feature name {f!r}")

    @property
    def is_unary(self) -> bool:
        return len(self.children) == 1

    @property
    def head_index(self) -> int:
        return next(i for i, c in enumerate(self.children) if c.is_head)

    @property
    def last(self) -> RuleChild:
        return self.children[-1]

    def signature(self):
        """Everything except the id; equal signatures mean duplicate rules."""
        return (self.parent, self.parent_features, self.children)

    def __str__(self):
        return format_rule(self)


def format_rule(rule: Rule) -> str:
    parent = rule.parent
    if rule.parent_features:
        parent += "[" + ",".join(rule.parent_features) + "]"
    parts = []
    for child in rule.children:
        text = child.category
        if child.constraints:
            text += "[" + ",".join(str(c) for c in child.constraints) + "]"
        if child.is_head and not rule.is_unary:
            text = HEAD_MARK + text
        parts.append(text)
    return f"{parent} {ARROW} {' '.join(parts)}"


_ITEM_RE = re.compile(r"(\^?)([^\s\[\]]*)(?:\[([^\]]*)\])?$")


def _error(msg: str, line: str, col: int, lineno: int | None = None) -> GrammarError:
    where = f"line {lineno}, " if lineno is not None else ""
    return GrammarError(f"{where}column {col + 1}: {msg}: {line.strip()!r}",
                        line=line, lineno=lineno, column=col, reason=msg)


def parse_rule_line(line: str, rule_id: int = 0) -> Rule:
    """Parse one rule line (no comment, not blank) into a :class:`Rule`."""
    if line.count(ARROW) != 1:
        col = max(line.find(ARROW, line.find(ARROW) + 1), 0)
        raise _error("expected exactly one '->'", line, col)
    lhs, rhs = line.split(ARROW)
    rhs_offset = len(lhs) + len(ARROW)

    m = _ITEM_RE.match(lhs.strip())
    if not m or m.group(1) or not m.group(2):
        raise _error("bad parent", line, len(lhs) - len(lhs.lstrip()))
    parent = m.group(2)
    if not is_category(parent):
        raise _error(f"bad parent category {parent!r}", line, 0)
    parent_features: tuple[str, ...] = ()
    if m.group(3) is not None:
        parent_features = tuple(f.strip() for f in m.group(3).split(","))
        bad = [f for f in parent_features if not is_feature_name(f)]
        if bad:
            raise _error(f"bad parent feature {bad[0]!r}", line, line.find("["))

    items = [(mt.group(), mt.start() + rhs_offset) for mt in re.finditer(r"\S+", rhs)]
    if not 1 <= len(items) <= 2:
        raise _error(f"expected 1 or 2 children, got {len(items)}", line, rhs_offset)

    children = []
    for text, col in items:
        m = _ITEM_RE.match(text)
        if not m or not m.group(2):
            raise _error(f"bad child {text!r}", line, col)
        cat = m.group(2)
        if not is_category(cat):
            raise _error(f"bad child category {cat!r}", line, col)
        constraints = []
        if m.group(3) is not None:
            for entry in m.group(3).split(","):
                entry = entry.strip()
                if len(entry) < 2 or entry[0] not in "+-" or not is_feature_name(entry[1:]):
                    raise _error(f"bad feature constraint {entry!r}", line, col)
                constraints.append(FeatureConstraint(entry[1:], entry[0] == "+"))
        names = [c.name for c in constraints]
        if len(set(names)) != len(names):
            raise _error("repeated feature in constraint list", line, col)
        children.append(RuleChild(cat, tuple(constraints), bool(m.group(1))))

    heads = [i for i, c in enumerate(children) if c.is_head]
    if len(children) == 1:
        children[0] = RuleChild(children[0].category, children[0].constraints, True)
    elif len(heads) != 1:
        what = "no head marker" if not heads else "two head markers"
        raise _error(f"binary rule needs exactly one '^' ({what})", line, rhs_offset)

    return Rule(parent, tuple(children), parent_features, rule_id)


def strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


@dataclass
class Grammar:
    rules: list[Rule] = field(default_factory=list)
    duplicates: int = 0
    last_child_index: dict[str, list[Rule]] = field(init=False, repr=False)
    unary_index: dict[str, list[Rule]] = field(init=False, repr=False)

    def __post_init__(self):
        self._build_indexes()

    def _build_indexes(self):
        binary: dict[str, list[Rule]] = defaultdict(list)
        unary: dict[str, list[Rule]] = defaultdict(list)
        for rule in sorted(self.rules, key=lambda r: r.id):
            (unary if rule.is_unary else binary)[rule.last.category].append(rule)
        self.last_child_index = dict(binary)
        self.unary_index = dict(unary)
        self._by_last = {}
        for cat in set(binary) | set(unary):
            merged = binary.get(cat, []) + unary.get(cat, [])
            self._by_last[cat] = sorted(merged, key=lambda r: r.id)

    def __len__(self):
        return len(self.rules)

    def candidates(self, cat: str) -> list[Rule]:
        """Rules whose last child has category ``cat``, ignoring constraints."""
        return self._by_last.get(cat, [])

    def subset(self, n: int) -> Grammar:
        """The first ``n`` rules in file order, as a new grammar."""
        return Grammar(sorted(self.rules, key=lambda r: r.id)[:n])

    def categories(self) -> set[str]:
        cats = set()
        for r in self.rules:
            cats.add(r.parent)
            cats.update(c.category for c in r.children)
        return cats


def rules_for_last_child(grammar: Grammar, cat: str, feats) -> list[Rule]:
    """Every rule whose last child accepts a phrase of ``cat`` with ``feats``, in id order."""
    feats = set(feats)
    return [r for r in grammar.candidates(cat) if satisfies(r.last.constraints, feats)]


def load_grammar(source: TextIO | Iterable[str]) -> Grammar:
    """Read a rule file. Rule ids are 1-based source line numbers.

    Exact duplicates are dropped (the first occurrence wins) and counted in
    ``Grammar.duplicates``. All malformed lines are collected and reported in
    a single :class:`GrammarError`.
    """
    rules: list[Rule] = []
    seen = set()
    duplicates = 0
    errors: list[GrammarError] = []
    for lineno, raw in enumerate(source, 1):
        text = strip_comment(raw)
        if not text:
            continue
        try:
            rule = parse_rule_line(text, lineno)
        except GrammarError as exc:
            errors.append(_error(exc.reason, raw.rstrip("\n"), exc.column or 0, lineno))
            continue
        except ValueError as exc:
            errors.append(_error(str(exc), raw.rstrip("\n"), 0, lineno))
            continue
        sig = rule.signature()
        if sig in seen:
            duplicates += 1
            continue
        seen.add(sig)
        rules.append(rule)
    if errors:
        msg = f"{len(errors)} bad rule line(s):\n" + "\n".join(str(e) for e in errors)
        raise GrammarError(msg, errors=errors)
    if duplicates:
        log.warning("dropped %d duplicate rule(s)", duplicates)
    return Grammar(rules, duplicates)


def load_grammar_file(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return load_grammar(fh)
