"""Command-line entry point: ``slashchart {train-tagger,parse,eval}``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then command-line flags, later sources winning.
Exit status is 0 on success (partial parses included), 2 on usage or I/O
errors and 3 when an internal invariant check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .chart import ChartInvariantError
from .connect import ConnectConfig
from .engine import ParseConfig
from .export import to_combined, to_conllu, to_constituency
from .grammar import GrammarError, format_rule
from .lexicon import LexiconError, data_path, save_model_file, train_tagger
from .pipeline import load_bundle
from .treebank import ConlluError, evaluate_corpus, format_report, read_conllu, read_conllu_file

log = logging.getLogger("slashchart")

EXIT_USAGE = 2
EXIT_INTERNAL = 3

DEFAULTS = {
    "grammar": None,
    "model": None,
    "closed_class": None,
    "format": "json",
    "k": 1,
    "max_skip": 2,
    "beam": 8,
    "max_phrases": 50_000,
    "cutoff": 0.05,
    "gold_tags": False,
    "jobs": 1,
    "max_rules": None,
    "lam": 0.5,
    "mu": 0.25,
    "eps": 0.01,
    "sigma": 2.0,
    "alpha": 0.5,
    "beta": 1.0,
    "root": "leftmost",
    "features": False,
    "trace": False,
}

_CONVERT = {
    "k": int, "max_skip": int, "beam": int, "max_phrases": int, "jobs": int,
    "max_rules": int, "cutoff": float, "lam": float, "mu": float, "eps": float,
    "sigma": float, "alpha": float, "beta": float,
    "gold_tags": lambda v: v.lower() in ("1", "true", "yes", "on"),
    "features": lambda v: v.lower() in ("1", "true", "yes", "on"),
    "trace": lambda v: v.lower() in ("1", "true", "yes", "on"),
}


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown setting {key!r}")
            try:
                settings[key] = _CONVERT.get(key, str)(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return settings


def resolve_settings(args) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _add_parser_flags(p):
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--grammar", help="rule file (default: shipped English rules)")
    p.add_argument("--model", help="tagger model (default: shipped sample model)")
    p.add_argument("--closed-class", dest="closed_class", help="closed-class CSV")
    p.add_argument("--max-rules", dest="max_rules", type=int,
                   help="use only the first N rules of the grammar")
    p.add_argument("--k", type=int, help="number of ranked parses per sentence")
    p.add_argument("--max-skip", dest="max_skip", type=int, help="tokens a rule may skip")
    p.add_argument("--beam", type=int, help="phrases kept per chart cell (0 = unlimited)")
    p.add_argument("--max-phrases", dest="max_phrases", type=int, help="phrase budget per sentence")
    p.add_argument("--cutoff", type=float, help="tag probability cutoff")
    p.add_argument("--gold-tags", dest="gold_tags", action="store_true", default=None,
                   help="use treebank XPOS tags instead of the tagger")
    p.add_argument("--jobs", type=int, help="parallel worker processes")
    p.add_argument("--seedless", action="store_true",
                   help="accepted for manifest compatibility; parsing uses no randomness")
    for name in ("lam", "mu", "eps", "sigma", "alpha", "beta"):
        p.add_argument(f"--{name}", type=float, help=argparse.SUPPRESS)
    p.add_argument("--root", choices=["leftmost", "heaviest"], help="which chunk head is ROOT")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slashchart", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train-tagger", help="train the frequency tagger on CoNLL-U files")
    tr.add_argument("files", nargs="*", help="CoNLL-U training files")
    tr.add_argument("-o", "--output", required=True, help="model file to write")
    tr.add_argument("--fallback-k", type=int, default=8,
                    help="open-class tags in the unknown-word distribution")

    pa = sub.add_parser("parse", help="parse sentences")
    pa.add_argument("sentence", nargs="*", help="whitespace-tokenized sentence(s)")
    pa.add_argument("-i", "--input", help="input file, '-' for stdin")
    pa.add_argument("--input-format", choices=["text", "conllu"], default=None,
                    help="text: one tokenized sentence per line (default unless *.conllu)")
    pa.add_argument("--format", choices=["json", "conllu", "brackets"])
    pa.add_argument("--features", action="store_true", default=None,
                    help="show feature lists in bracketed output")
    pa.add_argument("--trace", action="store_true", default=None,
                    help="log every projection step to stderr")
    _add_parser_flags(pa)

    ev = sub.add_parser("eval", help="UAS against CoNLL-U treebanks")
    ev.add_argument("files", nargs="+", help="CoNLL-U files")
    ev.add_argument("--json-out", help="write the JSON report here ('-' for stdout)")
    ev.add_argument("--timings", action="store_true", help="include wall-clock seconds")
    _add_parser_flags(ev)
    return ap


def _bundle(s):
    grammar = s["grammar"] or data_path("english.rules")
    model = s["model"] or (None if s["gold_tags"] else data_path("sample.model"))
    parse_cfg = ParseConfig(max_skip=s["max_skip"], beam_per_cell=s["beam"] or None,
                            max_phrases=s["max_phrases"], tag_cutoff=s["cutoff"])
    connect_cfg = ConnectConfig(lam=s["lam"], mu=s["mu"], eps=s["eps"], sigma=s["sigma"],
                                alpha=s["alpha"], beta=s["beta"], root=s["root"])
    try:
        return load_bundle(grammar, model, s["closed_class"], max_rules=s["max_rules"],
                           parse_cfg=parse_cfg, connect_cfg=connect_cfg,
                           gold_tags=s["gold_tags"])
    except OSError as exc:
        raise UsageError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except (GrammarError, LexiconError) as exc:
        raise UsageError(str(exc)) from None


def cmd_train_tagger(args) -> int:
    if not args.files:
        raise UsageError("no training files given")
    try:
        sentences = [[(t.form, t.xpos) for t in s.tokens]
                     for path in args.files for s in read_conllu_file(path)]
        model = train_tagger(sentences, fallback_k=args.fallback_k)
    except OSError as exc:
        raise UsageError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except (ConlluError, LexiconError) as exc:
        raise UsageError(str(exc)) from None
    save_model_file(model, args.output)
    log.info("model with %d forms written to %s", len(model.form_counts), args.output)
    return 0


def _read_inputs(args):
    """List of (tokens, xpos or None, sent_id or None)."""
    if args.sentence:
        return [(s.split(), None, None) for s in args.sentence if s.split()]
    if not args.input:
        raise UsageError("give sentences as arguments or --input")
    fmt = args.input_format or ("conllu" if args.input.endswith(".conllu") else "text")
    try:
        fh = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    with fh:
        if fmt == "conllu":
            try:
                return [(s.forms, s.xpos, s.sent_id) for s in read_conllu(fh)]
            except ConlluError as exc:
                raise UsageError(str(exc)) from None
        return [(line.split(), None, None) for line in fh if line.split()]


_WORKER = None


def _init_worker(bundle, settings):
    global _WORKER
    _WORKER = (bundle, settings)


def _parse_one(item, bundle=None, settings=None):
    if bundle is None:
        bundle, settings = _WORKER
    index, (tokens, xpos, sent_id) = item
    trace_lines = []
    trace = None
    if settings["trace"]:
        def trace(rule, children, phrase, added):
            kids = ",".join(str(c.id) for c in children)
            state = "new" if added else "dropped"
            trace_lines.append(f"[{index}] rule {rule.id} ({format_rule(rule)}) "
                               f"children={kids} -> {phrase!r} {state}")
    if bundle.gold_tags and xpos is None:
        raise UsageError("--gold-tags needs CoNLL-U input")
    results = bundle.parse(tokens, xpos, k=settings["k"], trace=trace)
    fmt = settings["format"]
    if fmt == "json":
        out = json.dumps({
            "sentence": index, "sent_id": sent_id,
            "results": [{"rank": r + 1, "score": res.score,
                         "budget_exceeded": res.budget_exceeded,
                         "parse": to_combined(res, tokens)} for r, res in enumerate(results)],
        }, ensure_ascii=False) + "\n"
    elif fmt == "conllu":
        out = "".join(to_conllu(res, tokens, sent_id=sent_id,
                                comments=[f"rank = {r + 1}", f"score = {res.score:.6g}"]
                                + (["budget_exceeded = yes"] if res.budget_exceeded else []))
                      + "\n" for r, res in enumerate(results))
    else:
        out = "".join(f"# sentence {index} rank {r + 1} score {res.score:.6g}\n"
                      + to_constituency(res, tokens, settings["features"]) + "\n\n"
                      for r, res in enumerate(results))
    return out, "\n".join(trace_lines)


def cmd_parse(args) -> int:
    settings = resolve_settings(args)
    if settings["k"] < 1:
        raise UsageError("--k must be >= 1")
    bundle = _bundle(settings)
    inputs = list(enumerate(_read_inputs(args)))
    if settings["jobs"] > 1 and len(inputs) > 1:
        with ProcessPoolExecutor(settings["jobs"], initializer=_init_worker,
                                 initargs=(bundle, settings)) as pool:
            outputs = pool.map(_parse_one, inputs, chunksize=4)
            for out, trace in outputs:
                _emit(out, trace)
    else:
        for item in inputs:
            _emit(*_parse_one(item, bundle, settings))
    return 0


def _emit(out, trace):
    if trace:
        print(trace, file=sys.stderr)
    sys.stdout.write(out)


def cmd_eval(args) -> int:
    settings = resolve_settings(args)
    bundle = _bundle(settings)
    report = evaluate_corpus(args.files, bundle, jobs=settings["jobs"], timings=args.timings)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.json_out == "-":
        sys.stdout.write(text)
    else:
        print(format_report(report))
        if args.json_out:
            with open(args.json_out, "w", encoding="utf-8") as fh:
                fh.write(text)
    return 0


COMMANDS = {"train-tagger": cmd_train_tagger, "parse": cmd_parse, "eval": cmd_eval}


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"slashchart: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChartInvariantError as exc:
        print(f"slashchart: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
