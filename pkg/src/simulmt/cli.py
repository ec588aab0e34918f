"""Command line entry point: ``simulmt {clean,expand,evaluate,score,serve}``.

Every option may also come from ``--config FILE`` (flat ``key = value``).
Explicit flags win over the file; a notice goes to stderr when they differ.

Exit statuses: 0 success, 1 usage or configuration error, 2 I/O error,
3 more failed instances than ``--max-failures``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from .config import load_config, normalize_key, parse_bool
from .corpus import DEFAULT_TAGS, clean_pairs, load_parallel, write_drop_log, write_pairs
from .decoding import DecodeConfig
from .errors import ConfigurationError, CorpusError, ProviderError
from .harness import config_record, dump_json, read_instances, run_corpus, summarize
from .model import build_provider
from .prompting import PromptStructure, expand_corpus
from .tokenization import TokenizerScheme

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_FAILURES = 0, 1, 2, 3

log = logging.getLogger("simulmt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable[[str], Any] = str
    default: Any = None
    help: str = ""
    flag: bool = False
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError(f"{text} is not a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError(f"{text} is negative")
    return v


_STRUCTURE = Opt("structure", default="single-word", help="nmt, split or single-word")
_LANGS = (Opt("src-lang", default="English"), Opt("tgt-lang", default="Spanish"))

COMMANDS: dict[str, tuple[str, tuple[Opt, ...]]] = {
    "clean": ("strip transcript artifacts from a parallel corpus", (
        Opt("source", required=True, help="source text, one sentence per line"),
        Opt("target", required=True, help="target text, line-aligned with --source"),
        Opt("out-source", required=True),
        Opt("out-target", required=True),
        Opt("drop-log", help="write dropped line numbers and reasons here"),
        Opt("tags", default=",".join(DEFAULT_TAGS), help="comma-separated bracketed tags"),
    )),
    "expand": ("expand a corpus into wait-k fine-tuning examples (JSONL)", (
        Opt("source", required=True),
        Opt("target", required=True),
        Opt("k", _pos_int, required=True),
        _STRUCTURE, *_LANGS,
        Opt("out", required=True, help="output JSONL path"),
        Opt("manifest", help="manifest path (default: OUT.manifest.json)"),
        Opt("subsample", _nonneg_int, help="keep a seeded sample of this many examples"),
        Opt("seed", int, default=0),
    )),
    "evaluate": ("run a simultaneous evaluation and write instances.jsonl + summary.json", (
        Opt("source", required=True),
        Opt("reference", required=True),
        Opt("k", _pos_int, default=3),
        Opt("strategy", default="greedy", help="greedy, beam or sbs"),
        Opt("beams", _pos_int, default=1, help="beam width b"),
        Opt("chunk", _pos_int, default=1, help="words committed per SBS search (c)"),
        Opt("window", _pos_int, default=1, help="SBS window in tokens (w)"),
        Opt("guard", parse_bool, default=False, flag=True,
            help="clamp speculation below the visible source length"),
        Opt("max-tokens-per-word", _pos_int, default=16),
        Opt("model", default="echo",
            help="echo, lexicon:PATH, remote:tcp:HOST:PORT or remote:stdio:COMMAND"),
        Opt("tokenizer", default="word", help="word or chunk:N"),
        Opt("epsilon", float, default=0.0),
        Opt("permutation", default="", help='lexicon reorderings, e.g. "3:2,9:1"'),
        Opt("guess-penalty", float, default=0.0),
        Opt("top-k", _pos_int, default=20, help="alternatives requested from a remote model"),
        Opt("timeout", float, default=30.0, help="remote reply timeout in seconds"),
        _STRUCTURE, *_LANGS,
        Opt("out", required=True, help="output directory"),
        Opt("workers", _pos_int, default=1),
        Opt("timing", parse_bool, default=False, flag=True, help="record wall_ms"),
        Opt("max-failures", _nonneg_int, default=0),
    )),
    "score": ("recompute summary metrics from an instances.jsonl", (
        Opt("instances", required=True),
        Opt("out", help="write summary JSON here instead of stdout"),
    )),
    "serve": ("serve a model over the NDJSON protocol on stdio or TCP", (
        Opt("model", default="echo"),
        Opt("tokenizer", default="word"),
        Opt("epsilon", float, default=0.0),
        Opt("permutation", default=""),
        _STRUCTURE, *_LANGS,
        Opt("port", _nonneg_int, help="listen on TCP (0 picks a free port); stdio otherwise"),
        Opt("host", default="127.0.0.1"),
    )),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simulmt", description="Wait-k simultaneous translation toolkit.")
    parser.add_argument("--config", help="flat key = value file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (desc, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=desc, description=desc)
        p.add_argument("--config", dest="sub_config", help=argparse.SUPPRESS)
        for o in opts:
            hint = o.help + (f" (default: {o.default})" if o.default not in (None, "") else "")
            if o.flag:
                p.add_argument(f"--{o.name}", dest=o.dest, action="store_true", default=None,
                               help=hint)
            else:
                p.add_argument(f"--{o.name}", dest=o.dest, type=o.type, default=None,
                               metavar=o.dest.upper(), help=hint)
    return parser


def resolve(command: str, ns: argparse.Namespace, config: dict[str, str]) -> argparse.Namespace:
    """Merge config values under explicit flags and fill defaults."""
    opts = {o.name: o for o in COMMANDS[command][1]}
    unknown = sorted(set(config) - set(opts))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    out = argparse.Namespace(command=command)
    for name, o in opts.items():
        given = getattr(ns, o.dest)
        value = given
        if name in config:
            try:
                from_file = o.type(config[name])
            except (ValueError, ConfigurationError) as exc:
                raise UsageError(f"config key {name}: {exc}") from None
            if given is None:
                value = from_file
            elif given != from_file:
                print(f"notice: --{name}={given} overrides config value {config[name]!r}",
                      file=sys.stderr)
        if value is None:
            if o.required:
                raise UsageError(f"--{name} is required (flag or config key)")
            value = o.default
        setattr(out, o.dest, value)
    return out


def _structure(a) -> PromptStructure:
    return PromptStructure.named(a.structure, src_lang=a.src_lang, tgt_lang=a.tgt_lang)


def cmd_clean(a) -> int:
    pairs = load_parallel(a.source, a.target)
    tags = [t.strip() for t in a.tags.split(",") if t.strip()]
    kept, dropped = clean_pairs(pairs, tags)
    write_pairs(kept, a.out_source, a.out_target)
    if a.drop_log:
        write_drop_log(dropped, a.drop_log)
    print(f"kept {len(kept)} of {len(pairs)} pairs", file=sys.stderr)
    return EXIT_OK


def cmd_expand(a) -> int:
    pairs = load_parallel(a.source, a.target)
    structure = _structure(a)
    with open(a.out, "w", encoding="utf-8") as fh:
        count, manifest = expand_corpus(pairs, a.k, structure, fh, subsample=a.subsample,
                                        seed=a.seed)
    manifest["source"], manifest["target"] = str(a.source), str(a.target)
    dump_json(manifest, Path(a.manifest or f"{a.out}.manifest.json"))
    print(f"wrote {count} examples to {a.out}", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(a) -> int:
    pairs = load_parallel(a.source, a.reference)
    structure = _structure(a)
    cfg = DecodeConfig(a.strategy, k=a.k, b=a.beams, c=a.chunk, w=a.window, guard=a.guard,
                       max_tokens_per_word=a.max_tokens_per_word)
    provider = build_provider(a.model, structure, scheme=TokenizerScheme.parse(a.tokenizer),
                              epsilon=a.epsilon, permutation=a.permutation,
                              guess_penalty=a.guess_penalty, top_k=a.top_k, timeout=a.timeout)
    try:
        summary = run_corpus(pairs, provider, structure, cfg, a.out, workers=a.workers,
                             timing=a.timing)
    finally:
        close = getattr(provider, "close", None)
        if close is not None:
            close()
    run = {"decode": config_record(cfg), "model": a.model, "tokenizer": a.tokenizer,
           "epsilon": a.epsilon, "permutation": a.permutation, "guess_penalty": a.guess_penalty,
           "structure": a.structure, "source": str(a.source), "reference": str(a.reference)}
    dump_json(run, Path(a.out) / "config.json")
    print(json.dumps(summary.to_json()), file=sys.stderr)
    if summary.failure_count > a.max_failures:
        print(f"{summary.failure_count} failed instances exceed --max-failures {a.max_failures}",
              file=sys.stderr)
        return EXIT_FAILURES
    return EXIT_OK


def cmd_score(a) -> int:
    summary = summarize(read_instances(a.instances)).to_json()
    if a.out:
        dump_json(summary, Path(a.out))
    else:
        print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_serve(a) -> int:
    from .model.server import ProviderTCPServer, serve_stream

    structure = _structure(a)
    provider = build_provider(a.model, structure, scheme=TokenizerScheme.parse(a.tokenizer),
                              epsilon=a.epsilon, permutation=a.permutation)
    if not hasattr(provider, "distribution_for_text"):
        raise UsageError("only local models can be served")
    if a.port is None:
        serve_stream(provider, sys.stdin.buffer, sys.stdout.buffer)
        return EXIT_OK
    with ProviderTCPServer(provider, a.host, a.port) as server:
        print(f"listening on {a.host}:{server.port}", file=sys.stderr, flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return EXIT_OK


HANDLERS = {"clean": cmd_clean, "expand": cmd_expand, "evaluate": cmd_evaluate,
            "score": cmd_score, "serve": cmd_serve}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config_path = ns.sub_config or ns.config
    try:
        config = {}
        if config_path:
            config = {normalize_key(k): v for k, v in load_config(config_path).items()}
        args = resolve(ns.command, ns, config)
        return HANDLERS[ns.command](args)
    except ProviderError as exc:
        print(f"simulmt {ns.command}: model error: {exc}", file=sys.stderr)
        return EXIT_FAILURES
    except (UsageError, ValueError) as exc:
        print(f"simulmt {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CorpusError) as exc:
        print(f"simulmt {ns.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
