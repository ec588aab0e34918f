"""Simultaneous evaluation loop, instance logs and corpus summaries.

Each sentence is streamed word by word under the wait-k policy.  On every
write decision the prompt for the current prefixes is rendered and one word
is committed; its delay is the number of source words read at that moment.
An end-of-sequence prediction while the source is still streaming is treated
as a request for more source (one READ), so a hypothesis can only finish
once the whole sentence has been read.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus import SentencePair
from .decoding import DecodeConfig, Decoder
from .errors import ContractViolation, ProviderError
from .metrics import BleuReport, DelayRecord, average_lagging, corpus_bleu, laal
from .model.base import PromptContext, Provider
from .prompting import PromptStructure, render_prompt
from .scheduler import Action, HypothesisState, SourceState, next_action
from .tokenization import segment_words

log = logging.getLogger(__name__)

INSTANCE_FIELDS = ("index", "source", "reference", "prediction", "delays", "k", "strategy",
                   "b", "c", "w", "wall_ms", "failed")


@dataclass
class InstanceLog:
    index: int
    source: str
    reference: str
    prediction: str
    delays: list[int]
    k: int
    strategy: str
    b: int
    c: int
    w: int
    wall_ms: float | None = None
    failed: bool = False
    error: str | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        out = {name: getattr(self, name) for name in INSTANCE_FIELDS}
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "InstanceLog":
        missing = [f for f in INSTANCE_FIELDS if f not in obj]
        if missing:
            raise ContractViolation(f"instance record lacks fields {missing}")
        return cls(**{f: obj[f] for f in INSTANCE_FIELDS}, error=obj.get("error"))


@dataclass
class SummaryMetrics:
    bleu: BleuReport
    al_mean: float
    laal_mean: float
    instance_count: int
    failure_count: int = 0

    def to_json(self) -> dict:
        return {"bleu": self.bleu.to_json(), "al_mean": self.al_mean, "laal_mean": self.laal_mean,
                "instance_count": self.instance_count, "failure_count": self.failure_count}


def run_instance(pair: SentencePair, provider: Provider, structure: PromptStructure,
                 cfg: DecodeConfig, *, index: int | None = None, word_cap: int | None = None,
                 timing: bool = False, on_prompt: Callable[[int, str], None] | None = None,
                 decoder: Decoder | None = None) -> InstanceLog:
    """Translate one sentence simultaneously.

    ``on_prompt(step, prompt)`` is called before each write decision, with
    ``step`` the 1-based target position being written.  A fresh ``decoder``
    may be passed in to inspect its counters afterwards.
    """
    started = time.perf_counter()
    words = segment_words(pair.source)
    cap = word_cap if word_cap is not None else 2 * len(words) + 10
    src = SourceState(finished=not words)
    hyp = HypothesisState()
    decoder = decoder or Decoder(provider, cfg)
    error = None

    def read():
        n = len(src.words_revealed)
        src.reveal(words[n], last=n + 1 == len(words))

    try:
        while not hyp.finished:
            if next_action(src, hyp, cfg.k) is Action.READ:
                read()
                continue
            prompt = render_prompt(structure, src.words_revealed, hyp.words,
                                   source_finished=src.finished)
            if on_prompt is not None:
                on_prompt(len(hyp.words) + 1, prompt)
            res = decoder.write(PromptContext(prompt), hyp_len=len(hyp.words),
                                visible=len(src.words_revealed), source_finished=src.finished)
            if res.eos:
                if src.finished:
                    hyp.finished = True
                else:
                    decoder.drop_cache()
                    read()
                continue
            hyp.commit(res.word, len(src.words_revealed))
            if len(hyp.words) >= cap:
                hyp.finished = True
    except ProviderError as exc:
        error = f"{type(exc).__name__}: {exc}"
        log.warning("instance %s failed after %d words: %s", index, len(hyp.words), error)

    wall = round((time.perf_counter() - started) * 1000.0, 3) if timing else None
    return InstanceLog(index=pair.id if index is None else index, source=pair.source,
                       reference=pair.target, prediction=" ".join(hyp.words),
                       delays=list(hyp.delays), k=cfg.k, strategy=cfg.strategy.value,
                       b=cfg.b, c=cfg.c, w=cfg.w, wall_ms=wall, failed=error is not None,
                       error=error)


def summarize(logs: Sequence[InstanceLog]) -> SummaryMetrics:
    """Corpus metrics from instance logs alone (no decoding).

    BLEU covers every instance.  AL and LAAL are averaged over instances with
    a non-empty prediction; lengths are word counts.
    """
    if not logs:
        raise ContractViolation("no instances to summarize")
    bleu = corpus_bleu([g.prediction for g in logs], [g.reference for g in logs])
    als, laals = [], []
    for g in logs:
        src_len = len(segment_words(g.source))
        if not g.delays or not src_len:
            continue
        rec = DelayRecord(tuple(g.delays), src_len, len(g.delays),
                          len(segment_words(g.reference)))
        als.append(average_lagging(rec))
        laals.append(laal(rec))
    al_mean = sum(als) / len(als) if als else 0.0
    laal_mean = sum(laals) / len(laals) if laals else 0.0
    return SummaryMetrics(bleu, al_mean, laal_mean, len(logs), sum(g.failed for g in logs))


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def write_instances(logs: Iterable[InstanceLog], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in logs:
            fh.write(json.dumps(g.to_json(), ensure_ascii=False) + "\n")


def read_instances(path) -> list[InstanceLog]:
    logs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                logs.append(InstanceLog.from_json(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ContractViolation(f"{path}:{n}: bad instance record ({exc})") from None
    return logs


def run_corpus(pairs: Sequence[SentencePair], provider: Provider, structure: PromptStructure,
               cfg: DecodeConfig, out_dir, *, workers: int = 1, timing: bool = False,
               word_cap: int | None = None) -> SummaryMetrics:
    """Evaluate every pair and write ``instances.jsonl`` and ``summary.json`` to ``out_dir``.

    Instances run in parallel only when ``workers > 1`` and the provider says
    it is concurrent-safe; output order is always by index.
    """
    if not pairs:
        raise ContractViolation("run_corpus needs at least one pair")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(pair):
        return run_instance(pair, provider, structure, cfg, timing=timing, word_cap=word_cap)

    if workers > 1 and getattr(provider, "concurrent_safe", False):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            logs = list(pool.map(one, pairs))
    else:
        logs = [one(p) for p in pairs]
    logs.sort(key=lambda g: g.index)
    summary = summarize(logs)
    write_instances(logs, out / "instances.jsonl")
    dump_json(summary.to_json(), out / "summary.json")
    return summary


def config_record(cfg: DecodeConfig) -> dict:
    rec = asdict(cfg)
    rec["strategy"] = cfg.strategy.value
    return rec


__all__ = ["InstanceLog", "SummaryMetrics", "run_instance", "run_corpus", "summarize",
           "read_instances", "write_instances", "config_record"]
