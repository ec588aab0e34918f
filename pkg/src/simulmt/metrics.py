"""Corpus BLEU and the lagging-based latency metrics AL and LAAL.

BLEU is BLEU-4 over corpus-level clipped n-gram counts, no smoothing, on
detokenized text passed through :func:`bleu_tokenize` (the mteval-v13a rule
set: punctuation and symbols split off, periods and commas split unless
between digits, case preserved).

Latency works on delays measured in source words read.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractViolation

MAX_ORDER = 4

_13A_RULES = [
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
]


def bleu_tokenize(line: str) -> list[str]:
    line = line.replace("<skipped>", "").replace("-\n", "").replace("\n", " ")
    if "&" in line:
        line = (line.replace("&quot;", '"').replace("&amp;", "&")
                .replace("&lt;", "<").replace("&gt;", ">"))
    line = f" {line} "
    for pattern, repl in _13A_RULES:
        line = pattern.sub(repl, line)
    return line.split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class BleuReport:
    score: float
    precisions: list[float]
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    matches: list[int] = field(default_factory=list, repr=False)
    totals: list[int] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {"score": self.score, "precisions": list(self.precisions),
                "bp": self.brevity_penalty, "hyp_len": self.hyp_len, "ref_len": self.ref_len}


def corpus_bleu(hyps: Sequence[str], refs: Sequence[str]) -> BleuReport:
    if len(hyps) != len(refs):
        raise ContractViolation(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise ContractViolation("corpus_bleu needs at least one sentence")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for n_sent, (hyp, ref) in enumerate(zip(hyps, refs)):
        h, r = bleu_tokenize(hyp), bleu_tokenize(ref)
        if not r:
            raise ContractViolation(f"empty reference at sentence {n_sent}")
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, MAX_ORDER + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(len(h) - n + 1, 0)
    precisions = [100.0 * m / t if t else 0.0 for m, t in zip(matches, totals)]
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1.0 - ref_len / hyp_len)
    else:
        bp = 1.0
    if min(matches) == 0:
        score = 0.0
    else:
        log_mean = sum(math.log(m / t) for m, t in zip(matches, totals)) / MAX_ORDER
        score = 100.0 * bp * math.exp(log_mean)
    return BleuReport(score, precisions, bp, hyp_len, ref_len, matches, totals)


@dataclass(frozen=True)
class DelayRecord:
    delays: tuple[int, ...]
    src_len: int
    hyp_len: int
    ref_len: int

    def __post_init__(self):
        d = self.delays
        if not d:
            raise ContractViolation("empty delays")
        if len(d) != self.hyp_len:
            raise ContractViolation(f"{len(d)} delays for hyp_len {self.hyp_len}")
        if any(b < a for a, b in zip(d, d[1:])):
            raise ContractViolation("delays must be non-decreasing")
        if d[0] < 1 or d[-1] > self.src_len:
            raise ContractViolation(f"delays must lie in [1, {self.src_len}]")


def _lagging(rec: DelayRecord, tgt_len: int) -> float:
    rate = rec.src_len / tgt_len
    total = 0.0
    tau = 0
    for i, d in enumerate(rec.delays, 1):
        total += d - (i - 1) * rate
        tau = i
        if d >= rec.src_len:
            break
    return total / tau


def average_lagging(rec: DelayRecord) -> float:
    return _lagging(rec, rec.hyp_len)


def laal(rec: DelayRecord) -> float:
    """AL with the ideal-lag rate computed from the longer of hypothesis and reference."""
    return _lagging(rec, max(rec.hyp_len, rec.ref_len))
