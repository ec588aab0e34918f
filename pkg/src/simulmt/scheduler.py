"""Word-level wait-k read/write policy."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ContractViolation


class Action(enum.Enum):
    READ = "read"
    WRITE = "write"


@dataclass
class SourceState:
    """Source words revealed so far.  Revealing the last word finishes it."""

    words_revealed: list[str] = field(default_factory=list)
    finished: bool = False

    def reveal(self, word: str, last: bool = False) -> None:
        if self.finished:
            raise ContractViolation("source already finished")
        self.words_revealed.append(word)
        self.finished = last


@dataclass
class HypothesisState:
    words: list[str] = field(default_factory=list)
    delays: list[int] = field(default_factory=list)
    finished: bool = False

    def commit(self, word: str, delay: int) -> None:
        if self.finished:
            raise ContractViolation("hypothesis already finished")
        if self.delays and delay < self.delays[-1]:
            raise ContractViolation(f"delay {delay} < previous {self.delays[-1]}")
        self.words.append(word)
        self.delays.append(delay)


def source_context_bound(i: int, k: int, src_len: int) -> int:
    """Number of source words visible when target word ``i`` (1-based) is written.

    ``min(i + k - 1, src_len)``: the first word waits for ``k`` source words,
    every later word for one more.
    """
    if i < 1 or k < 1 or src_len < 0:
        raise ContractViolation(f"bad bound arguments i={i} k={k} src_len={src_len}")
    return min(i + k - 1, src_len)


def next_action(src: SourceState, hyp: HypothesisState, k: int) -> Action:
    if hyp.finished:
        raise ContractViolation("next_action called on a finished hypothesis")
    if k < 1:
        raise ContractViolation(f"k must be >= 1, got {k}")
    if src.finished or len(src.words_revealed) >= len(hyp.words) + k:
        return Action.WRITE
    return Action.READ


def drive_schedule(src_len: int, tgt_len: int, k: int) -> tuple[list[Action], list[int]]:
    """Run the policy for a fixed-length hypothesis and return (actions, delays).

    A WRITE once all ``tgt_len`` words are out is turned into a READ until the
    source is exhausted, so the trace reads every source word exactly once.
    """
    if src_len < 1 or tgt_len < 0:
        raise ContractViolation("need src_len >= 1 and tgt_len >= 0")
    src = SourceState()
    hyp = HypothesisState()
    actions: list[Action] = []
    while not (src.finished and len(hyp.words) == tgt_len):
        act = next_action(src, hyp, k)
        if act is Action.WRITE and len(hyp.words) < tgt_len:
            hyp.commit(f"y{len(hyp.words) + 1}", len(src.words_revealed))
        else:
            act = Action.READ
            n = len(src.words_revealed)
            src.reveal(f"x{n + 1}", last=n + 1 == src_len)
        actions.append(act)
    return actions, hyp.delays
