"""Word-producing decoders over a next-token provider.

Every strategy returns exactly one word per write decision.  Speculative
beam search (SBS) runs a token-level beam over a window of ``w`` tokens,
commits the first word of the highest-scoring beam, and, in the chunk-wise
variant, caches the following ``c - 1`` words for the next write decisions.
Beam scores are plain sums of log-probabilities.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import ContractViolation
from .model.base import PromptContext, Provider, next_distribution
from .tokenization import EOS, Token, split_complete

log = logging.getLogger(__name__)


class Strategy(enum.Enum):
    GREEDY = "greedy"
    BEAM_WORD = "beam"
    SBS = "sbs"


@dataclass(frozen=True)
class DecodeConfig:
    strategy: Strategy = Strategy.GREEDY
    k: int = 3
    b: int = 1
    c: int = 1
    w: int = 1
    guard: bool = False
    max_tokens_per_word: int = 16

    def __post_init__(self):
        if isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", Strategy(self.strategy))
        for name in ("k", "b", "c", "w", "max_tokens_per_word"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be >= 1")
        if self.c > self.w:
            raise ContractViolation(f"chunk c={self.c} exceeds window w={self.w}")


@dataclass(frozen=True)
class WordResult:
    word: str
    tokens: tuple[Token, ...] = ()
    eos: bool = False
    truncated: bool = False
    fallback: bool = False
    from_cache: bool = False
    searched: bool = False


def _text(tokens: Sequence[Token]) -> str:
    return "".join(t.text for t in tokens)


def decode_greedy_word(provider: Provider, ctx: PromptContext, cap: int,
                       prefix: Sequence[Token] = ()) -> WordResult:
    """Take argmax tokens until a word boundary, end of sequence or ``cap`` tokens.

    An end-of-sequence token arriving mid-word closes that word instead of
    ending the hypothesis.
    """
    if cap < 1:
        raise ContractViolation("cap must be >= 1")
    tokens = list(prefix)
    while len(tokens) < cap:
        tok = next_distribution(provider, ctx.extend(tokens)).argmax()
        if tok.is_eos:
            if not tokens:
                return WordResult(EOS, (tok,), eos=True)
            return WordResult(_text(tokens), tuple(tokens))
        tokens.append(tok)
        if tok.word_final:
            return WordResult(_text(tokens), tuple(tokens))
    return WordResult(_text(tokens), tuple(tokens), truncated=True)


@dataclass(frozen=True)
class BeamCandidate:
    tokens: tuple[Token, ...] = ()
    score: float = 0.0
    words_complete: int = 0
    terminated: bool = False

    def extend(self, tok: Token, logprob: float) -> "BeamCandidate":
        return BeamCandidate(self.tokens + (tok,), self.score + logprob,
                             self.words_complete + (tok.word_final and not tok.is_eos),
                             tok.is_eos)

    def sort_key(self):
        return (-self.score, tuple(t.id for t in self.tokens))

    def words(self) -> list[str]:
        """Complete words in order, ending with ``EOS`` if the beam terminated.

        A partial word cut off by end of sequence counts as complete.
        """
        body = self.tokens[:-1] if self.terminated else self.tokens
        words, partial = split_complete(body)
        if self.terminated:
            if partial:
                words.append(_text(partial))
            words.append(EOS)
        return words


def beam_search(provider: Provider, ctx: PromptContext, b: int, w: int,
                stop_words: int | None = None) -> list[BeamCandidate]:
    """Token-level beam search of width ``b`` and depth at most ``w`` tokens.

    A beam stops growing once it terminates, holds ``stop_words`` complete
    words (when given) or reaches ``w`` tokens.  Finished beams keep competing
    for the ``b`` slots; the search ends when all surviving beams are done.
    Ties are broken by the token-id sequence, ascending.
    """
    if b < 1 or w < 1:
        raise ContractViolation("beam_search needs b >= 1 and w >= 1")

    def done(c: BeamCandidate) -> bool:
        return (c.terminated or len(c.tokens) >= w
                or (stop_words is not None and c.words_complete >= stop_words))

    beam = [BeamCandidate()]
    while True:
        pool: list[BeamCandidate] = []
        live = False
        for cand in beam:
            if done(cand):
                pool.append(cand)
                continue
            live = True
            dist = next_distribution(provider, ctx.extend(cand.tokens))
            # only the top-b children of any parent can reach the top b overall
            for tok, lp in dist.entries[:b]:
                pool.append(cand.extend(tok, lp))
        if not live:
            return beam
        pool.sort(key=BeamCandidate.sort_key)
        beam = pool[:b]


@dataclass(frozen=True)
class CommitCache:
    pending: tuple[str, ...] = ()
    origin_step: int = 0


def apply_degenerate_guard(cfg: DecodeConfig, hyp_len_words: int, src_visible_words: int,
                           speculation_words: int) -> int:
    """Clamp speculation so the speculative hypothesis stays shorter than the visible source.

    Returns the largest ``s <= speculation_words`` with
    ``hyp_len_words + s <= src_visible_words - 1`` (never below zero).
    """
    if not cfg.guard:
        return speculation_words
    return max(0, min(speculation_words, src_visible_words - 1 - hyp_len_words))


def sbs_step(provider: Provider, ctx: PromptContext, cfg: DecodeConfig, cache: CommitCache, *,
             hyp_len: int = 0, visible: int | None = None, source_finished: bool = True,
             step: int = 0) -> tuple[WordResult, CommitCache]:
    """One write decision of (chunk-wise) speculative beam search.

    A non-empty cache is drained first without touching the provider.  The
    degenerate-output guard only acts while the source is still streaming.
    """
    if cfg.strategy is not Strategy.SBS:
        raise ContractViolation("sbs_step needs an SBS config")
    if cache.pending:
        word = cache.pending[0]
        return (WordResult(word, eos=word == EOS, from_cache=True),
                CommitCache(cache.pending[1:], cache.origin_step))

    limit = None
    if cfg.guard and visible is not None and not source_finished:
        limit = apply_degenerate_guard(cfg, hyp_len, visible, cfg.w)
        if limit == 0:
            return decode_greedy_word(provider, ctx, cfg.max_tokens_per_word), CommitCache()

    best = beam_search(provider, ctx, cfg.b, cfg.w, stop_words=limit)[0]
    words = best.words()
    if not words:
        log.warning("SBS window of %d tokens held no complete word; finishing greedily", cfg.w)
        res = decode_greedy_word(provider, ctx, max(cfg.max_tokens_per_word, len(best.tokens) + 1),
                                 prefix=best.tokens)
        return replace(res, fallback=True, searched=True), CommitCache()
    first, rest = words[0], words[1:cfg.c]
    end = next((j for j, t in enumerate(best.tokens) if t.word_final), len(best.tokens) - 1)
    return (WordResult(first, best.tokens[:end + 1], eos=first == EOS, searched=True),
            CommitCache(tuple(rest), step))


class Decoder:
    """Per-instance decoding state: strategy dispatch plus the SBS commit cache."""

    def __init__(self, provider: Provider, cfg: DecodeConfig):
        self.provider = provider
        self.cfg = cfg
        self.cache = CommitCache()
        self.beam_searches = 0
        self.steps = 0

    def write(self, ctx: PromptContext, *, hyp_len: int = 0, visible: int | None = None,
              source_finished: bool = True) -> WordResult:
        cfg = self.cfg
        self.steps += 1
        if cfg.strategy is Strategy.GREEDY:
            return decode_greedy_word(self.provider, ctx, cfg.max_tokens_per_word)
        if cfg.strategy is Strategy.BEAM_WORD:
            self.beam_searches += 1
            best = beam_search(self.provider, ctx, cfg.b, cfg.max_tokens_per_word, stop_words=1)[0]
            words = best.words()
            if not words:
                return WordResult(_text(best.tokens), best.tokens, truncated=True, searched=True)
            return WordResult(words[0], best.tokens, eos=words[0] == EOS, searched=True)
        res, self.cache = sbs_step(self.provider, ctx, cfg, self.cache, hyp_len=hyp_len,
                                   visible=visible, source_finished=source_finished,
                                   step=self.steps)
        self.beam_searches += res.searched
        return res

    def drop_cache(self) -> None:
        self.cache = CommitCache()
