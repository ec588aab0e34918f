from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..errors import ContractViolation
from ..tokenization import Token

FULL_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Distribution:
    """Next-token log-probabilities.

    ``entries`` is sorted by log-probability descending, ties by token id
    ascending.  A full distribution (``truncated=False``) lists every token
    with non-zero mass and sums to one; a top-K truncation need not.
    """

    entries: tuple[tuple[Token, float], ...]
    truncated: bool = False

    def __post_init__(self):
        if not self.entries:
            raise ContractViolation("empty distribution")
        for tok, lp in self.entries:
            if not math.isfinite(lp) or lp > 0.0:
                raise ContractViolation(f"invalid log-probability {lp!r} for {tok.text!r}")
        keys = [(-lp, tok.id) for tok, lp in self.entries]
        if keys != sorted(keys):
            raise ContractViolation("distribution entries not sorted")
        if not self.truncated:
            mass = math.fsum(math.exp(lp) for _, lp in self.entries)
            if abs(mass - 1.0) > FULL_SUM_TOL:
                raise ContractViolation(f"full distribution sums to {mass}")

    @classmethod
    def from_probs(cls, probs: dict[Token, float], truncated: bool = False) -> "Distribution":
        """Build from linear probabilities, dropping zero-mass tokens."""
        items = [(t, math.log(p)) for t, p in probs.items() if p > 0.0]
        items.sort(key=lambda e: (-e[1], e[0].id))
        return cls(tuple(items), truncated)

    @classmethod
    def from_logprobs(cls, pairs: Sequence[tuple[Token, float]], truncated: bool = True
                      ) -> "Distribution":
        items = sorted(pairs, key=lambda e: (-e[1], e[0].id))
        return cls(tuple(items), truncated)

    def argmax(self) -> Token:
        return self.entries[0][0]

    def top(self, n: int) -> "Distribution":
        if n >= len(self.entries):
            return self
        return Distribution(self.entries[:n], truncated=True)

    def logprob(self, token_id: int) -> float:
        for tok, lp in self.entries:
            if tok.id == token_id:
                return lp
        return -math.inf

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PromptContext:
    text: str
    generated: tuple[Token, ...] = ()

    def extend(self, tokens: Sequence[Token]) -> "PromptContext":
        return PromptContext(self.text, self.generated + tuple(tokens))

    def full_text(self) -> str:
        """Prompt plus generated continuation as one string.

        A single space separates the prompt from the continuation and follows
        every word-final token, so the string ends in whitespace exactly when
        generation sits on a word boundary.
        """
        return self.text + " " + "".join(
            t.text + (" " if t.word_final else "") for t in self.generated)


@runtime_checkable
class Provider(Protocol):
    """Anything that maps a prompt context to a next-token distribution.

    ``concurrent_safe`` tells the harness whether several instances may query
    the same provider at once.
    """

    concurrent_safe: bool

    def next_distribution(self, ctx: PromptContext) -> Distribution: ...


class TextProvider:
    """Base for providers that condition only on :meth:`PromptContext.full_text`.

    Such providers can be served over the wire protocol unchanged, since the
    server sees exactly that string.
    """

    concurrent_safe = True

    def distribution_for_text(self, text: str) -> Distribution:
        raise NotImplementedError

    def next_distribution(self, ctx: PromptContext) -> Distribution:
        return self.distribution_for_text(ctx.full_text())


def next_distribution(provider: Provider, ctx: PromptContext) -> Distribution:
    if not ctx.text:
        raise ContractViolation("prompt context text is empty")
    return provider.next_distribution(ctx)
