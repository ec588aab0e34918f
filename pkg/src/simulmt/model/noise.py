from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from ..tokenization import TokenizerScheme, Vocabulary
from .base import Distribution, TextProvider


class RandomProvider(TextProvider):
    """Seeded pseudo-random next-token distributions.

    The distribution is a Dirichlet draw keyed on ``(seed, full prompt
    text)``, so identical contexts always get identical answers while
    different contexts look unrelated.  Useful as an adversarial provider for
    decoder equivalence checks.
    """

    def __init__(self, words: Sequence[str], seed: int = 0,
                 scheme: TokenizerScheme | None = None, concentration: float = 0.5):
        self.seed = seed
        self.concentration = concentration
        self.vocab = Vocabulary()
        scheme = scheme or TokenizerScheme.word()
        for w in sorted(set(words)):
            self.vocab.add_word(w, scheme)

    def _rng(self, text: str) -> np.random.Generator:
        digest = hashlib.blake2b(f"{self.seed}\x00{text}".encode("utf-8"), digest_size=16).digest()
        return np.random.default_rng(int.from_bytes(digest, "little"))

    def distribution_for_text(self, text: str) -> Distribution:
        rng = self._rng(text)
        n = len(self.vocab)
        probs = rng.dirichlet(np.full(n, self.concentration))
        # renormalise after dropping underflowed entries
        probs = np.where(probs < 1e-300, 0.0, probs)
        probs = probs / probs.sum()
        return Distribution.from_probs({self.vocab[i]: float(p) for i, p in enumerate(probs)})
