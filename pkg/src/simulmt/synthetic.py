"""Seeded toy lexicons and parallel corpora for the lexicon translator."""
from __future__ import annotations

import random
import string

from .corpus import SentencePair
from .model.lexicon import LexiconModelSpec

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def _pseudo_word(rng: random.Random, syllables: int) -> str:
    return "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(syllables))


def random_lexicon(size: int, seed: int = 0) -> dict[str, str]:
    """``size`` distinct source pseudo-words mapped to distinct target pseudo-words.

    Source words are lower case, target words capitalized, so the two sides
    never collide.
    """
    rng = random.Random(seed)
    src, tgt = set(), set()
    while len(src) < size:
        src.add(_pseudo_word(rng, rng.randint(1, 3)))
    while len(tgt) < size:
        tgt.add(_pseudo_word(rng, rng.randint(1, 4)).capitalize())
    return dict(zip(sorted(src), rng.sample(sorted(tgt), size)))


def synthetic_corpus(spec: LexiconModelSpec, n_pairs: int, min_len: int, max_len: int,
                     seed: int = 0) -> list[SentencePair]:
    """Random source sentences with their full-context lexicon translations.

    Sentence lengths are drawn uniformly from ``[max(min_len, reach), max_len]``
    so every rotation of the spec's permutation fits.
    """
    rng = random.Random(seed)
    vocab = sorted(spec.lexicon)
    if not vocab:
        vocab = list(string.ascii_lowercase)
    lo = max(min_len, spec.permutation.reach, 1)
    if lo > max_len:
        raise ValueError(f"max_len {max_len} below the minimum usable length {lo}")
    pairs = []
    for i in range(1, n_pairs + 1):
        words = [rng.choice(vocab) for _ in range(rng.randint(lo, max_len))]
        pairs.append(SentencePair(i, " ".join(words), " ".join(spec.reference(words))))
    return pairs
