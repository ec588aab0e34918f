"""Deterministic word-for-word translator with controllable reordering.

The model translates target position ``i`` from source position ``π(i)``.
When that source word is not yet visible it emits a guess token instead,
which reproduces the wait-k misalignment problem in miniature: a
reordering of distance ``d`` is guessed exactly when ``π(i) > i + k - 1``.

Two optional knobs (both off by default) make speculative search matter:

* ``anticipation``: mass placed on the correct translation of a hidden
  source word.  The model can only know that word by recalling the full
  sentence, so it needs a ``recall`` corpus.
* ``guess_penalty``: fraction of confidence lost on the word that follows a
  guess.  A committed guess thus makes the continuation less likely, which
  a search over several words can detect.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..errors import ConfigurationError
from ..prompting import PromptStructure, parse_prompt
from ..tokenization import EOS, Token, TokenizerScheme, Vocabulary
from .base import Distribution, TextProvider


@dataclass(frozen=True)
class Rotation:
    """Target ``at`` reads source ``at + shift``; the next ``shift`` targets lag by one."""

    at: int
    shift: int


class Permutation:
    def __init__(self, rotations: Iterable[Rotation] = ()):
        self.rotations = tuple(sorted(rotations, key=lambda r: r.at))
        end = 0
        for r in self.rotations:
            if r.at < 1 or r.shift < 1:
                raise ConfigurationError(f"bad rotation {r}")
            if r.at <= end:
                raise ConfigurationError("rotation windows overlap")
            end = r.at + r.shift

    @classmethod
    def identity(cls) -> "Permutation":
        return cls()

    @classmethod
    def parse(cls, spec: str) -> "Permutation":
        """``"3:2,9:1"`` -> rotations at target 3 (distance 2) and 9 (distance 1)."""
        rots = []
        for part in filter(None, (p.strip() for p in spec.split(","))):
            at, _, shift = part.partition(":")
            rots.append(Rotation(int(at), int(shift)))
        return cls(rots)

    @property
    def reach(self) -> int:
        """Shortest sentence length on which every rotation fits."""
        return max((r.at + r.shift for r in self.rotations), default=0)

    def source_index(self, i: int) -> int:
        for r in self.rotations:
            if i == r.at:
                return i + r.shift
            if r.at < i <= r.at + r.shift:
                return i - 1
        return i

    def for_length(self, n: int) -> list[int]:
        if n < self.reach:
            raise ConfigurationError(
                f"sentence of {n} words is shorter than the permutation reach {self.reach}")
        return [self.source_index(i) for i in range(1, n + 1)]

    def __repr__(self):
        return f"Permutation({list(self.rotations)!r})"


@dataclass(frozen=True)
class LexiconModelSpec:
    lexicon: Mapping[str, str]
    permutation: Permutation = field(default_factory=Permutation)
    epsilon: float = 0.0
    guess_token: str = "<guess>"
    n_decoys: int = 16
    anticipation: float = 0.0
    guess_penalty: float = 0.0
    scheme: TokenizerScheme = field(default_factory=TokenizerScheme.word)

    def __post_init__(self):
        targets = list(self.lexicon.values())
        if len(set(targets)) != len(targets):
            raise ConfigurationError("lexicon is not bijective")
        if not 0.0 <= self.epsilon < 1.0:
            raise ConfigurationError("epsilon must lie in [0, 1)")
        if not 0.0 <= self.anticipation or self.epsilon + self.anticipation >= 1.0:
            raise ConfigurationError("need anticipation >= 0 and epsilon + anticipation < 1")
        if not 0.0 <= self.guess_penalty <= 1.0:
            raise ConfigurationError("guess_penalty must lie in [0, 1]")
        if not self.guess_token or any(c.isspace() for c in self.guess_token):
            raise ConfigurationError("guess token must be a single word")
        if self.guess_token in targets or self.guess_token == EOS:
            raise ConfigurationError("guess token collides with the target vocabulary")
        if self.n_decoys < 1:
            raise ConfigurationError("need at least one decoy")

    def translate(self, word: str) -> str:
        return self.lexicon.get(word, word)

    def reference(self, source: Sequence[str]) -> list[str]:
        """Full-context translation of ``source``."""
        perm = self.permutation.for_length(len(source))
        return [self.translate(source[s - 1]) for s in perm]

    @property
    def decoys(self) -> list[str]:
        return [f"decoy{i:02d}" for i in range(self.n_decoys)]


class LexiconModel(TextProvider):

    def __init__(self, spec: LexiconModelSpec, structure: PromptStructure | None = None,
                 recall: Iterable[Sequence[str] | str] | None = None):
        self.spec = spec
        self.structure = structure or PromptStructure()
        self.vocab = Vocabulary()
        self._decoys = [self.vocab.add(d, True) for d in spec.decoys]
        self.vocab.add_word(spec.guess_token, spec.scheme)
        for w in sorted(spec.lexicon.values()):
            self.vocab.add_word(w, spec.scheme)
        self._recall: dict[tuple[str, ...], list[tuple[str, ...]]] = defaultdict(list)
        for sent in recall or ():
            words = tuple(sent.split() if isinstance(sent, str) else sent)
            for g in range(len(words) + 1):
                self._recall[words[:g]].append(words)

    def _anticipate(self, visible: Sequence[str], s: int) -> str | None:
        found = {self.spec.translate(w[s - 1])
                 for w in self._recall.get(tuple(visible), ()) if len(w) >= s}
        return found.pop() if len(found) == 1 else None

    def target_word(self, source: Sequence[str], i: int) -> str:
        """What the model wants at target position ``i`` given visible ``source``."""
        g = len(source)
        if i > g:
            return EOS
        s = self.spec.permutation.source_index(i)
        if s > g:
            return self.spec.guess_token
        return self.spec.translate(source[s - 1])

    def _first(self, word: str) -> Token:
        return self.vocab.eos if word == EOS else self.vocab.add_word(word, self.spec.scheme)[0]

    def _continuation(self, word: str, partial: str) -> Token | None:
        if word == EOS:
            return None
        tokens = self.vocab.add_word(word, self.spec.scheme)
        done = ""
        for j, tok in enumerate(tokens[:-1]):
            done += tok.text
            if done == partial:
                return tokens[j + 1]
        return None

    def distribution_for_text(self, text: str) -> Distribution:
        spec = self.spec
        parsed = parse_prompt(self.structure, text)
        src, i = parsed.source, len(parsed.target) + 1
        main = self.target_word(src, i)
        anticipated = None
        if main == spec.guess_token and spec.anticipation > 0:
            anticipated = self._anticipate(src, spec.permutation.source_index(i))

        probs: dict[Token, float] = defaultdict(float)
        if parsed.partial:
            nxt = None
            for cand in (main, anticipated):
                if cand is not None and nxt is None:
                    nxt = self._continuation(cand, parsed.partial)
            if nxt is not None:
                probs[nxt] += 1.0 - spec.epsilon
            spare = 1.0 - sum(probs.values())
        else:
            scale = 1.0
            if parsed.target and parsed.target[-1] == spec.guess_token:
                scale = 1.0 - spec.guess_penalty
            if anticipated is not None:
                probs[self._first(main)] += (1.0 - spec.epsilon - spec.anticipation) * scale
                probs[self._first(anticipated)] += spec.anticipation * scale
            else:
                probs[self._first(main)] += (1.0 - spec.epsilon) * scale
            spare = 1.0 - sum(probs.values())
        if spare > 1e-12:
            share = spare / len(self._decoys)
            for d in self._decoys:
                probs[d] += share
        return Distribution.from_probs(dict(probs))


def load_lexicon(path) -> dict[str, str]:
    lex = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8-sig").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        src, tab, tgt = line.partition("\t")
        if not tab or not src.strip() or not tgt.strip():
            raise ConfigurationError(f"{path}:{n}: expected 'source<TAB>target'")
        lex[src.strip()] = tgt.strip()
    return lex
