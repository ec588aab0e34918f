"""Whitespace words, deterministic subword schemes and detokenization.

Words are maximal non-whitespace runs; punctuation stays attached.  The
``CHAR_CHUNK`` scheme cuts every word into fixed-width character chunks and
stands in for a BPE vocabulary so subword code paths can be exercised without
any pretrained tokenizer.
"""
from __future__ import annotations

import enum
import threading
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

EOS = "</s>"


class IncompleteWordWarning(UserWarning):
    """Detokenized input ended in the middle of a word."""


@dataclass(frozen=True)
class Token:
    id: int
    text: str
    word_final: bool

    @property
    def is_eos(self) -> bool:
        return self.text == EOS


class SchemeKind(enum.Enum):
    WORD = "word"
    CHAR_CHUNK = "char_chunk"


@dataclass(frozen=True)
class TokenizerScheme:
    kind: SchemeKind = SchemeKind.WORD
    n: int | None = None

    def __post_init__(self):
        if self.kind is SchemeKind.CHAR_CHUNK and (self.n is None or self.n < 1):
            raise ValueError("CHAR_CHUNK needs a chunk width n >= 1")
        if self.kind is SchemeKind.WORD and self.n is not None:
            raise ValueError("WORD scheme takes no chunk width")

    @classmethod
    def word(cls) -> "TokenizerScheme":
        return cls(SchemeKind.WORD)

    @classmethod
    def char_chunk(cls, n: int) -> "TokenizerScheme":
        return cls(SchemeKind.CHAR_CHUNK, n)

    @classmethod
    def parse(cls, spec: str) -> "TokenizerScheme":
        """Parse ``"word"`` or ``"chunk:N"``."""
        spec = spec.strip().lower()
        if spec == "word":
            return cls.word()
        if spec.startswith("chunk:"):
            return cls.char_chunk(int(spec.split(":", 1)[1]))
        raise ValueError(f"unknown tokenizer scheme {spec!r}")

    def __str__(self) -> str:
        return "word" if self.kind is SchemeKind.WORD else f"chunk:{self.n}"

    def pieces(self, word: str) -> list[str]:
        """Split one word into the text fragments of its tokens."""
        if self.kind is SchemeKind.WORD or word == EOS:
            return [word]
        return [word[i:i + self.n] for i in range(0, len(word), self.n)]


class Vocabulary:
    """Thread-safe map between ``(text, word_final)`` and integer ids.

    Id 0 is always the end-of-sequence token.  Other entries are assigned in
    insertion order, so a vocabulary filled from a sorted word list gets
    reproducible ids.
    """

    def __init__(self, entries: Iterable[tuple[str, bool]] = ()):
        self._lock = threading.Lock()
        self._ids: dict[tuple[str, bool], int] = {}
        self._tokens: list[Token] = []
        self.add(EOS, True)
        for text, final in entries:
            self.add(text, final)

    def add(self, text: str, word_final: bool) -> Token:
        key = (text, word_final)
        with self._lock:
            idx = self._ids.get(key)
            if idx is None:
                idx = len(self._tokens)
                self._ids[key] = idx
                self._tokens.append(Token(idx, text, word_final))
            return self._tokens[idx]

    def add_word(self, word: str, scheme: TokenizerScheme) -> list[Token]:
        pieces = scheme.pieces(word)
        return [self.add(p, i == len(pieces) - 1) for i, p in enumerate(pieces)]

    def __getitem__(self, idx: int) -> Token:
        return self._tokens[idx]

    def __len__(self) -> int:
        return len(self._tokens)

    @property
    def eos(self) -> Token:
        return self._tokens[0]


def segment_words(text: str) -> list[str]:
    return text.split()


def tokenize(words: Sequence[str], scheme: TokenizerScheme | None = None,
             vocab: Vocabulary | None = None) -> list[Token]:
    """Tokenize a word sequence; exactly the last token of each word is final.

    Ids come from ``vocab`` when given, otherwise from a throwaway vocabulary
    (ids then only identify tokens within this one call).
    """
    scheme = scheme or TokenizerScheme.word()
    vocab = vocab if vocab is not None else Vocabulary()
    tokens: list[Token] = []
    for word in words:
        tokens.extend(vocab.add_word(word, scheme))
    return tokens


def is_word_complete(tokens: Sequence[Token]) -> bool:
    return any(t.word_final for t in tokens)


def detokenize(tokens: Sequence[Token]) -> str:
    words: list[str] = []
    current = ""
    for tok in tokens:
        current += tok.text
        if tok.word_final:
            words.append(current)
            current = ""
    if current:
        warnings.warn(f"token sequence ends mid-word ({current!r}); completing it",
                      IncompleteWordWarning, stacklevel=2)
        words.append(current)
    return " ".join(words)


def split_complete(tokens: Sequence[Token]) -> tuple[list[str], list[Token]]:
    """Return the complete words in ``tokens`` and the trailing partial tokens."""
    words: list[str] = []
    current: list[Token] = []
    for tok in tokens:
        current.append(tok)
        if tok.word_final:
            words.append("".join(t.text for t in current))
            current = []
    return words, current
