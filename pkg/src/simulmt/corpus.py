"""Parallel text loading and transcript cleanup."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CorpusError

log = logging.getLogger(__name__)

DEFAULT_TAGS = ("Laughter", "Applause", "Music", "Cheering")


@dataclass(frozen=True)
class SentencePair:
    id: int
    source: str
    target: str


@dataclass(frozen=True)
class DropRecord:
    line: int
    reason: str


def _read_lines(path) -> list[str]:
    data = Path(path).read_bytes()
    if data.startswith(b"\xef\xbb\xbf"):
        data = data[3:]
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    out = []
    for n, raw in enumerate(lines, 1):
        try:
            out.append(raw.decode("utf-8").rstrip("\r"))
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{path}: line {n} is not valid UTF-8 ({exc.reason})") from None
    return out


def load_parallel(src_path, tgt_path) -> list[SentencePair]:
    src = _read_lines(src_path)
    tgt = _read_lines(tgt_path)
    if len(src) != len(tgt):
        raise CorpusError(f"line count mismatch: {src_path} has {len(src)} lines, "
                          f"{tgt_path} has {len(tgt)}")
    return [SentencePair(i, s, t) for i, (s, t) in enumerate(zip(src, tgt), 1)]


def load_tsv(path) -> list[SentencePair]:
    pairs = []
    for n, line in enumerate(_read_lines(path), 1):
        src, tab, tgt = line.partition("\t")
        if not tab:
            raise CorpusError(f"{path}: line {n} has no tab separator")
        pairs.append(SentencePair(n, src, tgt))
    return pairs


def _tag_pattern(tags: Sequence[str]) -> re.Pattern:
    return re.compile(r"\((?:%s)\)" % "|".join(re.escape(t) for t in tags))


def clean_transcript(text: str, tags: Sequence[str] = DEFAULT_TAGS) -> str:
    """Strip acoustic tags like ``(Laughter)`` and free-standing ``-`` pause marks.

    Hyphens inside words are kept.  Repeats until nothing changes, so the
    result is a fixed point (removing one tag can expose another).
    """
    pattern = _tag_pattern(tags) if tags else None
    while True:
        out = pattern.sub(" ", text) if pattern else text
        out = " ".join(w for w in out.split() if w != "-")
        if out == text:
            return out
        text = out


def clean_pairs(pairs: Iterable[SentencePair], tags: Sequence[str] = DEFAULT_TAGS
                ) -> tuple[list[SentencePair], list[DropRecord]]:
    kept, dropped = [], []
    for p in pairs:
        src, tgt = clean_transcript(p.source, tags), clean_transcript(p.target, tags)
        if not src or not tgt:
            side = "source" if not src else "target"
            dropped.append(DropRecord(p.id, f"empty {side} after cleaning"))
            log.info("dropping pair %d: empty %s after cleaning", p.id, side)
            continue
        kept.append(SentencePair(p.id, src, tgt))
    return kept, dropped


def write_pairs(pairs: Sequence[SentencePair], src_path, tgt_path) -> None:
    Path(src_path).write_text("".join(p.source + "\n" for p in pairs), encoding="utf-8")
    Path(tgt_path).write_text("".join(p.target + "\n" for p in pairs), encoding="utf-8")


def write_drop_log(dropped: Sequence[DropRecord], path) -> None:
    Path(path).write_text("".join(f"{d.line}\t{d.reason}\n" for d in dropped), encoding="utf-8")
