"""Prompt structures, wait-k dataset expansion and completion-only loss masks.

Layout of a rendered prompt (``<h>:`` / ``<a>:`` are the default markers)::

    <instruction>
    <h>: <source prefix>
    <target prefix>          (single-output-word only)
    <a>:

Everything after the response template is model output.  Completions are
stored with a leading space so that ``prompt + completion`` splits on
whitespace with the template as a standalone word.
"""
from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

from .errors import PromptError, StructuralError, ContractViolation, CorpusError
from .scheduler import source_context_bound
from .tokenization import EOS, TokenizerScheme, segment_words

DEFAULT_INSTRUCTION = "Translate the following {src_lang} text into {tgt_lang}."


class StructureKind(enum.Enum):
    NMT_FULL = "nmt"
    SPLIT_SOURCE_TARGET = "split"
    SINGLE_OUTPUT_WORD = "single-word"


@dataclass(frozen=True)
class PromptStructure:
    kind: StructureKind = StructureKind.SINGLE_OUTPUT_WORD
    instruction_template: str = DEFAULT_INSTRUCTION
    source_marker: str = "<h>:"
    response_template: str = "<a>:"
    src_lang: str = "English"
    tgt_lang: str = "Spanish"

    def __post_init__(self):
        if not self.source_marker.strip() or not self.response_template.strip():
            raise PromptError("markers must be non-empty")
        if "\n" in self.source_marker or "\n" in self.response_template:
            raise PromptError("markers must be single-line")

    @classmethod
    def named(cls, name: str, **kw) -> "PromptStructure":
        try:
            kind = StructureKind(name)
        except ValueError:
            raise PromptError(f"unknown prompt structure {name!r}") from None
        return cls(kind=kind, **kw)

    def instruction(self) -> str:
        try:
            text = self.instruction_template.format_map(
                {"src_lang": self.src_lang, "tgt_lang": self.tgt_lang})
        except (KeyError, IndexError, ValueError) as exc:
            raise PromptError(f"unresolved placeholder in instruction template: {exc}") from None
        if self.response_template in text or self.source_marker in text:
            raise PromptError("instruction must not contain the prompt markers")
        return text


def render_prompt(structure: PromptStructure, src_prefix: Sequence[str],
                  tgt_prefix: Sequence[str], *, source_finished: bool = True) -> str:
    """Render the model input for the given source and target prefixes.

    For the split and NMT structures the target prefix follows the response
    template; for single-output-word it sits on its own line before it, so
    the prompt always ends with the template.
    """
    kind = structure.kind
    if kind is StructureKind.NMT_FULL and not source_finished:
        raise PromptError("NMT_FULL prompts need the full source sentence")
    head = f"{structure.instruction()}\n{structure.source_marker} {' '.join(src_prefix)}"
    if kind is StructureKind.SINGLE_OUTPUT_WORD:
        return f"{head}\n{' '.join(tgt_prefix)}\n{structure.response_template}"
    return head + "\n" + structure.response_template + "".join(" " + w for w in tgt_prefix)


@dataclass(frozen=True)
class ParsedPrompt:
    source: list[str]
    target: list[str]
    partial: str


def parse_prompt(structure: PromptStructure, text: str) -> ParsedPrompt:
    """Invert :func:`render_prompt` on a prompt plus generated continuation.

    Text after the template is read as complete words; a trailing fragment not
    followed by whitespace is the word currently being generated.
    """
    src_key = "\n" + structure.source_marker
    at = text.find(src_key)
    if at < 0:
        raise PromptError("source marker not found in prompt")
    rest = text[at + len(src_key):]
    src_line, sep, rest = rest.partition("\n")
    if not sep:
        raise PromptError("prompt ends after the source line")
    target: list[str] = []
    if structure.kind is StructureKind.SINGLE_OUTPUT_WORD:
        tgt_line, sep, rest = rest.partition("\n")
        if not sep:
            raise PromptError("prompt ends after the target line")
        target = tgt_line.split()
    if not rest.startswith(structure.response_template):
        raise PromptError("response template not where expected")
    region = rest[len(structure.response_template):]
    words = region.split()
    partial = ""
    if words and not region[-1].isspace():
        partial = words.pop()
    return ParsedPrompt(src_line.split(), target + words, partial)


@dataclass(frozen=True)
class FineTuneExample:
    pair_id: int
    step: int
    k: int
    structure: str
    prompt: str
    completion: str

    @property
    def text(self) -> str:
        return self.prompt + self.completion

    def to_json(self) -> dict:
        return {"pair_id": self.pair_id, "step": self.step, "k": self.k,
                "structure": self.structure, "prompt": self.prompt,
                "completion": self.completion}


def expansion_count(src_len: int, tgt_len: int, k: int) -> int:
    return max(src_len - (k - 1), tgt_len)


def expand_pair(x: Sequence[str], y: Sequence[str], k: int, structure: PromptStructure,
                pair_id: int = 0) -> list[FineTuneExample]:
    """Expand one sentence pair into its wait-k curriculum.

    NMT_FULL is not expanded: it yields the single full-sentence example.
    Otherwise step ``i`` sees ``min(i + k - 1, |x|)`` source words.  Steps past ``|y|``
    target the end-of-sequence marker, which is what teaches the model to stop
    once the translation is complete.
    """
    if not x or not y or k < 1:
        raise ContractViolation("expand_pair needs non-empty x, y and k >= 1")
    kind = structure.kind
    if kind is StructureKind.NMT_FULL:
        completion = "".join(" " + w for w in y)
        return [FineTuneExample(pair_id, 1, k, kind.value, render_prompt(structure, x, []),
                                completion)]
    n = expansion_count(len(x), len(y), k)
    out = []
    for i in range(1, n + 1):
        src = x[:source_context_bound(i, k, len(x))]
        if kind is StructureKind.SINGLE_OUTPUT_WORD:
            prompt = render_prompt(structure, src, y[:i - 1])
            target = [y[i - 1]] if i <= len(y) else [EOS]
        else:
            prompt = render_prompt(structure, src, [])
            target = list(y[:i]) if i <= len(y) else list(y) + [EOS]
        completion = "".join(" " + w for w in target)
        out.append(FineTuneExample(pair_id, i, k, kind.value, prompt, completion))
    return out


@dataclass(frozen=True)
class LossMask:
    spans: tuple[tuple[int, int], ...]
    n_tokens: int

    def indices(self) -> list[int]:
        return [i for a, b in self.spans for i in range(a, b)]


def build_loss_mask(example: FineTuneExample, scheme: TokenizerScheme | None = None,
                    response_template: str = "<a>:") -> LossMask:
    text = example.text
    if text.count(response_template) != 1:
        raise StructuralError(
            f"response template {response_template!r} occurs {text.count(response_template)} times")
    words = segment_words(text)
    tmpl = response_template.split()
    end = None
    for w in range(len(words) - len(tmpl) + 1):
        if words[w:w + len(tmpl)] == tmpl:
            end = w + len(tmpl)
            break
    if end is None:
        raise StructuralError("response template is not word-aligned")
    scheme = scheme or TokenizerScheme.word()
    n_prompt = sum(len(scheme.pieces(w)) for w in words[:end])
    total = n_prompt + sum(len(scheme.pieces(w)) for w in words[end:])
    return LossMask(((n_prompt, total),) if total > n_prompt else (), total)


def corpus_digest(pairs: Iterable) -> str:
    h = hashlib.sha256()
    for p in pairs:
        h.update(f"{p.source}\t{p.target}\n".encode("utf-8"))
    return h.hexdigest()


def example_count(x_len: int, y_len: int, k: int, structure: PromptStructure) -> int:
    if structure.kind is StructureKind.NMT_FULL:
        return 1
    return expansion_count(x_len, y_len, k)


def _iter_examples(pairs, k, structure) -> Iterator[FineTuneExample]:
    for p in pairs:
        yield from expand_pair(segment_words(p.source), segment_words(p.target), k,
                               structure, pair_id=p.id)


def expand_corpus(pairs: Sequence, k: int, structure: PromptStructure, writer: IO[str],
                  *, subsample: int | None = None, seed: int = 0,
                  corpus_hashes: dict[str, str] | None = None) -> tuple[int, dict]:
    """Stream every expanded example of ``pairs`` to ``writer`` as JSONL.

    With ``subsample`` set, a seeded uniform sample of that many examples is
    written instead (in corpus order).  Returns the count written and a
    manifest dict.
    """
    if not pairs:
        raise ContractViolation("expand_corpus needs at least one pair")
    total = sum(example_count(len(segment_words(p.source)), len(segment_words(p.target)), k,
                              structure) for p in pairs)
    keep = None
    if subsample is not None and subsample < total:
        keep = set(random.Random(seed).sample(range(total), subsample))
    count = offset = 0
    for idx, ex in enumerate(_iter_examples(pairs, k, structure)):
        if keep is not None and idx not in keep:
            continue
        line = json.dumps(ex.to_json(), ensure_ascii=False) + "\n"
        try:
            writer.write(line)
        except OSError as exc:
            raise CorpusError(f"write failed at record {count} (char offset {offset}): {exc}") from exc
        offset += len(line)
        count += 1
    manifest = {
        "k": k,
        "structure": structure.kind.value,
        "response_template": structure.response_template,
        "count": count,
        "full_count": total,
        "subsample_seed": seed if keep is not None else None,
        "corpus_sha256": corpus_digest(pairs),
        "hashes": dict(corpus_hashes or {}),
    }
    return count, manifest
