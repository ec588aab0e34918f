"""Model providers: the next-token boundary every decoder talks to."""
from __future__ import annotations

import shlex

from ..errors import ConfigurationError
from ..prompting import PromptStructure
from ..tokenization import TokenizerScheme
from .base import Distribution, PromptContext, Provider, TextProvider, next_distribution
from .lexicon import (LexiconModel, LexiconModelSpec, Permutation, Rotation, load_lexicon)
from .noise import RandomProvider
from .remote import RemoteProvider, StdioTransport, TcpTransport

__all__ = [
    "Distribution", "PromptContext", "Provider", "TextProvider", "next_distribution",
    "LexiconModel", "LexiconModelSpec", "Permutation", "Rotation", "load_lexicon",
    "RandomProvider", "RemoteProvider", "StdioTransport", "TcpTransport", "build_provider",
]


def build_provider(spec: str, structure: PromptStructure, *, scheme: TokenizerScheme | None = None,
                   epsilon: float = 0.0, permutation: str = "", guess_token: str = "<guess>",
                   guess_penalty: float = 0.0, top_k: int = 20, timeout: float = 30.0) -> Provider:
    """Build a provider from a short spec string.

    ``echo``, ``lexicon:PATH``, ``remote:tcp:HOST:PORT`` or
    ``remote:stdio:COMMAND`` (COMMAND is split shell-style).
    """
    scheme = scheme or TokenizerScheme.word()
    kind, _, rest = spec.partition(":")
    if kind in ("echo", "lexicon"):
        if kind == "lexicon" and not rest:
            raise ConfigurationError("lexicon model needs a path: lexicon:PATH")
        lex = load_lexicon(rest) if kind == "lexicon" else {}
        mspec = LexiconModelSpec(lex, Permutation.parse(permutation), epsilon=epsilon,
                                 guess_token=guess_token, guess_penalty=guess_penalty,
                                 scheme=scheme)
        return LexiconModel(mspec, structure)
    if kind == "remote":
        mode, _, target = rest.partition(":")
        if mode == "tcp":
            host, _, port = target.rpartition(":")
            if not host or not port.isdigit():
                raise ConfigurationError(f"bad tcp target {target!r}, want HOST:PORT")
            return RemoteProvider.connect(host, int(port), top_k=top_k, timeout=timeout)
        if mode == "stdio" and target:
            return RemoteProvider.spawn(shlex.split(target), top_k=top_k, timeout=timeout)
        raise ConfigurationError(f"bad remote model spec {spec!r}")
    raise ConfigurationError(f"unknown model spec {spec!r}")
