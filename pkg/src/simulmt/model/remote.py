"""Client side of the newline-delimited JSON model protocol.

One request per line::

    {"id": 7, "prompt": "...", "top_k": 2}

answered by exactly one line::

    {"id": 7, "top": [{"token": "gato ", "logprob": -0.1}, ...]}

A token whose text ends in whitespace closes a word; ``"</s>"`` ends the
sequence.  The prompt is :meth:`PromptContext.full_text`, i.e. the rendered
prompt followed by whatever has been generated in the current step.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import selectors
import socket
import subprocess
import threading
import time
from typing import Sequence

from ..errors import (ContractViolation, IdMismatchError, ProtocolTimeout, ProviderError,
                      ResponseValidationError)
from ..tokenization import EOS, Token, Vocabulary
from .base import Distribution, PromptContext


class LineTransport:
    """Buffered line reader/writer over some byte stream."""

    def __init__(self):
        self._buf = b""
        # set after a timeout: a late reply could still arrive, so the stream is unusable
        self.broken = False

    def _read_chunk(self, timeout: float) -> bytes:
        raise NotImplementedError

    def _write(self, data: bytes) -> None:
        raise NotImplementedError

    def send_line(self, obj: dict) -> None:
        if self.broken:
            raise ProviderError("connection unusable after an earlier timeout")
        data = json.dumps(obj, ensure_ascii=False).encode("utf-8") + b"\n"
        try:
            self._write(data)
        except OSError as exc:
            raise ProviderError(f"write to model server failed: {exc}") from exc

    def recv_line(self, timeout: float) -> bytes:
        deadline = time.monotonic() + timeout
        while b"\n" not in self._buf:
            left = deadline - time.monotonic()
            try:
                if left <= 0:
                    raise ProtocolTimeout(f"no reply within {timeout:.1f}s")
                chunk = self._read_chunk(left)
            except ProtocolTimeout:
                self.broken = True
                raise
            if not chunk:
                raise ProviderError("model server closed the connection")
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        return line

    def close(self) -> None:
        pass


class StdioTransport(LineTransport):
    """Talk to a spawned server process over its stdin/stdout."""

    def __init__(self, argv: Sequence[str], env: dict | None = None):
        super().__init__()
        try:
            self.proc = subprocess.Popen(list(argv), stdin=subprocess.PIPE,
                                         stdout=subprocess.PIPE, env=env)
        except OSError as exc:
            raise ProviderError(f"cannot start model server {argv!r}: {exc}") from exc
        self._sel = selectors.DefaultSelector()
        self._sel.register(self.proc.stdout, selectors.EVENT_READ)

    def _read_chunk(self, timeout: float) -> bytes:
        if not self._sel.select(timeout):
            raise ProtocolTimeout("model server did not answer in time")
        return os.read(self.proc.stdout.fileno(), 65536)

    def _write(self, data: bytes) -> None:
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
                self.proc.wait(timeout=0 if self.broken else 5)
            except (OSError, subprocess.TimeoutExpired):
                self.proc.kill()
                self.proc.wait()
        self._sel.close()
        self.proc.stdout.close()


class TcpTransport(LineTransport):
    def __init__(self, host: str, port: int, connect_timeout: float = 10.0):
        super().__init__()
        try:
            self.sock = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise ProviderError(f"cannot connect to {host}:{port}: {exc}") from exc

    def _read_chunk(self, timeout: float) -> bytes:
        self.sock.settimeout(timeout)
        try:
            return self.sock.recv(65536)
        except socket.timeout:
            raise ProtocolTimeout("model server did not answer in time") from None

    def _write(self, data: bytes) -> None:
        self.sock.sendall(data)

    def close(self) -> None:
        self.sock.close()


def parse_token(text: str) -> tuple[str, bool]:
    """Wire token string -> (text, word_final)."""
    if text.strip() == EOS:
        return EOS, True
    stripped = text.strip()
    if not stripped:
        raise ResponseValidationError(f"blank token {text!r}")
    return stripped, text[-1].isspace()


def format_token(tok: Token) -> str:
    if tok.is_eos:
        return EOS
    return tok.text + (" " if tok.word_final else "")


class RemoteProvider:
    """Provider backed by an external server speaking the NDJSON protocol.

    Queries are serialized on one connection; the harness therefore treats it
    as not concurrent-safe.
    """

    concurrent_safe = False

    def __init__(self, transport: LineTransport, top_k: int = 20, timeout: float = 30.0):
        if top_k < 1:
            raise ContractViolation("top_k must be >= 1")
        self.transport = transport
        self.top_k = top_k
        self.timeout = timeout
        self.vocab = Vocabulary()
        self._ids = itertools.count(1)
        self._lock = threading.Lock()

    @classmethod
    def spawn(cls, argv: Sequence[str], **kw) -> "RemoteProvider":
        return cls(StdioTransport(argv), **kw)

    @classmethod
    def connect(cls, host: str, port: int, **kw) -> "RemoteProvider":
        return cls(TcpTransport(host, port), **kw)

    def next_distribution(self, ctx: PromptContext) -> Distribution:
        return self.remote_query(ctx, self.top_k)

    def remote_query(self, ctx: PromptContext, top_k: int) -> Distribution:
        if top_k < 1:
            raise ContractViolation("top_k must be >= 1")
        with self._lock:
            req_id = next(self._ids)
            self.transport.send_line({"id": req_id, "prompt": ctx.full_text(), "top_k": top_k})
            raw = self.transport.recv_line(self.timeout)
        return self._parse_reply(raw, req_id, top_k)

    def _parse_reply(self, raw: bytes, req_id: int, top_k: int) -> Distribution:
        try:
            msg = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ResponseValidationError(f"reply is not JSON: {exc}") from None
        if not isinstance(msg, dict):
            raise ResponseValidationError("reply is not a JSON object")
        if msg.get("id") != req_id:
            raise IdMismatchError(req_id, msg.get("id"))
        if "error" in msg:
            raise ProviderError(f"server error: {msg['error']}")
        top = msg.get("top")
        if not isinstance(top, list) or not top:
            raise ResponseValidationError("reply has no non-empty 'top' list")
        seen = set()
        pairs = []
        for entry in top:
            if not isinstance(entry, dict) or not isinstance(entry.get("token"), str):
                raise ResponseValidationError(f"bad entry {entry!r}")
            lp = entry.get("logprob")
            if isinstance(lp, bool) or not isinstance(lp, (int, float)):
                raise ResponseValidationError(f"non-numeric logprob {lp!r}")
            lp = float(lp)
            if not math.isfinite(lp):
                raise ResponseValidationError(f"non-finite logprob {lp!r}")
            if lp > 0.0:
                raise ResponseValidationError(f"logprob {lp} > 0")
            text, final = parse_token(entry["token"])
            tok = self.vocab.eos if text == EOS else self.vocab.add(text, final)
            if tok.id in seen:
                raise ResponseValidationError(f"duplicate token {entry['token']!r}")
            seen.add(tok.id)
            pairs.append((tok, lp))
        dist = Distribution.from_logprobs(pairs, truncated=True)
        return dist.top(top_k) if len(dist) > top_k else dist

    def close(self) -> None:
        self.transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
