"""Serve a text-conditioned provider over the NDJSON protocol (stdio or TCP)."""
from __future__ import annotations

import json
import logging
import socketserver
import threading
from typing import IO

from ..errors import SimulMTError
from .base import TextProvider
from .remote import format_token

log = logging.getLogger(__name__)


def handle_request(provider: TextProvider, line: str) -> dict:
    try:
        req = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": None, "error": f"bad JSON: {exc}"}
    if not isinstance(req, dict):
        return {"id": None, "error": "request must be an object"}
    req_id = req.get("id")
    prompt, top_k = req.get("prompt"), req.get("top_k", 1)
    if not isinstance(req_id, int) or not isinstance(prompt, str) \
            or not isinstance(top_k, int) or top_k < 1:
        return {"id": req_id, "error": "request needs int id, string prompt, int top_k >= 1"}
    try:
        dist = provider.distribution_for_text(prompt)
    except SimulMTError as exc:
        return {"id": req_id, "error": str(exc)}
    return {"id": req_id,
            "top": [{"token": format_token(t), "logprob": lp} for t, lp in dist.entries[:top_k]]}


def serve_stream(provider: TextProvider, rfile: IO[bytes], wfile: IO[bytes]) -> int:
    """Answer requests until EOF; returns the number of requests served."""
    served = 0
    for raw in rfile:
        line = raw.decode("utf-8").strip()
        if not line:
            continue
        reply = handle_request(provider, line)
        wfile.write(json.dumps(reply, ensure_ascii=False).encode("utf-8") + b"\n")
        wfile.flush()
        served += 1
    return served


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        serve_stream(self.server.provider, self.rfile, self.wfile)


class ProviderTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, provider: TextProvider, host: str = "127.0.0.1", port: int = 0):
        self.provider = provider
        super().__init__((host, port), _Handler)

    @property
    def port(self) -> int:
        return self.server_address[1]

    def start_background(self) -> threading.Thread:
        t = threading.Thread(target=self.serve_forever, daemon=True)
        t.start()
        return t


if __name__ == "__main__":
    import sys

    from ..cli import main

    sys.exit(main(["serve", *sys.argv[1:]]))
