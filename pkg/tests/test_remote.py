import json
import math
import sys
from pathlib import Path

import pytest

from simulmt.corpus import SentencePair
from simulmt.decoding import DecodeConfig
from simulmt.errors import IdMismatchError, ProtocolTimeout, ProviderError, ResponseValidationError
from simulmt.harness import run_corpus, run_instance
from simulmt.model.base import PromptContext
from simulmt.model.remote import RemoteProvider, format_token, parse_token
from simulmt.model.server import ProviderTCPServer, handle_request
from simulmt.prompting import PromptStructure
from simulmt.tokenization import EOS, Token

from conftest import lexicon_model, pair

FAKE = str(Path(__file__).with_name("fake_server.py"))


def fake(mode, **kw):
    return RemoteProvider.spawn([sys.executable, FAKE, mode], **kw)


def test_token_wire_format():
    assert parse_token("gato ") == ("gato", True)
    assert parse_token("ga") == ("ga", False)
    assert parse_token("</s>") == (EOS, True)
    with pytest.raises(ResponseValidationError):
        parse_token("  ")
    assert format_token(Token(3, "gato", True)) == "gato "
    assert format_token(Token(0, EOS, True)) == EOS


def test_two_entry_reply():
    with fake("good", timeout=10) as p:
        d = p.remote_query(PromptContext("hi"), 2)
    assert [(t.text, t.word_final) for t, _ in d.entries] == [("hola", True), (EOS, True)]
    assert d.truncated and d.entries[0][1] == pytest.approx(-0.1)


@pytest.mark.parametrize("mode,err", [("bad-id", IdMismatchError),
                                      ("positive", ResponseValidationError),
                                      ("garbage", ResponseValidationError),
                                      ("error", ProviderError),
                                      ("die", ProviderError)])
def test_malformed_replies(mode, err):
    with fake(mode, timeout=10) as p:
        with pytest.raises(err):
            p.remote_query(PromptContext("hi"), 2)


def test_id_mismatch_message():
    with fake("bad-id", timeout=10) as p:
        with pytest.raises(IdMismatchError) as info:
            p.remote_query(PromptContext("hi"), 2)
    assert (info.value.expected, info.value.got) == (1, 2)


def test_timeout_marks_instance_failed(structure):
    p = fake("slow-second", timeout=0.5)
    try:
        log = run_instance(SentencePair(1, "a b c", "x y z"), p, structure, DecodeConfig(k=1))
    finally:
        p.close()
    assert log.failed and log.prediction == "hola" and log.delays == [1]
    assert "ProtocolTimeout" in log.error


def test_timeout_error_type():
    with fake("slow-second", timeout=0.3) as p:
        p.remote_query(PromptContext("x"), 1)
        with pytest.raises(ProtocolTimeout):
            p.remote_query(PromptContext("x"), 1)
        # a late reply could still arrive, so the connection refuses further use
        with pytest.raises(ProviderError, match="earlier timeout"):
            p.remote_query(PromptContext("x"), 1)


def test_server_handles_bad_requests():
    m = lexicon_model()
    assert "error" in handle_request(m, "{not json")
    assert "error" in handle_request(m, json.dumps({"id": 1, "prompt": 3, "top_k": 1}))
    assert handle_request(m, json.dumps({"id": 4, "prompt": "no markers", "top_k": 1}))["id"] == 4


def _corpus(model, n=20):
    words = sorted(model.spec.lexicon)
    return [pair(" ".join(words[(i + j) % len(words)] for j in range(4 + i % 5)), model.spec, i)
            for i in range(1, n + 1)]


def test_tcp_server_matches_local_provider(tmp_path, structure):
    local = lexicon_model(epsilon=0.1)
    pairs = _corpus(local)
    cfg = DecodeConfig("sbs", k=2, b=3, c=1, w=3)
    with ProviderTCPServer(local) as server:
        server.start_background()
        with RemoteProvider.connect("127.0.0.1", server.port, top_k=20, timeout=10) as remote:
            via_wire = run_corpus(pairs, remote, structure, cfg, tmp_path / "r")
        server.shutdown()
    direct = run_corpus(pairs, local, structure, cfg, tmp_path / "l")
    assert (tmp_path / "r/instances.jsonl").read_bytes() == (tmp_path / "l/instances.jsonl").read_bytes()
    assert via_wire.bleu.score == direct.bleu.score == pytest.approx(100.0)


def test_stdio_echo_server_module(tmp_path, structure):
    argv = [sys.executable, "-m", "simulmt.model.server", "--model", "echo"]
    pairs = [SentencePair(i, f"w{i} v{i} u{i} t{i}", f"w{i} v{i} u{i} t{i}") for i in range(1, 21)]
    with RemoteProvider.spawn(argv, timeout=20) as p:
        summary = run_corpus(pairs, p, structure, DecodeConfig(k=2), tmp_path)
    assert summary.instance_count == 20 and summary.failure_count == 0
    assert math.isclose(summary.bleu.score, 100.0)
