"""Evaluating against a model behind the NDJSON wire protocol.

A lexicon model is served over TCP in a background thread and the harness
talks to it through RemoteProvider, exactly as it would talk to a real
model server.  The results match the in-process run.
"""
import tempfile

from simulmt.decoding import DecodeConfig
from simulmt.harness import run_corpus
from simulmt.model.lexicon import LexiconModel, LexiconModelSpec
from simulmt.model.remote import RemoteProvider
from simulmt.model.server import ProviderTCPServer
from simulmt.prompting import PromptStructure
from simulmt.synthetic import random_lexicon, synthetic_corpus

structure = PromptStructure()
spec = LexiconModelSpec(random_lexicon(30, seed=1), epsilon=0.1)
pairs = synthetic_corpus(spec, 10, 5, 12, seed=2)
local = LexiconModel(spec, structure)
cfg = DecodeConfig("sbs", k=3, b=5, c=1, w=6)

with tempfile.TemporaryDirectory() as out, ProviderTCPServer(local) as server:
    server.start_background()
    print(f"serving on 127.0.0.1:{server.port}")
    with RemoteProvider.connect("127.0.0.1", server.port) as remote:
        wire = run_corpus(pairs, remote, structure, cfg, f"{out}/wire")
    server.shutdown()
    direct = run_corpus(pairs, local, structure, cfg, f"{out}/direct")
    print("over the wire:", wire.to_json())
    print("in process:   ", direct.to_json())
