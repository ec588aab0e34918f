"""Acceptance criteria, one test each.

A PASS/FAIL line per criterion is printed in the ``acceptance criteria``
section at the end of the pytest run.
"""
import math
import random
import sys
import time
from pathlib import Path

import pytest

from simulmt.cli import main
from simulmt.corpus import SentencePair
from simulmt.decoding import DecodeConfig, Decoder, beam_search, decode_greedy_word
from simulmt.errors import IdMismatchError, ResponseValidationError
from simulmt.harness import run_corpus, run_instance
from simulmt.metrics import DelayRecord, average_lagging, corpus_bleu, laal
from simulmt.model.base import PromptContext
from simulmt.model.lexicon import LexiconModel, LexiconModelSpec, Permutation, Rotation
from simulmt.model.remote import RemoteProvider
from simulmt.prompting import (PromptStructure, StructureKind, build_loss_mask, expand_pair,
                               parse_prompt)
from simulmt.scheduler import Action, drive_schedule
from simulmt.synthetic import random_lexicon, synthetic_corpus
from simulmt.tokenization import TokenizerScheme, segment_words, tokenize

from test_metrics import HAND_HYPS, HAND_REFS, HAND_SCORE

FAKE = str(Path(__file__).with_name("fake_server.py"))
SINGLE = PromptStructure(StructureKind.SINGLE_OUTPUT_WORD)
SPLIT = PromptStructure(StructureKind.SPLIT_SOURCE_TARGET)


def _words(n, p):
    return [f"{p}{i}" for i in range(1, n + 1)]


def test_scheduler_oracle():
    """Scheduler oracle: 200 random (|x|,|y|,k) traces obey the lag rule, |x| READs, |y| WRITEs, < 5 s"""
    rng = random.Random(11)
    t0 = time.perf_counter()
    for _ in range(200):
        n, m, k = rng.randint(1, 60), rng.randint(0, 60), rng.choice([1, 3, 5, 7])
        actions, delays = drive_schedule(n, m, k)
        assert delays == [min(i + k - 1, n) for i in range(1, m + 1)]
        assert actions.count(Action.READ) == n and actions.count(Action.WRITE) == m
    assert time.perf_counter() - t0 < 5.0


def _random_expansions(seed=12, count=500):
    rng = random.Random(seed)
    for _ in range(count):
        nx, ny, k = rng.randint(1, 30), rng.randint(1, 30), rng.choice([1, 3, 5, 7])
        yield nx, ny, k


def test_expansion_formula():
    """Expansion formula: 500 random pairs give max(|x|-(k-1),|y|) examples with min(i+k-1,|x|) source words, < 10 s"""
    t0 = time.perf_counter()
    for nx, ny, k in _random_expansions():
        for structure in (SINGLE, SPLIT):
            exs = expand_pair(_words(nx, "s"), _words(ny, "t"), k, structure)
            assert len(exs) == max(nx - (k - 1), ny)
            for i, ex in enumerate(exs, 1):
                assert len(parse_prompt(structure, ex.prompt).source) == min(i + k - 1, nx)
    assert time.perf_counter() - t0 < 10.0


def test_loss_mask_property():
    """Loss masks: nothing trainable up to the template; single-word masks one word; split masks i words at step i"""
    chunk = TokenizerScheme.char_chunk(2)
    for nx, ny, k in _random_expansions():
        x, y = _words(nx, "src"), _words(ny, "tgt")
        for structure in (SINGLE, SPLIT):
            for i, ex in enumerate(expand_pair(x, y, k, structure), 1):
                for scheme in (None, chunk):
                    mask = build_loss_mask(ex, scheme)
                    prompt_len = len(tokenize(segment_words(ex.prompt), scheme))
                    assert min(mask.indices()) >= prompt_len
                    assert mask.indices() == list(range(prompt_len, mask.n_tokens))
                n_words = len(build_loss_mask(ex).indices())
                if structure is SINGLE:
                    assert n_words == 1
                else:
                    # steps past |y| add the end marker to the whole target
                    assert n_words == (i if i <= ny else ny + 1)


def _decoder_corpus():
    spec = LexiconModelSpec(random_lexicon(40, seed=5), Permutation.parse("2:1,5:2"),
                            epsilon=0.15)
    return spec, synthetic_corpus(spec, 100, 7, 14, seed=6)


def test_decoder_equivalences():
    """Decoders: SBS(b=1,c=1,w=1) equals greedy on 100 sentences; top beam score non-decreasing in b; chunked SBS runs ceil(m/c) searches, < 30 s"""
    t0 = time.perf_counter()
    spec, pairs = _decoder_corpus()
    model = LexiconModel(spec, SINGLE)
    for p in pairs:
        g = run_instance(p, model, SINGLE, DecodeConfig("greedy", k=2))
        s = run_instance(p, model, SINGLE, DecodeConfig("sbs", k=2, b=1, c=1, w=1))
        assert (g.prediction, g.delays) == (s.prediction, s.delays)

        prompts = []
        run_instance(p, model, SINGLE, DecodeConfig("greedy", k=1),
                     on_prompt=lambda _, pr: prompts.append(pr))
        for pr in prompts[:4]:
            tops = [beam_search(model, PromptContext(pr), b, 4)[0].score for b in (1, 2, 5)]
            assert tops[0] <= tops[1] <= tops[2]

        for c in (2, 3):
            dec = Decoder(model, DecodeConfig("sbs", k=3, b=3, c=c, w=c))
            run_instance(p, model, SINGLE, dec.cfg, decoder=dec)
            assert dec.beam_searches == math.ceil(dec.steps / c)
    assert time.perf_counter() - t0 < 30.0


def _exhaustive_best(model, ctx, depth):
    """Best token path of ``depth`` steps by full enumeration of the model's support."""
    best = (-math.inf, ())
    stack = [((), 0.0)]
    while stack:
        path, score = stack.pop()
        if len(path) == depth or (path and path[-1].is_eos):
            best = max(best, (score, path), key=lambda e: e[0])
            continue
        for tok, lp in model.next_distribution(ctx.extend(path)).entries:
            stack.append((path + (tok,), score + lp))
    return best


def test_misalignment_oracle():
    """Misalignment: displacement d=3 gives a guess for k<=3 and the correct word for k>=4; single SBS recovers it at k=3"""
    lex = random_lexicon(12, seed=8)
    vocab = sorted(lex)
    rng = random.Random(9)
    for n in range(4, 9):
        for j in range(1, n - 2):
            src = [rng.choice(vocab) for _ in range(n)]
            perm = Permutation([Rotation(j, 3)])
            plain = LexiconModel(LexiconModelSpec(lex, perm), SINGLE)
            ref = plain.spec.reference(src)
            p = SentencePair(1, " ".join(src), " ".join(ref))
            for k in range(1, 8):
                out = run_instance(p, plain, SINGLE, DecodeConfig(k=k)).prediction.split()
                hidden = perm.source_index(j) > min(j + k - 1, n)
                assert hidden == (k <= 3)
                assert out[j - 1] == ("<guess>" if hidden else ref[j - 1])

            spec = LexiconModelSpec(lex, perm, anticipation=0.4, guess_penalty=0.5)
            model = LexiconModel(spec, SINGLE, recall=[src])
            greedy = run_instance(p, model, SINGLE, DecodeConfig(k=3)).prediction.split()
            assert greedy[j - 1] == "<guess>"
            sbs = run_instance(p, model, SINGLE, DecodeConfig("sbs", k=3, b=5, c=1, w=2))
            assert sbs.prediction == p.target

            prompts = {}
            run_instance(p, model, SINGLE, DecodeConfig("sbs", k=3, b=5, c=1, w=2),
                         on_prompt=lambda step, pr: prompts.setdefault(step, pr))
            ctx = PromptContext(prompts[j])
            score, path = _exhaustive_best(model, ctx, 2)
            chosen = beam_search(model, ctx, 5, 2)[0]
            assert path[0].text == ref[j - 1] == chosen.words()[0]
            assert chosen.score == pytest.approx(score)
            assert decode_greedy_word(model, ctx, 16).word == "<guess>"


def test_metrics_oracles():
    """Metrics: BLEU identity 100, 3-sentence hand fixture to 1e-6, AL/LAAL hand fixtures, |LAAL-k|<=1 on identity corpora"""
    refs = [" ".join(_words(n, "w")) for n in range(4, 12)]
    assert abs(corpus_bleu(refs, refs).score - 100.0) <= 1e-9
    assert abs(corpus_bleu(HAND_HYPS, HAND_REFS).score - HAND_SCORE) <= 1e-6
    full = DelayRecord((3, 4, 4, 4), 4, 4, 4)
    assert average_lagging(full) == 3.0 and laal(full) == 3.0
    short = DelayRecord((3, 4), 4, 2, 4)
    assert average_lagging(short) == 2.5 and laal(short) == 3.0

    spec = LexiconModelSpec(random_lexicon(50, seed=13))
    pairs = synthetic_corpus(spec, 30, 20, 30, seed=14)
    model = LexiconModel(spec, SINGLE)
    for k in (3, 5, 7):
        logs = [run_instance(p, model, SINGLE, DecodeConfig(k=k)) for p in pairs]
        vals = [laal(DelayRecord(tuple(g.delays), len(g.source.split()), len(g.delays),
                                 len(g.reference.split()))) for g in logs]
        assert abs(sum(vals) / len(vals) - k) <= 1


def test_wait_k_generalizability(tmp_path):
    """Wait-k direction: with a fixed guess penalty, BLEU is non-decreasing over inference k in {3,5,7}"""
    spec = LexiconModelSpec(random_lexicon(60, seed=15), Permutation.parse("2:2,7:4,14:6"),
                            epsilon=0.1, guess_penalty=0.3)
    pairs = synthetic_corpus(spec, 60, 21, 30, seed=16)
    model = LexiconModel(spec, SINGLE)
    scores = [run_corpus(pairs, model, SINGLE, DecodeConfig(k=k), tmp_path / str(k)).bleu.score
              for k in (3, 5, 7)]
    print("BLEU by k=3,5,7:", [round(s, 2) for s in scores])
    assert scores[0] <= scores[1] <= scores[2]
    assert scores[0] < scores[2]


def test_end_to_end_determinism(tmp_path):
    """Determinism: two identical evaluate runs give byte-identical instances.jsonl and summary.json; score reproduces summary.json"""
    spec = LexiconModelSpec(random_lexicon(30, seed=17), Permutation.parse("3:2"), epsilon=0.2)
    pairs = synthetic_corpus(spec, 25, 6, 15, seed=18)
    (tmp_path / "lex.tsv").write_text("".join(f"{a}\t{b}\n" for a, b in spec.lexicon.items()))
    (tmp_path / "s.txt").write_text("".join(p.source + "\n" for p in pairs))
    (tmp_path / "r.txt").write_text("".join(p.target + "\n" for p in pairs))
    base = ["evaluate", "--source", str(tmp_path / "s.txt"), "--reference", str(tmp_path / "r.txt"),
            "--k", "3", "--strategy", "sbs", "--beams", "5", "--chunk", "1", "--window", "6",
            "--model", f"lexicon:{tmp_path / 'lex.tsv'}", "--epsilon", "0.2",
            "--permutation", "3:2"]
    for run in ("a", "b"):
        assert main(base + ["--out", str(tmp_path / run)]) == 0
    for name in ("instances.jsonl", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert main(["score", "--instances", str(tmp_path / "a/instances.jsonl"),
                 "--out", str(tmp_path / "rescored.json")]) == 0
    assert (tmp_path / "rescored.json").read_bytes() == (tmp_path / "a/summary.json").read_bytes()


def test_wire_protocol_conformance(tmp_path):
    """Wire protocol: echo stub server completes a 20-sentence evaluation; id mismatch and positive logprob raise the specified errors"""
    pairs = [SentencePair(i, " ".join(_words(4 + i % 4, f"s{i}x")), " ".join(_words(4 + i % 4, f"s{i}x")))
             for i in range(1, 21)]
    argv = [sys.executable, "-m", "simulmt.model.server", "--model", "echo"]
    with RemoteProvider.spawn(argv, timeout=20) as remote:
        summary = run_corpus(pairs, remote, SINGLE, DecodeConfig("sbs", k=2, b=2, w=3),
                             tmp_path)
    assert summary.instance_count == 20 and summary.failure_count == 0
    assert summary.bleu.score == pytest.approx(100.0)
    for mode, err in (("bad-id", IdMismatchError), ("positive", ResponseValidationError)):
        with RemoteProvider.spawn([sys.executable, FAKE, mode], timeout=10) as bad:
            with pytest.raises(err):
                bad.next_distribution(PromptContext("x"))
