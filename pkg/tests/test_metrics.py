import math

import pytest
from hypothesis import given, strategies as st

from simulmt.errors import ContractViolation
from simulmt.metrics import DelayRecord, average_lagging, bleu_tokenize, corpus_bleu, laal

HAND_HYPS = ["the cat sat on a mat", "a dog ran", "it rains today"]
HAND_REFS = ["the cat sat on the mat", "a dog ran", "it is raining today"]
# Clipped counts worked out on paper, sentence by sentence:
#   1-grams 5/6 + 3/3 + 2/3 = 10/12     2-grams 3/5 + 2/2 + 0/2 = 5/9
#   3-grams 2/4 + 1/1 + 0/1 = 3/6       4-grams 1/3 + 0/0 + 0/0 = 1/3
# hyp_len 12 < ref_len 13, so BP = exp(1 - 13/12).
HAND_SCORE = 48.490598312416715


def test_hand_fixture():
    rep = corpus_bleu(HAND_HYPS, HAND_REFS)
    assert rep.matches == [10, 5, 3, 1]
    assert rep.totals == [12, 9, 6, 3]
    assert (rep.hyp_len, rep.ref_len) == (12, 13)
    assert rep.brevity_penalty == pytest.approx(math.exp(-1 / 12), abs=1e-12)
    assert rep.score == pytest.approx(HAND_SCORE, abs=1e-6)
    assert rep.precisions == pytest.approx([100 * 10 / 12, 100 * 5 / 9, 50.0, 100 / 3])


def test_identity_is_100():
    refs = ["el gato negro", "Hello, world. 3.5 apples!", "a"]
    assert corpus_bleu(refs, refs).score == pytest.approx(100.0, abs=1e-9)


def test_forced_zero():
    assert corpus_bleu(["the the the the"], ["the cat"]).score == 0.0


def test_empty_hypothesis_scores_zero():
    rep = corpus_bleu([""], ["a b c d"])
    assert rep.score == 0.0 and rep.brevity_penalty == 0.0


def test_bleu_errors():
    with pytest.raises(ContractViolation):
        corpus_bleu(["a"], ["a", "b"])
    with pytest.raises(ContractViolation):
        corpus_bleu([], [])
    with pytest.raises(ContractViolation):
        corpus_bleu(["a"], [""])


@pytest.mark.parametrize("line,toks", [
    ("Hello, world.", ["Hello", ",", "world", "."]),
    ("3.5 and 1,000", ["3.5", "and", "1,000"]),
    ("a-b (c)", ["a-b", "(", "c", ")"]),
    ("x &amp; y", ["x", "&", "y"]),
    ("2-3", ["2", "-", "3"]),
])
def test_13a_tokenizer(line, toks):
    assert bleu_tokenize(line) == toks


def _brute_counts(hyp, ref, n):
    """Clip counts with plain list scans, no Counter."""
    h = [tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1)]
    r = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
    hit = 0
    for g in set(h):
        hit += min(h.count(g), r.count(g))
    return hit, len(h)


word = st.sampled_from(["a", "b", "c", "d"])


@given(st.lists(st.tuples(st.lists(word, max_size=7), st.lists(word, min_size=1, max_size=7)),
                min_size=1, max_size=5))
def test_counts_match_brute_force(pairs):
    hyps = [" ".join(h) for h, _ in pairs]
    refs = [" ".join(r) for _, r in pairs]
    rep = corpus_bleu(hyps, refs)
    for n in range(1, 5):
        m = t = 0
        for h, r in pairs:
            a, b = _brute_counts(h, r, n)
            m += a
            t += b
        assert (rep.matches[n - 1], rep.totals[n - 1]) == (m, t)
    assert 0.0 <= rep.score <= 100.0 + 1e-9


def test_al_laal_fixtures():
    rec = DelayRecord((3, 4, 4, 4), 4, 4, 4)
    assert average_lagging(rec) == 3.0 and laal(rec) == 3.0
    short = DelayRecord((3, 4), 4, 2, 4)
    assert average_lagging(short) == 2.5
    assert laal(short) == 3.0


def test_full_sentence_regime():
    rec = DelayRecord((6,) * 5, 6, 5, 5)
    assert average_lagging(rec) == 6.0


def test_delay_record_validation():
    for args in [((), 4, 0, 4), ((3, 2), 4, 2, 2), ((3, 5), 4, 2, 2), ((0, 1), 4, 2, 2),
                 ((3, 4), 4, 3, 3)]:
        with pytest.raises(ContractViolation):
            DelayRecord(*args)


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 8), st.integers(1, 30))
def test_laal_at_least_al_for_wait_k(n, m, k, r):
    d = tuple(min(i + k - 1, n) for i in range(1, m + 1))
    rec = DelayRecord(d, n, m, r)
    al, la = average_lagging(rec), laal(rec)
    if r <= m:
        assert la == al
    else:
        assert la >= al
