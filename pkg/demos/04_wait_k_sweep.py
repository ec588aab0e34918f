"""Quality/latency trade-off over inference k on a reordered synthetic corpus.

Larger k hides fewer reordered words, so BLEU rises while LAAL grows with k.
"""
import tempfile

from simulmt.decoding import DecodeConfig
from simulmt.harness import run_corpus
from simulmt.model.lexicon import LexiconModel, LexiconModelSpec, Permutation
from simulmt.prompting import PromptStructure
from simulmt.synthetic import random_lexicon, synthetic_corpus

spec = LexiconModelSpec(random_lexicon(60, seed=15), Permutation.parse("2:2,7:4,14:6"),
                        epsilon=0.1, guess_penalty=0.3)
pairs = synthetic_corpus(spec, 60, 21, 30, seed=16)
structure = PromptStructure()
model = LexiconModel(spec, structure)

print(" k   BLEU    LAAL")
with tempfile.TemporaryDirectory() as out:
    for k in (1, 3, 5, 7, 9):
        s = run_corpus(pairs, model, structure, DecodeConfig(k=k), f"{out}/{k}")
        print(f"{k:2d}  {s.bleu.score:6.2f}  {s.laal_mean:5.2f}")
