"""Word reordering under wait-k, and speculative beam search as a partial fix.

The toy lexicon translator needs source word j+3 for target word j.  With
k <= 3 that word is still hidden when target j is written, so greedy decoding
commits a guess.  Given a model that puts some mass on the right word and
loses confidence after a guess, a beam over two words notices that the guess
path scores worse and commits the correct word instead.

The chunk-wise run (c=2) shows the flip side: the guess was speculated one
step early and committed from the cache without being searched again.
"""
from simulmt.corpus import SentencePair
from simulmt.decoding import DecodeConfig
from simulmt.harness import run_instance
from simulmt.model.lexicon import LexiconModel, LexiconModelSpec, Permutation
from simulmt.prompting import PromptStructure

lexicon = {"el": "the", "perro": "dog", "negro": "black", "come": "eats", "pan": "bread",
           "hoy": "today"}
src = "el perro negro come pan hoy".split()
structure = PromptStructure()

plain = LexiconModelSpec(lexicon, Permutation.parse("2:3"))
pair = SentencePair(1, " ".join(src), " ".join(plain.reference(src)))
print("reference:", pair.target)

for k in (1, 2, 3, 4, 5):
    log = run_instance(pair, LexiconModel(plain, structure), structure, DecodeConfig(k=k))
    print(f"greedy k={k}: {log.prediction:40} delays={log.delays}")

spec = LexiconModelSpec(lexicon, Permutation.parse("2:3"), anticipation=0.4, guess_penalty=0.5)
model = LexiconModel(spec, structure, recall=[src])
for cfg in (DecodeConfig(k=3), DecodeConfig("sbs", k=3, b=5, c=1, w=2),
            DecodeConfig("sbs", k=3, b=5, c=2, w=2)):
    log = run_instance(pair, model, structure, cfg)
    print(f"{cfg.strategy.value:6} b={cfg.b} c={cfg.c} w={cfg.w}: {log.prediction}")
