"""Fine-tuning prompts for the three prompt structures.

The split structure trains on the whole target prefix at every step, so
the model sees early target words under much more source context than at
inference.  The single-output-word structure puts the target prefix in the
prompt and trains on exactly one word: its training prompts are the very
prompts the evaluator renders.
"""
from simulmt.prompting import PromptStructure, build_loss_mask, expand_pair

x = "I have a black cat at home".split()
y = "Tengo un gato negro en casa".split()

for name in ("split", "single-word"):
    structure = PromptStructure.named(name)
    examples = expand_pair(x, y, 3, structure)
    print(f"== {name}: {len(examples)} examples (max(|x|-(k-1), |y|) = {max(len(x) - 2, len(y))})")
    for ex in examples[:3] + examples[-1:]:
        trained = len(build_loss_mask(ex).indices())
        src_line = ex.prompt.splitlines()[1]
        print(f"  step {ex.step}: {src_line!r:40} -> {ex.completion!r}  ({trained} trained tokens)")

ex = expand_pair(x, y, 3, PromptStructure.named("single-word"))[1]
print("\nfull single-word example:\n" + ex.text)
