"""
MMM tokens
==========

Turn a score into bar-bracketed tokens, write them as text and decode them
back into notes.
"""
from pathlib import Path

import notemesh
from notemesh.tokenizer import (
    TokenizerConfig,
    detokenize,
    tokenize,
    tokens_to_txt,
    txt_to_tokens,
    vocabulary,
)

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"

score = notemesh.load(CORPUS / "set_b" / "c_major_scale.mid")

# Default resolution is 24 steps per quarter note.
config = TokenizerConfig()
seq = tokenize(score, config)
text = tokens_to_txt(seq)
print(len(seq), "tokens")
print(text[:160], "...")

# The vocabulary is fixed by the configuration, so it can be saved once per
# dataset.
print("vocabulary size:", len(vocabulary(config)))

# Decoding gives notes on the token grid (tpqn 24) with a fixed velocity.
back = detokenize(txt_to_tokens(text, config))
for a, b in zip(score.notes(), back.notes()):
    print(f"{a.pitch_name:4s} {a.start_ticks:4d}-{a.end_ticks:4d}  ->  {b.start_ticks:3d}-{b.end_ticks:3d}")

# A coarser grid shrinks the TIME_DELTA range.
small = TokenizerConfig(time_unit_per_quarter=4, max_time_delta=16)
print(tokens_to_txt(tokenize(score, small)))
