"""
Features, key and meter
=======================
"""
from pathlib import Path

import numpy as np

import notemesh
from notemesh.features import FeatureKind, estimate_ts_numerator, extract_features, self_similarity
from notemesh.harmony import detect_key, identify_chord, interval_between, key_signature, scale_pitch_classes

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"
np.set_printoptions(precision=3, suppress=True)

score = notemesh.load(CORPUS / "set_b" / "chorales" / "waltz.mid")

feats = extract_features(score)
for kind in FeatureKind:
    if kind.is_scalar:
        print(f"{kind.value:4s} {float(feats[kind].data):8.3f}")
print("pitch-class histogram:", feats[FeatureKind.PCH].data)

key = detect_key(score)
print("key:", key, "signature:", key_signature(key), "scale:", scale_pitch_classes(key))

# Onset periodicity over quarter notes
print("numerator estimate:", estimate_ts_numerator(score.notes(), score.tpqn))

# Bar-to-bar similarity of pitch content
S = self_similarity(score, "pch")
print(S[:4, :4])

# A few theory lookups
print(interval_between(60, 67))
print(identify_chord({7, 11, 2, 5}))
