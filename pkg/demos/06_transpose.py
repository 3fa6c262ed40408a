"""
Moving a melody by scale degrees
================================
"""
from pathlib import Path

import notemesh
from notemesh.harmony import parse_key, transpose_by_degrees

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"

score = notemesh.load(CORPUS / "set_b" / "c_major_scale.mid")
print("original:  ", [n.pitch_name for n in score.notes()])

# same degrees, relative minor
minor = transpose_by_degrees(score, parse_key("c_major"), parse_key("a_minor"))
print("a minor:   ", [n.pitch_name for n in minor.notes()])

# one degree up in the first bar, a third up (two degrees) from the second bar on
shifted = transpose_by_degrees(score, parse_key("c_major"), parse_key("c_major"), [1, 2])
print("shifted:   ", [n.pitch_name for n in shifted.notes()])

# into E flat major, a fifth above each degree (pitch names are always spelled
# with sharps, so Bb prints as A#)
eb = transpose_by_degrees(score, parse_key("c_major"), parse_key("eb_major"), [4])
print("eb major:  ", [n.pitch_name for n in eb.notes()])
