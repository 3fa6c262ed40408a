"""
Reading a MIDI file
===================

Parse a file, look at its tempo and meter maps, walk the bars of the first
instrument and save the score as JSON.
"""
import tempfile
from pathlib import Path

import notemesh

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"

# A format-0 file with two channels: every (track, channel) pair becomes
# its own instrument.
score = notemesh.load(CORPUS / "set_a" / "duet_format0.mid")
print("ticks per quarter:", score.tpqn)
print("tempo map:", [(e.tick, e.bpm) for e in score.tempo_map])
print("time signatures:", [(tick, str(ts)) for tick, ts in score.time_sig_map])

for inst in score.instruments:
    print(f"program {inst.program:3d}  drums={inst.is_drum}  notes={len(inst.notes)}")

# Notes carry both tick and second positions, plus a spelled pitch name.
first = score.instruments[0]
for note in first.notes[:4]:
    print(f"  {note.pitch_name:4s} ticks [{note.start_ticks}, {note.end_ticks})"
          f"  seconds [{note.start_sec:.3f}, {note.end_sec:.3f})")

# Bars hold indices into the instrument's note list.
for bar in first.bars[:3]:
    names = [first.notes[i].pitch_name for i in bar.note_refs]
    print(f"bar {bar.index} {bar.time_sig} [{bar.start_ticks}, {bar.end_ticks}):", " ".join(names))

# JSON is lossless: loading it back gives an equal score.
out = Path(tempfile.mkdtemp(prefix="notemesh-")) / "duet.json"
out.write_text(notemesh.to_json(score, indent=1))
assert notemesh.from_json(out.read_text()) == score
print("wrote", out)
