"""
Pianoroll with a subdivision grid
=================================
"""
import tempfile
from pathlib import Path

import notemesh
from notemesh.render import PlotOptions, render_pianoroll_svg
from notemesh.score import quantize_score

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"
out = Path(tempfile.mkdtemp(prefix="notemesh-"))

score = notemesh.load(CORPUS / "set_a" / "random_00.mid")

# bars 0 to 4 of the first instrument, eighth-note grid
opts = PlotOptions(bar_range=(0, 4), subdivision="eighth", track_index=0)
(out / "roll.svg").write_text(render_pianoroll_svg(score, opts))

# the same bars after snapping every note to sixteenths
snapped = quantize_score(score, "sixteenth")
(out / "roll_quantized.svg").write_text(render_pianoroll_svg(snapped, opts))

print("open", out / "roll.svg", "and", out / "roll_quantized.svg", "in a browser")
