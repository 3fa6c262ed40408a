"""SVG pianorolls with a bar and subdivision grid, and PDF line plots.

Output is plain SVG 1.1 built from strings with fixed number formatting,
so identical input always produces byte-identical files.
"""
from dataclasses import dataclass
from typing import Optional, Tuple
from xml.sax.saxutils import escape

from .errors import EmptyRange, TrackOutOfRange
from .rhythm import grid_ticks
from .score import bar_frames, pitch_to_name

__all__ = [
    "MARGIN_LEFT",
    "MARGIN_RIGHT",
    "MARGIN_TOP",
    "MARGIN_BOTTOM",
    "PlotOptions",
    "plot_area",
    "render_pianoroll_svg",
    "render_pdf_svg",
]

MARGIN_LEFT = 44
MARGIN_RIGHT = 8
MARGIN_TOP = 18
MARGIN_BOTTOM = 8

NOTE_FILL = "#3b7dd8"
BAR_STROKE = "#333333"
SUB_STROKE = "#bbbbbb"
ROW_FILL = "#f4f4f4"
EMPTY_PITCH_RANGE = (58, 62)


@dataclass(frozen=True)
class PlotOptions:
    """Pianoroll settings. ``bar_range`` is ``(first, last)``, last exclusive;
    ``None`` for last means through the final bar holding notes."""

    bar_range: Tuple[int, Optional[int]] = (0, None)
    subdivision: str = "quarter"
    track_index: int = 0
    show_bar_labels: bool = True
    width_px: int = 960
    height_px: int = 360


def plot_area(options):
    """``(x0, y0, width, height)`` of the drawable region."""
    return (
        MARGIN_LEFT,
        MARGIN_TOP,
        options.width_px - MARGIN_LEFT - MARGIN_RIGHT,
        options.height_px - MARGIN_TOP - MARGIN_BOTTOM,
    )


def _f(v):
    return f"{v:.2f}"


def render_pianoroll_svg(score, options=PlotOptions()):
    """Render one track of ``score`` as an SVG pianoroll.

    Every note whose onset lies in the bar range becomes a ``rect`` of class
    ``note`` (cut at the right edge if it sounds past the range). Bar
    boundaries are drawn as thick ``line.bar`` elements, subdivisions as thin
    ``line.sub`` elements. Opacity follows velocity from 0.4 to 1.0.

    Raises
    ------
    TrackOutOfRange
        If ``options.track_index`` does not name an instrument.
    EmptyRange
        If the bar range holds no bars.
    """
    if not 0 <= options.track_index < len(score.instruments):
        raise TrackOutOfRange(
            f"track {options.track_index} requested but the score has {len(score.instruments)}"
        )
    first, last = options.bar_range
    frames = bar_frames(score.time_sig_map, score.tpqn, score.end_ticks,
                        min_bars=max(1, last or 0))
    if last is None:
        last = len(frames)
    if first < 0 or last <= first:
        raise EmptyRange(f"bar range {first}:{last} contains no bars")
    frames = frames[first:last]
    t0, t1 = frames[0][0], frames[-1][1]
    g = grid_ticks(options.subdivision, score.tpqn)

    x0, y0, w, h = plot_area(options)
    span = t1 - t0

    def x_of(tick):
        return x0 + (tick - t0) * w / span

    inst = score.instruments[options.track_index]
    notes = [n for n in inst.notes if t0 <= n.start_ticks < t1]
    if notes:
        lo = max(0, min(n.pitch for n in notes) - 2)
        hi = min(127, max(n.pitch for n in notes) + 2)
    else:
        lo, hi = EMPTY_PITCH_RANGE
    rows = hi - lo + 1
    row_h = h / rows

    def y_of(pitch):
        return y0 + (hi - pitch) * row_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{options.width_px}" '
        f'height="{options.height_px}" viewBox="0 0 {options.width_px} {options.height_px}">',
        f"<title>{escape(inst.name or f'track {options.track_index}')}</title>",
        '<rect class="background" x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        '<g class="rows">',
    ]
    for pitch in range(lo, hi + 1):
        if pitch % 12 in (1, 3, 6, 8, 10):
            out.append(f'<rect x="{_f(x0)}" y="{_f(y_of(pitch))}" width="{_f(w)}" '
                       f'height="{_f(row_h)}" fill="{ROW_FILL}"/>')
    out.append("</g>")

    out.append('<g class="grid">')
    for k, (start, stop, _) in enumerate(frames):
        xs = _f(x_of(start))
        out.append(f'<line class="bar" x1="{xs}" y1="{_f(y0)}" x2="{xs}" y2="{_f(y0 + h)}" '
                   f'stroke="{BAR_STROKE}" stroke-width="1.5"/>')
        tick = start + g
        while tick < stop:
            xs = _f(x_of(tick))
            out.append(f'<line class="sub" x1="{xs}" y1="{_f(y0)}" x2="{xs}" y2="{_f(y0 + h)}" '
                       f'stroke="{SUB_STROKE}" stroke-width="0.5"/>')
            tick += g
        if options.show_bar_labels:
            out.append(f'<text class="bar-label" x="{_f(x_of(start) + 2)}" y="{_f(y0 - 5)}" '
                       f'font-size="10" font-family="sans-serif">{first + k + 1}</text>')
    xs = _f(x_of(t1))
    out.append(f'<line class="bar" x1="{xs}" y1="{_f(y0)}" x2="{xs}" y2="{_f(y0 + h)}" '
               f'stroke="{BAR_STROKE}" stroke-width="1.5"/>')
    out.append("</g>")

    out.append('<g class="pitch-labels">')
    for pitch in range(lo, hi + 1):
        if pitch % 12 == 0:
            out.append(f'<text class="pitch-label" x="{_f(x0 - 4)}" y="{_f(y_of(pitch) + row_h * 0.8)}" '
                       f'font-size="9" font-family="sans-serif" text-anchor="end">{pitch_to_name(pitch)}</text>')
    out.append("</g>")

    out.append('<g class="notes">')
    for n in notes:
        x = x_of(n.start_ticks)
        width = x_of(min(n.end_ticks, t1)) - x
        opacity = 0.4 + 0.6 * n.velocity / 127
        out.append(f'<rect class="note" x="{_f(x)}" y="{_f(y_of(n.pitch))}" width="{_f(width)}" '
                   f'height="{_f(row_h)}" fill="{NOTE_FILL}" fill-opacity="{opacity:.3f}">'
                   f"<title>{n.pitch_name} [{n.start_ticks}, {n.end_ticks})</title></rect>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


_CURVE_COLORS = {"intra_a": "#1f77b4", "intra_b": "#ff7f0e", "inter": "#2ca02c"}


def render_pdf_svg(report, width_px=480, height_px=300):
    """Line plot of the intra-set and inter-set densities of one feature."""
    x0, y0 = MARGIN_LEFT, MARGIN_TOP
    w, h = width_px - MARGIN_LEFT - MARGIN_RIGHT, height_px - MARGIN_TOP - 24
    curves = {"intra_a": report.intra_a, "intra_b": report.intra_b, "inter": report.inter}
    xmin = min(float(p.grid[0]) for p in curves.values())
    xmax = max(float(p.grid[-1]) for p in curves.values())
    ymax = max(float(p.density.max()) for p in curves.values()) or 1.0
    xspan = (xmax - xmin) or 1.0

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width_px}" '
        f'height="{height_px}" viewBox="0 0 {width_px} {height_px}">',
        f"<title>{report.kind.name}</title>",
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{_f(x0)}" y="12" font-size="11" font-family="sans-serif">{report.kind.name}: '
        f"OA(A, inter)={report.oa_a_inter:.3f} KLD(A, inter)={report.kld_a_inter:.3f}</text>",
        f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(w)}" height="{_f(h)}" fill="none" stroke="#888888"/>',
    ]
    for name, pdf in curves.items():
        pts = " ".join(
            f"{_f(x0 + (gx - xmin) * w / xspan)},{_f(y0 + h - d * h / ymax)}"
            for gx, d in zip(pdf.grid, pdf.density)
        )
        out.append(f'<polyline class="{name}" points="{pts}" fill="none" '
                   f'stroke="{_CURVE_COLORS[name]}" stroke-width="1.2"/>')
    for k, name in enumerate(curves):
        out.append(f'<text x="{_f(x0 + 6 + 90 * k)}" y="{height_px - 8}" font-size="10" '
                   f'font-family="sans-serif" fill="{_CURVE_COLORS[name]}">{name}</text>')
    out.append(f'<text x="{_f(x0)}" y="{_f(y0 + h + 12)}" font-size="9" font-family="sans-serif">{xmin:.3g}</text>')
    out.append(f'<text x="{_f(x0 + w)}" y="{_f(y0 + h + 12)}" font-size="9" font-family="sans-serif" '
               f'text-anchor="end">{xmax:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
