"""``notemesh`` command line.

Exit codes: 0 on success, 1 on data or runtime errors, 2 on usage errors.
"""
import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .datasets import parallel_map, resolve_dataset
from .errors import NotemeshError
from .eval import cross_validate
from .features import FeatureKind, estimate_ts_numerator, extract_features
from .harmony import detect_key, parse_key, transpose_by_degrees
from .midi_io import load, write_midi
from .render import PlotOptions, render_pdf_svg, render_pianoroll_svg
from .rhythm import SUBDIVISIONS
from .score import quantize_score, to_json
from .tokenizer import TokenizerConfig, tokenize, tokens_to_txt, vocabulary

log = logging.getLogger("notemesh")


def write_atomic(path, data):
    """Write ``data`` (str or bytes) next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _feature_list(text):
    try:
        kinds = [FeatureKind.from_code(c.strip()) for c in text.split(",") if c.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not kinds:
        raise argparse.ArgumentTypeError("no features given")
    return list(dict.fromkeys(kinds))


def _key(text):
    try:
        return parse_key(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bar_range(text):
    first, sep, last = text.partition(":")
    try:
        if not sep:
            raise ValueError
        a = int(first) if first else 0
        b = int(last) if last else None
    except ValueError:
        raise argparse.ArgumentTypeError(f"bar range must look like A:B, got {text!r}") from None
    return a, b


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load(path, quantize=None):
    score = load(path)
    return quantize_score(score, quantize) if quantize else score


# commands ------------------------------------------------------------------

def cmd_analyze(args):
    score = _load(args.file, args.quantize)
    tempo = ", ".join(f"{e.bpm:g} bpm at tick {e.tick}" for e in score.tempo_map)
    sigs = ", ".join(f"{ts} at tick {t}" for t, ts in score.time_sig_map)
    lines = [
        f"file: {args.file}",
        f"tpqn: {score.tpqn}",
        f"tempo: {tempo}",
        f"time signatures: {sigs}",
        f"instruments: {len(score.instruments)}",
    ]
    for i, inst in enumerate(score.instruments):
        label = "drums" if inst.is_drum else f"program {inst.program}"
        name = f" {inst.name!r}" if inst.name else ""
        lines.append(f"  [{i}] {label}{name}: notes: {len(inst.notes)}, bars: {len(inst.bars)}")
    melodic = score.notes(include_drums=False)
    lines.append(f"notes: {sum(len(i.notes) for i in score.instruments)}")
    lines.append(f"key: {detect_key(score) if melodic else 'n/a'}")
    try:
        numerator = estimate_ts_numerator(melodic, score.tpqn)
    except NotemeshError:
        numerator = "n/a"
    lines.append(f"estimated numerator: {numerator}")
    scalars = [k for k in FeatureKind if k.is_scalar]
    for kind, value in extract_features(score, scalars).items():
        lines.append(f"{kind.value}: {float(value.data):.4g}")
    print("\n".join(lines))
    if args.json:
        write_atomic(args.json, to_json(score, indent=1))
    return 0


def cmd_tokenize(args):
    config = TokenizerConfig(time_unit_per_quarter=args.time_unit,
                             max_time_delta=args.max_time_delta or 4 * args.time_unit)
    path = Path(args.path)
    spec = resolve_dataset(path)
    out = Path(args.out)

    def work(file):
        target = out / (file.relative_to(spec.root).with_suffix(".txt"))
        try:
            seq = tokenize(_load(file, args.quantize), config)
            write_atomic(target, tokens_to_txt(seq) + "\n")
            return file, None
        except (NotemeshError, OSError) as exc:
            return file, f"{type(exc).__name__}: {exc}"

    ok = 0
    for file, err in parallel_map(work, spec.files):
        if err:
            log.error("%s: %s", file, err)
        else:
            ok += 1
    if ok == 0:
        log.error("no file tokenized under %s", path)
        return 1
    write_atomic(out / "vocab.txt", "\n".join(vocabulary(config)) + "\n")
    print(f"tokenized {ok} of {len(spec.files)} files into {out}")
    return 0


def cmd_eval(args):
    report = cross_validate(args.dir_a, args.dir_b, args.features, args.granularity,
                            n_points=args.grid_points)
    print(f"samples: A={report.n_a} B={report.n_b} ({report.granularity})")
    print(f"{'feature':8s} {'OA(A,inter)':>12s} {'KLD(A,inter)':>13s} {'OA(B,inter)':>12s} {'KLD(B,inter)':>13s}")
    for kind, r in report.features.items():
        print(f"{kind.value:8s} {r.oa_a_inter:12.4f} {r.kld_a_inter:13.4f} {r.oa_b_inter:12.4f} {r.kld_b_inter:13.4f}")
    if args.out:
        write_atomic(args.out, report.to_json(include_pdfs=not args.no_pdfs) + "\n")
    if args.plots:
        for kind, r in report.features.items():
            write_atomic(Path(args.plots) / f"{kind.value}.svg", render_pdf_svg(r))
    return 0


def cmd_plot(args):
    score = load(args.file)
    options = PlotOptions(
        bar_range=args.bars,
        subdivision=args.subdivision,
        track_index=args.track,
        show_bar_labels=not args.no_bar_labels,
        width_px=args.width,
        height_px=args.height,
    )
    write_atomic(args.out, render_pianoroll_svg(score, options))
    return 0


def cmd_transpose(args):
    score = load(args.file)
    result = transpose_by_degrees(score, args.source_key, args.target_key, args.degrees)
    write_atomic(args.out, write_midi(result))
    print(f"{args.file}: {args.source_key} -> {args.target_key}, written to {args.out}")
    return 0


def cmd_key(args):
    key = detect_key(load(args.file))
    print(f"{key} ({key.code})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="notemesh", description="Symbolic music toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="summarize a MIDI file")
    p.add_argument("file")
    p.add_argument("--json", metavar="PATH", help="also write the score as JSON")
    p.add_argument("--quantize", choices=list(SUBDIVISIONS), help="snap notes to a grid first")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("tokenize", help="write MMM token files for a file or directory")
    p.add_argument("path")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--time-unit", type=int, default=24, metavar="N", help="steps per quarter note")
    p.add_argument("--max-time-delta", type=int, default=None, metavar="N",
                   help="largest TIME_DELTA token (default: four quarters)")
    p.add_argument("--quantize", choices=list(SUBDIVISIONS))
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("eval", help="compare two datasets feature by feature")
    p.add_argument("dir_a")
    p.add_argument("dir_b")
    p.add_argument("--features", type=_feature_list, default=list(FeatureKind),
                   help="comma-separated codes: " + ",".join(k.value for k in FeatureKind))
    p.add_argument("--out", metavar="REPORT.json")
    p.add_argument("--plots", metavar="DIR", help="write one SVG of the densities per feature")
    p.add_argument("--granularity", choices=("file", "bar"), default="file")
    p.add_argument("--grid-points", type=int, default=1000)
    p.add_argument("--no-pdfs", action="store_true", help="omit density curves from the report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render a pianoroll to SVG")
    p.add_argument("file")
    p.add_argument("--bars", type=_bar_range, default=(0, None), metavar="A:B")
    p.add_argument("--subdivision", choices=list(SUBDIVISIONS), default="quarter")
    p.add_argument("--track", type=int, default=0)
    p.add_argument("--no-bar-labels", action="store_true")
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=360)
    p.add_argument("--out", required=True, metavar="SVG")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("transpose", help="move notes by scale degrees into a target key")
    p.add_argument("file")
    p.add_argument("--source-key", type=_key, required=True, metavar="KEY")
    p.add_argument("--target-key", type=_key, required=True, metavar="KEY")
    p.add_argument("--degrees", type=_int_list, default=[0], metavar="D0,D1,...",
                   help="degree shift per bar; the last value repeats")
    p.add_argument("--out", required=True, metavar="MID")
    p.set_defaults(func=cmd_transpose)

    p = sub.add_parser("key", help="detect the global key of a MIDI file")
    p.add_argument("file")
    p.set_defaults(func=cmd_key)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (NotemeshError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
