"""Acceptance criteria, each checked at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line, printed immediately and again
in the terminal summary.
"""
import math
import os
import subprocess
import sys
import time
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES, CORPUS
from generators import random_notes, random_score, scale_fixture, write_constant_pitch_corpus, write_theme_corpus
from notemesh.errors import FormatError
from notemesh.eval import (
    cross_validate,
    estimate_pdf,
    inter_set_distances,
    intra_set_distances,
    kl_divergence,
    overlap_area,
)
from notemesh.features import FeatureKind, FeatureValue, feature_of_notes
from notemesh.harmony import detect_key
from notemesh.midi_io import load, parse_midi, write_midi
from notemesh.render import PlotOptions, render_pianoroll_svg
from notemesh.rhythm import SUBDIVISIONS, grid_ticks, quantize
from notemesh.score import Instrument, Note, Score, bar_frames
from notemesh.tokenizer import TokenizerConfig, detokenize, tokenize, vocabulary

ROOT = Path(__file__).resolve().parents[1]
SVG = "{http://www.w3.org/2000/svg}"


def record(name, failures, detail=""):
    status = "PASS" if not failures else "FAIL"
    line = f"{status}  {name}" + (f"  ({detail})" if detail else "")
    if failures:
        line += "  first failures: " + "; ".join(map(str, failures[:3]))
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def test_midi_round_trip():
    rng = np.random.default_rng(1001)
    scores = [random_score(rng, max_instruments=4, max_notes=16) for _ in range(500)]
    assert max(sum(len(i.notes) for i in s.instruments) for s in scores) <= 64
    t0 = time.perf_counter()
    failures = [k for k, s in enumerate(scores) if parse_midi(write_midi(s)) != s]
    elapsed = time.perf_counter() - t0
    if elapsed >= 10:
        failures.append(f"took {elapsed:.2f} s")
    record("MIDI round-trip: 500 scores, exact equality, < 10 s", failures, f"{elapsed:.2f} s")


def test_corpus_robustness():
    files = sorted(p for p in CORPUS.rglob("*") if p.is_file() and p.suffix in (".mid", ".midi"))
    failures = []
    parsed = typed = 0
    for path in files:
        try:
            load(path)
            parsed += 1
        except FormatError:
            typed += 1
        except Exception as exc:  # any other exception is a crash
            failures.append(f"{path.name}: {type(exc).__name__}")
    if len(files) != 20:
        failures.append(f"corpus holds {len(files)} files, expected 20")
    if typed < 5:
        failures.append(f"only {typed} corrupt files raised FormatError")
    record("Corpus robustness: 20 files, parse or FormatError, no crash", failures,
           f"{parsed} parsed, {typed} FormatError")


def test_tokenizer_round_trip():
    rng = np.random.default_rng(1002)
    config = TokenizerConfig()
    vocab = set(vocabulary(config))
    failures = []
    if len(vocab) != 486:
        failures.append(f"vocabulary size {len(vocab)}")
    for k in range(500):
        score = random_score(rng, grid_step=4, tpqn=96)
        seq = tokenize(score, config)
        outside = set(seq.tokens) - vocab
        if outside:
            failures.append(f"score {k}: tokens outside vocabulary {sorted(outside)[:3]}")
        back = detokenize(seq)
        want = [sorted((n.pitch, n.start_ticks, n.end_ticks) for n in i.notes) for i in score.instruments]
        got = [sorted((n.pitch, 4 * n.start_ticks, 4 * n.end_ticks) for n in i.notes) for i in back.instruments]
        if want != got:
            failures.append(f"score {k}: note multiset differs")
    record("Tokenizer round-trip: 500 grid-aligned scores, vocabulary closure at 486", failures)


def test_feature_normalization():
    rng = np.random.default_rng(1003)
    failures = []
    K = FeatureKind
    for k in range(1000):
        notes = random_notes(rng, max_notes=40)
        f = {kind: feature_of_notes(notes, kind, 96).as_array() for kind in FeatureKind}
        for kind in (K.PCH, K.NLH, K.PCTM, K.NLTM):
            s = f[kind].sum()
            if not (s == 0 and not f[kind].any()) and abs(s - 1) > 1e-9:
                failures.append(f"set {k}: {kind.name} sums to {s}")
        if notes and abs(f[K.PCH].sum() - 1) > 1e-9:
            failures.append(f"set {k}: non-empty PCH sums to {f[K.PCH].sum()}")
        if len(notes) >= 2 and abs(f[K.PCTM].sum() - 1) > 1e-9:
            failures.append(f"set {k}: PCTM sums to {f[K.PCTM].sum()}")
        if not (f[K.PR][0] >= 0 and f[K.PI][0] >= 0 and f[K.PC][0] <= min(f[K.NC][0], 128)):
            failures.append(f"set {k}: scalar bounds")
        shift = 12 * int(rng.integers(-2, 3))
        moved = [Note(n.pitch + shift, n.start_ticks, n.end_ticks, n.velocity) for n in notes
                 if 0 <= n.pitch + shift <= 127]
        kept = [n for n in notes if 0 <= n.pitch + shift <= 127]
        if not np.array_equal(feature_of_notes(moved, K.PCH, 96).data, feature_of_notes(kept, K.PCH, 96).data):
            failures.append(f"set {k}: PCH changed under an octave shift of {shift}")
    record("Feature normalization: 1000 note sets, sums, bounds, PCH octave invariance", failures)


def test_eval_math():
    rng = np.random.default_rng(1004)
    failures = []
    for k in range(100):
        values = rng.gamma(rng.uniform(0.5, 5), rng.uniform(0.1, 3), size=int(rng.integers(2, 200)))
        p = estimate_pdf(values)
        oa, kl = overlap_area(p, p), kl_divergence(p, p)
        if abs(oa - 1) > 1e-3 or kl > 1e-6:
            failures.append(f"set {k}: OA(p,p)={oa}, KLD(p,p)={kl}")
    g = np.random.default_rng(0)
    oa = overlap_area(estimate_pdf(g.standard_normal(10_000)), estimate_pdf(2 + g.standard_normal(10_000)))
    oa_true = 2 * stats.norm.cdf(-1)
    if abs(oa - oa_true) > 0.02:
        failures.append(f"Gaussian OA {oa:.4f} vs {oa_true:.4f}")
    g = np.random.default_rng(0)
    kl = kl_divergence(estimate_pdf(g.standard_normal(10_000)), estimate_pdf(1 + g.standard_normal(10_000)))
    if abs(kl - 0.5) > 0.05:
        failures.append(f"Gaussian KLD {kl:.4f} vs 0.5")
    for _ in range(50):
        n, m = int(rng.integers(2, 40)), int(rng.integers(1, 40))
        a = [FeatureValue(FeatureKind.PCH, rng.random(12)) for _ in range(n)]
        b = [FeatureValue(FeatureKind.PCH, rng.random(12)) for _ in range(m)]
        if len(intra_set_distances(a)) != n * (n - 1) // 2 or len(inter_set_distances(a, b)) != n * m:
            failures.append(f"distance counts wrong for n={n}, m={m}")
    record("Eval math: OA/KLD identities on 100 sets, Gaussian oracles, distance counts", failures,
           f"OA={oa:.4f} (analytic {oa_true:.4f}), KLD={kl:.4f} (analytic 0.5)")


def test_self_comparison(tmp_path):
    t0 = time.perf_counter()
    themes = tmp_path / "themes"
    write_theme_corpus(themes)
    failures = []
    n_files = len(list(themes.glob("*.mid")))
    if n_files != 10:
        failures.append(f"corpus has {n_files} files")
    report = cross_validate(themes, themes)
    worst_oa = min(r.oa_a_inter for r in report.features.values())
    worst_kl = max(r.kld_a_inter for r in report.features.values())
    for kind, r in report.features.items():
        if r.oa_a_inter < 0.9 or r.kld_a_inter > 0.05:
            failures.append(f"{kind.value}: OA={r.oa_a_inter:.3f} KLD={r.kld_a_inter:.3f}")
    c4 = write_constant_pitch_corpus(tmp_path / "c4", 60, seed=1)
    fs4 = write_constant_pitch_corpus(tmp_path / "fs4", 66, seed=2)
    cross = cross_validate(c4, fs4, ["pch"]).features[FeatureKind.PCH].oa_a_inter
    if cross > 0.05:
        failures.append(f"C4 vs F#4 PCH OA={cross:.3f}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 30:
        failures.append(f"took {elapsed:.1f} s")
    record("Self-comparison: OA >= 0.9 and KLD <= 0.05 on all nine features; C4 vs F#4 PCH OA <= 0.05; < 30 s",
           failures, f"min OA {worst_oa:.3f}, max KLD {worst_kl:.3f}, cross OA {cross:.3f}, {elapsed:.1f} s")


def test_key_detection():
    failures = []
    for tonic in range(12):
        for mode in ("major", "minor"):
            for octave in (4, 3, 5):
                key = detect_key(scale_fixture(tonic, mode, octave))
                if (key.tonic_pc, key.mode) != (tonic, mode):
                    failures.append(f"{tonic} {mode} octave {octave}: got {key}")
    record("Key detection: 24 scale fixtures with octave-shift invariance", failures)


def snap_oracle(t, g):
    below = (t // g) * g
    return below if t - below <= below + g - t else below + g


def test_quantization():
    rng = np.random.default_rng(1005)
    failures = []
    for k in range(1000):
        tpqn = int(rng.choice([96, 192, 384, 480]))
        notes = random_notes(rng, max_notes=20, tpqn=tpqn)
        for sub in SUBDIVISIONS:
            g = grid_ticks(sub, tpqn)
            q = quantize(notes, sub, tpqn)
            for n, m in zip(notes, q):
                start = snap_oracle(n.start_ticks, g)
                end = max(snap_oracle(start + n.end_ticks - n.start_ticks, g), start + g)
                if (m.start_ticks, m.end_ticks) != (start, end):
                    failures.append(f"set {k} {sub}: {n.start_ticks}-{n.end_ticks} -> {m.start_ticks}-{m.end_ticks}")
                if m.start_ticks % g or m.end_ticks % g or m.end_ticks - m.start_ticks < g:
                    failures.append(f"set {k} {sub}: off grid")
            if quantize(q, sub, tpqn) != q:
                failures.append(f"set {k} {sub}: not idempotent")
    record("Quantization: 1000 note sets x 6 subdivisions, idempotent, on grid", failures)


def test_render():
    rng = np.random.default_rng(1006)
    failures = []
    for k in range(50):
        score = random_score(rng)
        sub = str(rng.choice(sorted(SUBDIVISIONS)))
        track = int(rng.integers(len(score.instruments)))
        first = int(rng.integers(0, 3))
        last = first + int(rng.integers(1, 5))
        options = PlotOptions(bar_range=(first, last), subdivision=sub, track_index=track)
        svg = render_pianoroll_svg(score, options)
        if render_pianoroll_svg(score, options) != svg:
            failures.append(f"score {k}: output differs between runs")
        try:
            root = ET.fromstring(svg.encode())
        except ET.ParseError as exc:
            failures.append(f"score {k}: {exc}")
            continue
        frames = bar_frames(score.time_sig_map, score.tpqn, score.end_ticks, min_bars=last)[first:last]
        g = grid_ticks(sub, score.tpqn)
        want_bars = len(frames) + 1
        want_subs = sum(math.ceil((stop - start) / g) - 1 for start, stop, _ in frames)
        t0, t1 = frames[0][0], frames[-1][1]
        want_notes = sum(t0 <= n.start_ticks < t1 for n in score.instruments[track].notes)
        classes = [e.get("class") for e in root.iter() if e.tag in (SVG + "line", SVG + "rect")]
        got = (classes.count("bar"), classes.count("sub"), classes.count("note"))
        if got != (want_bars, want_subs, want_notes):
            failures.append(f"score {k}: got {got}, expected {(want_bars, want_subs, want_notes)}")
    record("Render: grid and note counts on 50 scores, valid XML, byte-deterministic", failures)


def test_cli_workflow(tmp_path):
    env = {**os.environ, "PYTHON": sys.executable,
           "PYTHONPATH": os.pathsep.join([str(ROOT / "src"), os.environ.get("PYTHONPATH", "")])}
    proc = subprocess.run(["bash", str(ROOT / "demos" / "cli_workflow.sh"), str(tmp_path)],
                          capture_output=True, text=True, env=env, timeout=300)
    failures = []
    if proc.returncode != 0:
        failures.append(f"exit {proc.returncode}: {proc.stderr.strip()[-300:]}")
    for name in ("random_00.json", "report.json", "pianoroll.svg"):
        if not (tmp_path / name).exists():
            failures.append(f"missing {name}")
    record("CLI workflow parity: analyze, eval, plot script exits 0", failures)
