"""Directory-based datasets of MIDI files."""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

__all__ = ["MIDI_PATTERNS", "DatasetSpec", "resolve_dataset", "thread_count", "parallel_map"]

MIDI_PATTERNS = ("**/*.mid", "**/*.midi")


@dataclass(frozen=True)
class DatasetSpec:
    """A directory plus glob patterns, with the matching files sorted."""

    root: Path
    patterns: Tuple[str, ...] = MIDI_PATTERNS
    files: Tuple[Path, ...] = field(default=())

    def __len__(self):
        return len(self.files)


def resolve_dataset(root, patterns=MIDI_PATTERNS):
    """Collect the files under ``root`` matching any of ``patterns``.

    A path to a single file yields a one-file dataset. Files are returned in
    lexicographic order so downstream results do not depend on the file
    system's listing order.
    """
    root = Path(root)
    if root.is_file():
        return DatasetSpec(root.parent, tuple(patterns), (root,))
    if not root.is_dir():
        raise FileNotFoundError(f"no such file or directory: {root}")
    found = set()
    for pattern in patterns:
        found.update(p for p in root.glob(pattern) if p.is_file())
    return DatasetSpec(root, tuple(patterns), tuple(sorted(found, key=lambda p: p.as_posix())))


def thread_count():
    """Worker count from ``NOTEMESH_THREADS`` (0 or unset means automatic)."""
    try:
        n = int(os.environ.get("NOTEMESH_THREADS", "0"))
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def parallel_map(func, items, threads=None):
    """``map`` over a thread pool; results keep the input order."""
    items = list(items)
    threads = thread_count() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
