"""Objective comparison of two datasets through feature-distance densities.

For each feature, pairwise Euclidean distances are computed within each
dataset (intra-set) and across the two datasets (inter-set). A Gaussian
kernel density estimate of each distance set is then compared with the
overlap area and the Kullback-Leibler divergence.
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .datasets import parallel_map, resolve_dataset
from .errors import DatasetError, FormatError, InsufficientSamples, KindMismatch
from .features import FeatureKind, feature_of_notes, bar_notes, extract_features
from .midi_io import load

__all__ = [
    "DEFAULT_GRID_POINTS",
    "KL_FLOOR",
    "DistanceSet",
    "Pdf",
    "FeatureReport",
    "EvalReport",
    "feature_distance",
    "intra_set_distances",
    "inter_set_distances",
    "scott_bandwidth",
    "kde",
    "estimate_pdf",
    "common_grid",
    "overlap_area",
    "kl_divergence",
    "dataset_features",
    "compare_features",
    "cross_validate",
]

log = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 1000
KL_FLOOR = 1e-12
PAD_BANDWIDTHS = 3.0


@dataclass(frozen=True, eq=False)
class DistanceSet:
    values: np.ndarray
    kind: str
    n_a: int
    n_b: int

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Pdf:
    """Density sampled on an evenly spaced grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float = float("nan")

    def integral(self):
        return float(np.trapezoid(self.density, self.grid))


def _stack(features):
    kinds = {f.kind for f in features}
    if len(kinds) > 1:
        raise KindMismatch(f"features of mixed kinds: {sorted(k.name for k in kinds)}")
    return np.vstack([f.as_array() for f in features])


def feature_distance(a, b):
    """Euclidean distance between two values of the same feature kind."""
    if a.kind is not b.kind:
        raise KindMismatch(f"cannot compare {a.kind.name} with {b.kind.name}")
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def _pairwise(x, y):
    diff = x[:, None, :] - y[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def intra_set_distances(features):
    """Distances over all unordered pairs ``i < j`` of one dataset."""
    if len(features) < 2:
        raise InsufficientSamples("intra-set distances need at least 2 samples")
    x = _stack(features)
    i, j = np.triu_indices(len(x), k=1)
    values = np.sqrt(((x[i] - x[j]) ** 2).sum(axis=1))
    return DistanceSet(values, "intra", len(x), len(x))


def inter_set_distances(a, b):
    """Distances over the full product of two datasets, ``len(a) * len(b)`` values."""
    if not a or not b:
        raise InsufficientSamples("inter-set distances need two non-empty datasets")
    x, y = _stack(a), _stack(b)
    if x.shape[1] != y.shape[1]:
        raise KindMismatch("datasets hold features of different kinds")
    if a[0].kind is not b[0].kind:
        raise KindMismatch(f"cannot compare {a[0].kind.name} with {b[0].kind.name}")
    return DistanceSet(_pairwise(x, y).ravel(), "inter", len(x), len(y))


def scott_bandwidth(values):
    """Scott's rule ``std * n ** (-1/5)``.

    A sample with zero spread gets ``max(1e-3, 1e-3 * mean)`` instead.
    """
    values = np.asarray(values, dtype=float)
    sigma = float(np.std(values, ddof=1))
    if sigma > 0:
        return sigma * len(values) ** (-0.2)
    return max(1e-3, 1e-3 * float(np.mean(values)))


def kde(values, bandwidth, grid, chunk=2048):
    """Gaussian kernel density of ``values`` evaluated at ``grid``."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    out = np.zeros_like(grid)
    norm = 1.0 / (len(values) * bandwidth * np.sqrt(2 * np.pi))
    for lo in range(0, len(values), chunk):
        z = (grid[:, None] - values[None, lo:lo + chunk]) / bandwidth
        out += np.exp(-0.5 * z * z).sum(axis=1)
    return out * norm


def _default_grid(values, bandwidth, n_points):
    pad = PAD_BANDWIDTHS * bandwidth
    return np.linspace(float(np.min(values)) - pad, float(np.max(values)) + pad, n_points)


def estimate_pdf(distances, grid=None, n_points=DEFAULT_GRID_POINTS):
    """Kernel density estimate of a distance set, normalized to integrate to 1.

    Parameters
    ----------
    distances : DistanceSet or array-like
    grid : array-like, optional
        Evaluation points. Defaults to ``n_points`` points spanning the data
        padded by three bandwidths on each side.
    """
    values = distances.values if isinstance(distances, DistanceSet) else np.asarray(distances, dtype=float)
    if len(values) < 2:
        raise InsufficientSamples("density estimation needs at least 2 values")
    h = scott_bandwidth(values)
    grid = _default_grid(values, h, n_points) if grid is None else np.asarray(grid, dtype=float)
    density = kde(values, h, grid)
    area = np.trapezoid(density, grid)
    if area > 0:
        density = density / area
    return Pdf(grid, density, h)


def common_grid(p, q):
    """Re-sample two densities on the union of their grids (0 outside support)."""
    if p.grid.shape == q.grid.shape and np.array_equal(p.grid, q.grid):
        return p.grid, p.density, q.density
    grid = np.union1d(p.grid, q.grid)
    return (
        grid,
        np.interp(grid, p.grid, p.density, left=0.0, right=0.0),
        np.interp(grid, q.grid, q.density, left=0.0, right=0.0),
    )


def overlap_area(p, q):
    """Area under the pointwise minimum of two densities."""
    grid, a, b = common_grid(p, q)
    return float(np.trapezoid(np.minimum(a, b), grid))


def kl_divergence(p, q, eps=KL_FLOOR):
    """KL(p || q) by the trapezoid rule, after flooring both densities at ``eps``."""
    grid, a, b = common_grid(p, q)
    a = np.maximum(a, eps)
    b = np.maximum(b, eps)
    a = a / np.trapezoid(a, grid)
    b = b / np.trapezoid(b, grid)
    return float(np.trapezoid(a * np.log(a / b), grid))


# Dataset-level pipeline ------------------------------------------------------

def _sample_features(path, kinds, granularity):
    score = load(path)
    if granularity == "file":
        return [extract_features(score, kinds)]
    _, buckets = bar_notes(score)
    return [{k: feature_of_notes(notes, k, score.tpqn) for k in kinds} for notes in buckets]


def dataset_features(root, kinds=tuple(FeatureKind), granularity="file", threads=None):
    """Per-sample feature mappings of every MIDI file under ``root``.

    With ``granularity="bar"`` every bar of every file is one sample.

    Raises
    ------
    DatasetError
        Listing every file that failed to parse.
    """
    if granularity not in ("file", "bar"):
        raise ValueError("granularity must be 'file' or 'bar'")
    spec = resolve_dataset(root)

    def work(path):
        try:
            return path, _sample_features(path, kinds, granularity), None
        except (FormatError, OSError) as exc:
            return path, None, f"{type(exc).__name__}: {exc}"

    results = parallel_map(work, spec.files, threads)
    failures = {str(p): err for p, _, err in results if err is not None}
    if failures:
        raise DatasetError(failures)
    return [sample for _, samples, _ in results for sample in samples]


@dataclass(frozen=True, eq=False)
class FeatureReport:
    kind: FeatureKind
    intra_a: Pdf
    intra_b: Pdf
    inter: Pdf
    oa_a_inter: float
    kld_a_inter: float
    oa_b_inter: float
    kld_b_inter: float

    def to_dict(self, include_pdfs=True):
        out = {
            "oa_a_inter": self.oa_a_inter,
            "kld_a_inter": self.kld_a_inter,
            "oa_b_inter": self.oa_b_inter,
            "kld_b_inter": self.kld_b_inter,
        }
        if include_pdfs:
            out["pdf_grids"] = {
                "grid": self.inter.grid.tolist(),
                "intra_a": self.intra_a.density.tolist(),
                "intra_b": self.intra_b.density.tolist(),
                "inter": self.inter.density.tolist(),
            }
        return out


@dataclass(frozen=True, eq=False)
class EvalReport:
    features: Dict[FeatureKind, FeatureReport]
    n_a: int
    n_b: int
    granularity: str = "file"

    def to_dict(self, include_pdfs=True):
        return {
            "features": {k.value: r.to_dict(include_pdfs) for k, r in self.features.items()},
            "n_a": self.n_a,
            "n_b": self.n_b,
        }

    def to_json(self, include_pdfs=True, indent=None):
        return json.dumps(self.to_dict(include_pdfs), indent=indent)


def compare_features(samples_a, samples_b, kind, n_points=DEFAULT_GRID_POINTS):
    """Densities, overlap areas and divergences for one feature kind.

    All three densities share one grid spanning the pooled distances padded
    by three of the largest bandwidth.
    """
    intra_a = intra_set_distances(samples_a)
    intra_b = intra_set_distances(samples_b)
    inter = inter_set_distances(samples_a, samples_b)
    for d in (intra_a, intra_b, inter):
        if len(d) < 2:
            raise InsufficientSamples(f"{kind.name}: {d.kind}-set distances need at least 2 values")
    pooled = np.concatenate([intra_a.values, intra_b.values, inter.values])
    h = max(scott_bandwidth(d.values) for d in (intra_a, intra_b, inter))
    grid = _default_grid(pooled, h, n_points)
    pa, pb, pi = (estimate_pdf(d, grid) for d in (intra_a, intra_b, inter))
    return FeatureReport(
        kind, pa, pb, pi,
        overlap_area(pa, pi), kl_divergence(pa, pi),
        overlap_area(pb, pi), kl_divergence(pb, pi),
    )


def cross_validate(dataset_a, dataset_b, kinds: Optional[Sequence] = None, granularity="file",
                   n_points=DEFAULT_GRID_POINTS, threads=None):
    """Compare two directories of MIDI files feature by feature.

    Parameters
    ----------
    dataset_a, dataset_b : path
        Directories (searched recursively for ``.mid``/``.midi``).
    kinds : sequence of FeatureKind or codes, optional
        Defaults to all nine features.
    granularity : {"file", "bar"}
        Whether a sample is a whole file or a single bar.

    Returns
    -------
    EvalReport
    """
    kinds = [k if isinstance(k, FeatureKind) else FeatureKind.from_code(k)
             for k in (kinds or tuple(FeatureKind))]
    samples_a = dataset_features(dataset_a, kinds, granularity, threads)
    samples_b = dataset_features(dataset_b, kinds, granularity, threads)
    for name, samples in (("dataset A", samples_a), ("dataset B", samples_b)):
        if len(samples) < 2:
            raise InsufficientSamples(f"{name} has {len(samples)} sample(s); at least 2 are needed")
    log.info("comparing %d and %d samples over %d features", len(samples_a), len(samples_b), len(kinds))
    reports = {}
    for kind in kinds:
        reports[kind] = compare_features(
            [s[kind] for s in samples_a], [s[kind] for s in samples_b], kind, n_points
        )
    return EvalReport(reports, len(samples_a), len(samples_b), granularity)
