"""k-means++ codebooks over radial response vectors.

Cluster centres are fitted once per reference trajectory on the pooled
per-azimuth vectors of all its scans, then reused to aggregate residuals
into place descriptors.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArgumentError, IngestError

CDBK_MAGIC = b"CDBK"
_CDBK_HEADER = struct.Struct("<4sIIQ")


@dataclass(frozen=True)
class Codebook:
    """Fitted cluster centres plus fit diagnostics.

    ``inertia`` is the sum of squared distances from every training vector
    to its nearest centre, under the returned centres. ``inertia_trace``
    records that value for each Lloyd iteration in order.
    """

    centres: np.ndarray
    inertia: float
    iterations_run: int
    seed: int = 0
    inertia_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        centres = np.asarray(self.centres, dtype=np.float64)
        if centres.ndim != 2 or centres.shape[0] < 1:
            raise ArgumentError(f"centres must be a k x W matrix, got shape {centres.shape}")
        if not np.isfinite(centres).all():
            raise ArgumentError("centres must be finite")
        if self.inertia < 0.0:
            raise ArgumentError("inertia must be non-negative")
        object.__setattr__(self, "centres", centres)
        object.__setattr__(self, "inertia_trace", np.asarray(self.inertia_trace, dtype=np.float64))

    @property
    def k(self) -> int:
        return self.centres.shape[0]

    @property
    def width(self) -> int:
        return self.centres.shape[1]


def _pairwise_sq_dist(vectors: np.ndarray, centres: np.ndarray) -> np.ndarray:
    d2 = (
        (vectors * vectors).sum(axis=1)[:, None]
        - 2.0 * vectors @ centres.T
        + (centres * centres).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0, out=d2)


def _seed_centres(vectors: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # D^2 seeding: each next centre is drawn with probability proportional
    # to its squared distance from the nearest centre chosen so far.
    n = vectors.shape[0]
    centres = np.empty((k, vectors.shape[1]))
    centres[0] = vectors[int(rng.integers(n))]
    d2 = ((vectors - centres[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            raise ArgumentError(f"k={k} exceeds the number of distinct vectors")
        threshold = rng.random() * total
        idx = min(int(np.searchsorted(np.cumsum(d2), threshold, side="right")), n - 1)
        centres[i] = vectors[idx]
        d2 = np.minimum(d2, ((vectors - centres[i]) ** 2).sum(axis=1))
    return centres


def _update_centres(vectors: np.ndarray, labels: np.ndarray, centres: np.ndarray) -> np.ndarray:
    k = centres.shape[0]
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros_like(centres)
    np.add.at(sums, labels, vectors)
    new = centres.copy()
    occupied = counts > 0
    new[occupied] = sums[occupied] / counts[occupied, None]
    # An emptied cluster is re-seeded at the vector farthest from its
    # nearest current centre, one empty cluster at a time.
    for empty in np.flatnonzero(~occupied):
        d2 = _pairwise_sq_dist(vectors, new).min(axis=1)
        new[empty] = vectors[int(np.argmax(d2))]
    return new


def fit_kmeans_pp(vectors, k: int, tol: float = 1e-4, seed: int = 0, max_iter: int = 300) -> Codebook:
    """Fit k centres by k-means++ seeding followed by Lloyd iterations.

    Iteration stops when the relative decrease in inertia is <= ``tol`` or
    after ``max_iter`` assignment passes. The whole procedure is
    deterministic for a fixed (vectors order, k, tol, seed, max_iter).
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] < 1:
        raise ArgumentError("vectors must be a non-empty n x W matrix")
    if not np.isfinite(vectors).all():
        raise ArgumentError("vectors must be finite")
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if k > vectors.shape[0]:
        raise ArgumentError(f"k={k} exceeds the {vectors.shape[0]} available vectors")
    if tol <= 0.0 or max_iter < 1:
        raise ArgumentError("tol must be positive and max_iter >= 1")

    rng = np.random.default_rng(seed)
    centres = _seed_centres(vectors, k, rng)

    trace = []
    previous = None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = _pairwise_sq_dist(vectors, centres)
        labels = np.argmin(d2, axis=1)
        inertia = float(np.take_along_axis(d2, labels[:, None], axis=1).sum())
        trace.append(inertia)
        if previous is not None and previous - inertia <= tol * previous:
            break
        previous = inertia
        if iterations == max_iter:
            break
        centres = _update_centres(vectors, labels, centres)

    return Codebook(
        centres=centres,
        inertia=trace[-1],
        iterations_run=iterations,
        seed=seed,
        inertia_trace=np.array(trace),
    )


def assign_nearest(codebook: Codebook, x) -> int:
    """Index of the centre nearest to ``x``; ties go to the lowest index."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != codebook.width:
        raise ArgumentError(f"vector length {x.size} != codebook width {codebook.width}")
    if not np.isfinite(x).all():
        raise ArgumentError("vector must be finite")
    d2 = ((codebook.centres - x) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def save_codebook(path, codebook: Codebook) -> None:
    """Write centres to the native binary format (fit diagnostics are not persisted)."""
    if codebook.seed < 0:
        raise ArgumentError("codebook file stores the seed unsigned; negative seeds unsupported")
    header = _CDBK_HEADER.pack(CDBK_MAGIC, codebook.k, codebook.width, codebook.seed)
    Path(path).write_bytes(header + codebook.centres.astype("<f8").tobytes())


def load_codebook(path) -> Codebook:
    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < _CDBK_HEADER.size:
        raise IngestError(f"{path}: file shorter than header")
    magic, k, width, seed = _CDBK_HEADER.unpack_from(buf)
    if magic != CDBK_MAGIC:
        raise IngestError(f"{path}: bad magic {magic!r}")
    need = _CDBK_HEADER.size + k * width * 8
    if len(buf) != need:
        raise IngestError(f"{path}: expected {need} bytes, found {len(buf)}")
    centres = np.frombuffer(buf, dtype="<f8", offset=_CDBK_HEADER.size).reshape(k, width)
    return Codebook(centres=centres.copy(), inertia=0.0, iterations_run=0, seed=seed)
