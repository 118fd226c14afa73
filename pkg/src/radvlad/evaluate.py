"""Trajectory-pair localisation experiments and timing benchmarks.

A run matches every downsampled query scan against a reference map by
descriptor distance, gates correctness by planar pose distance, and
reports Recall@N. Distance matrices are oriented queries-by-references;
similarity scores (the sinogram-spectrum method) are negated on ingestion
so that lower always means more similar.
"""

from __future__ import annotations

import contextlib
import csv
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codebook import Codebook, fit_kmeans_pp, save_codebook
from .config import (
    METHOD_FFT_RADVLAD,
    METHOD_RADVLAD,
    METHOD_RAPLACE,
    METHOD_RINGKEY,
    METHODS,
    VLAD_METHODS,
    RunConfig,
)
from .descriptors import (
    RaplaceDescriptor,
    descriptor_distance,
    encode_raplace,
    encode_ring_key,
    encode_vlad,
    raplace_similarity,
)
from .errors import ArgumentError
from .scans import (
    PolarScan,
    Trajectory,
    TrajectoryPoses,
    resample_range,
    suppress_near_range,
)
from .spectral import radial_fft_magnitude

DMAT_MAGIC = b"DMAT"
_DMAT_HEADER = struct.Struct("<4sII")

RESULTS_CSV_HEADER = ["query_traj", "ref_traj", "method", "N", "recall_pct", "evaluated", "skipped"]
TIMING_CSV_HEADER = ["method", "phase", "sample_idx", "seconds"]


@dataclass(frozen=True)
class GroundTruthMatrix:
    """Q x M booleans: query pose within ``threshold_m`` of reference pose."""

    is_match: np.ndarray
    threshold_m: float

    def __post_init__(self):
        is_match = np.asarray(self.is_match, dtype=bool)
        if is_match.ndim != 2:
            raise ArgumentError("is_match must be 2-D")
        if self.threshold_m <= 0.0:
            raise ArgumentError("threshold_m must be positive")
        object.__setattr__(self, "is_match", is_match)

    @property
    def rows(self) -> int:
        return self.is_match.shape[0]

    @property
    def cols(self) -> int:
        return self.is_match.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Q x M descriptor distances, lower = more similar."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ArgumentError("values must be 2-D")
        if not np.isfinite(values).all():
            raise ArgumentError("values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_similarity(cls, similarity) -> "DistanceMatrix":
        return cls(-np.asarray(similarity, dtype=np.float64))


@dataclass(frozen=True)
class RecallCurve:
    n_values: np.ndarray
    recall_pct: np.ndarray
    evaluated_queries: int
    skipped_queries: int = 0

    def at(self, n: int) -> float:
        idx = int(np.searchsorted(self.n_values, n))
        if idx >= len(self.n_values) or self.n_values[idx] != n:
            raise ArgumentError(f"N={n} not in curve")
        return float(self.recall_pct[idx])


@dataclass
class EvalRun:
    """All artefacts of one query-vs-reference localisation experiment."""

    query_name: str
    ref_name: str
    method: str
    distances: DistanceMatrix
    ground_truth: GroundTruthMatrix
    recall: RecallCurve
    codebook: Codebook | None = None


def downsample_trajectory(scans, stride: int) -> list:
    """Every ``stride``-th element, starting at index 0."""
    if stride < 1:
        raise ArgumentError(f"stride must be >= 1, got {stride}")
    return list(scans[::stride])


def associate_poses(scans, poses: TrajectoryPoses) -> TrajectoryPoses:
    """Pose of nearest timestamp for each scan (earlier pose wins ties)."""
    if len(poses) == 0:
        raise ArgumentError("pose list is empty")
    ts = np.array([scan.timestamp_ns for scan in scans], dtype=np.int64)
    if len(ts) > 1 and not (np.diff(ts) > 0).all():
        raise ArgumentError("scan timestamps must be strictly increasing")
    ref = poses.timestamps_ns
    right = np.searchsorted(ref, ts)
    left = np.clip(right - 1, 0, len(ref) - 1)
    right = np.clip(right, 0, len(ref) - 1)
    pick = np.where(np.abs(ref[right] - ts) < np.abs(ts - ref[left]), right, left)
    return TrajectoryPoses(ts, poses.easting_m[pick], poses.northing_m[pick])


def ground_truth_matrix(queries: TrajectoryPoses, refs: TrajectoryPoses, threshold_m: float) -> GroundTruthMatrix:
    """Planar distance gate between every query pose and reference pose."""
    if len(queries) == 0 or len(refs) == 0:
        raise ArgumentError("pose lists must be non-empty")
    de = queries.easting_m[:, None] - refs.easting_m[None, :]
    dn = queries.northing_m[:, None] - refs.northing_m[None, :]
    dist = np.hypot(de, dn)
    return GroundTruthMatrix(dist <= threshold_m, float(threshold_m))


def recall_at_n(dist: DistanceMatrix, gt: GroundTruthMatrix, n_max: int) -> RecallCurve:
    """Recall@1..n_max over queries that have at least one true match.

    A query counts as recalled at N when its N smallest-distance
    references (ties broken by lower reference index) include a true
    match. Matchless queries are excluded from the denominator and
    reported in ``skipped_queries``.
    """
    if dist.values.shape != gt.is_match.shape:
        raise ArgumentError(
            f"shape mismatch: distances {dist.values.shape} vs ground truth {gt.is_match.shape}"
        )
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    has_match = gt.is_match.any(axis=1)
    evaluated = int(has_match.sum())
    skipped = int(len(has_match) - evaluated)
    n_values = np.arange(1, n_max + 1)
    if evaluated == 0:
        return RecallCurve(n_values, np.zeros(n_max), 0, skipped)
    order = np.argsort(dist.values[has_match], axis=1, kind="stable")
    gt_in_order = np.take_along_axis(gt.is_match[has_match], order, axis=1)
    first_hit = np.argmax(gt_in_order, axis=1)
    hits_by_rank = np.bincount(first_hit, minlength=dist.values.shape[1])
    cumulative = np.cumsum(hits_by_rank)
    capped = np.minimum(n_values, dist.values.shape[1]) - 1
    recall_pct = 100.0 * cumulative[capped] / evaluated
    return RecallCurve(n_values, recall_pct, evaluated, skipped)


def preprocess_scan(scan: PolarScan, cfg: RunConfig) -> PolarScan:
    """Near-range suppression followed by range resampling."""
    return resample_range(suppress_near_range(scan, cfg.suppress_bins), cfg.target_bins)


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def training_rows(scans, method: str, cfg: RunConfig) -> np.ndarray:
    """Stacked per-azimuth training vectors for codebook fitting."""
    if method == METHOD_FFT_RADVLAD:
        rows = [radial_fft_magnitude(preprocess_scan(s, cfg)).magnitude for s in scans]
    elif method == METHOD_RADVLAD:
        rows = [preprocess_scan(s, cfg).power for s in scans]
    else:
        raise ArgumentError(f"method {method!r} does not use a codebook")
    return np.concatenate(rows, axis=0)


def fit_method_codebook(ref_scans, method: str, cfg: RunConfig) -> Codebook:
    rows = training_rows(ref_scans, method, cfg)
    return fit_kmeans_pp(rows, cfg.k, tol=cfg.kmeans_tol, seed=cfg.kmeans_seed, max_iter=cfg.kmeans_max_iter)


def _encoder(method: str, cfg: RunConfig, codebook: Codebook | None = None):
    """Per-scan descriptor closure. The raw scan feeds the
    sinogram-spectrum pipeline; the polar methods consume the
    preprocessed scan."""
    if method == METHOD_RINGKEY:
        return lambda s: encode_ring_key(preprocess_scan(s, cfg))
    if method == METHOD_RAPLACE:
        return lambda s: encode_raplace(s, cfg.raplace)
    if method in VLAD_METHODS:
        if codebook is None:
            raise ArgumentError(f"method {method!r} requires a codebook")
        if method == METHOD_FFT_RADVLAD:
            return lambda s: encode_vlad(
                radial_fft_magnitude(preprocess_scan(s, cfg)).magnitude,
                codebook,
                l2_normalize=cfg.vlad_l2_normalize,
            )
        return lambda s: encode_vlad(
            preprocess_scan(s, cfg).power, codebook, l2_normalize=cfg.vlad_l2_normalize
        )
    raise ArgumentError(f"unknown method {method!r}")


def encode_trajectory(scans, method: str, cfg: RunConfig, codebook: Codebook | None = None, jobs: int = 1) -> list:
    """One descriptor per scan, encoded with up to ``jobs`` workers."""
    return _map_jobs(_encoder(method, cfg, codebook), scans, jobs)


def _vector_distance_matrix(query_descs, ref_descs) -> np.ndarray:
    q = np.stack([d.values for d in query_descs])
    r = np.stack([d.values for d in ref_descs])
    if q.shape[1] != r.shape[1]:
        raise ArgumentError("descriptor lengths differ between query and reference")
    d2 = (q * q).sum(axis=1)[:, None] - 2.0 * q @ r.T + (r * r).sum(axis=1)[None, :]
    return np.maximum(d2, 0.0, out=d2)


def _raplace_similarity_matrix(query_descs, ref_descs) -> np.ndarray:
    """Pairwise peak circular correlation, normalised by descriptor norms.

    The normalisation bounds every entry by 1 with equality only for a
    self pair at zero shift, so the self descriptor is always the
    similarity extremum; raw correlation would instead favour references
    with large spectral mass.
    """
    shape = query_descs[0].spectrum.shape
    for d in (*query_descs, *ref_descs):
        if d.spectrum.shape != shape:
            raise ArgumentError("sinogram-spectrum shapes differ")
    fq = np.stack([np.fft.fft(d.spectrum, axis=0) for d in query_descs])
    fr = np.stack([np.fft.fft(d.spectrum, axis=0) for d in ref_descs])
    fr_conj = np.conj(fr)
    norm_q = np.array([np.linalg.norm(d.spectrum) for d in query_descs])
    norm_r = np.array([np.linalg.norm(d.spectrum) for d in ref_descs])
    scale = np.maximum(norm_q[:, None] * norm_r[None, :], np.finfo(float).tiny)
    sim = np.empty((len(query_descs), len(ref_descs)))
    for i in range(len(query_descs)):
        corr = np.fft.ifft((fq[i][None, :, :] * fr_conj).sum(axis=2), axis=1).real
        sim[i] = corr.max(axis=1)
    return sim / scale


def distance_matrix_from_descriptors(method: str, query_descs, ref_descs) -> DistanceMatrix:
    if method == METHOD_RAPLACE:
        return DistanceMatrix.from_similarity(_raplace_similarity_matrix(query_descs, ref_descs))
    return DistanceMatrix(_vector_distance_matrix(query_descs, ref_descs))


def run_pair(
    query: Trajectory,
    ref: Trajectory,
    method: str,
    cfg: RunConfig,
    out_dir=None,
    jobs: int = 1,
) -> EvalRun:
    """Localise a query trajectory against a reference map with one method.

    Both trajectories are downsampled by ``cfg.stride``; the codebook (for
    the residual-aggregation methods) is fitted on the reference side
    only. When ``out_dir`` is given, results.csv, distances.dmat,
    timing.csv (per-scan encode durations plus one distance-matrix
    sample; values naturally vary between runs) and any codebook are
    written there.
    """
    if method not in METHODS:
        raise ArgumentError(f"method must be one of {METHODS}, got {method!r}")
    query_scans = downsample_trajectory(query.scans, cfg.stride)
    ref_scans = downsample_trajectory(ref.scans, cfg.stride)
    if not query_scans or not ref_scans:
        raise ArgumentError("both trajectories must contain at least one scan")

    query_poses = associate_poses(query_scans, query.poses)
    ref_poses = associate_poses(ref_scans, ref.poses)
    gt = ground_truth_matrix(query_poses, ref_poses, cfg.threshold_m)

    codebook = None
    if method in VLAD_METHODS:
        codebook = fit_method_codebook(ref_scans, method, cfg)

    encode = _encoder(method, cfg, codebook)

    def timed_encode(scan):
        start = time.perf_counter()
        descriptor = encode(scan)
        return descriptor, time.perf_counter() - start

    ref_results = _map_jobs(timed_encode, ref_scans, jobs)
    query_results = _map_jobs(timed_encode, query_scans, jobs)
    ref_descs = [d for d, _ in ref_results]
    query_descs = [d for d, _ in query_results]

    start = time.perf_counter()
    distances = distance_matrix_from_descriptors(method, query_descs, ref_descs)
    distance_seconds = time.perf_counter() - start

    recall = recall_at_n(distances, gt, cfg.n_max)
    run = EvalRun(query.name, ref.name, method, distances, gt, recall, codebook)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_results_csv(out_dir / "results.csv", [run])
        write_distance_matrix(out_dir / "distances.dmat", distances)
        timing = TimingReport(
            method,
            np.array([t for _, t in (*ref_results, *query_results)]),
            np.array([distance_seconds]),
        )
        write_timing_csv(out_dir / "timing.csv", [timing])
        if codebook is not None:
            save_codebook(out_dir / "codebook.cdbk", codebook)
    return run


def write_results_csv(path, runs) -> None:
    """One row per (run, N): query_traj,ref_traj,method,N,recall_pct,evaluated,skipped."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_CSV_HEADER)
        for run in runs:
            for n, pct in zip(run.recall.n_values, run.recall.recall_pct):
                writer.writerow(
                    [
                        run.query_name,
                        run.ref_name,
                        run.method,
                        int(n),
                        f"{pct:.6f}",
                        run.recall.evaluated_queries,
                        run.recall.skipped_queries,
                    ]
                )


def write_distance_matrix(path, dist: DistanceMatrix) -> None:
    q, m = dist.values.shape
    header = _DMAT_HEADER.pack(DMAT_MAGIC, q, m)
    Path(path).write_bytes(header + dist.values.astype("<f4").tobytes())


def read_distance_matrix(path) -> DistanceMatrix:
    from .errors import IngestError

    path = Path(path)
    buf = path.read_bytes()
    if len(buf) < _DMAT_HEADER.size:
        raise IngestError(f"{path}: file shorter than header")
    magic, q, m = _DMAT_HEADER.unpack_from(buf)
    if magic != DMAT_MAGIC:
        raise IngestError(f"{path}: bad magic {magic!r}")
    need = _DMAT_HEADER.size + q * m * 4
    if len(buf) != need:
        raise IngestError(f"{path}: expected {need} bytes, found {len(buf)}")
    values = np.frombuffer(buf, dtype="<f4", offset=_DMAT_HEADER.size)
    return DistanceMatrix(values.astype(np.float64).reshape(q, m))


@dataclass
class TimingReport:
    """Per-sample wall-clock durations for one method's two phases."""

    method: str
    build_seconds: np.ndarray
    distance_seconds: np.ndarray

    def median(self, phase: str) -> float:
        return float(np.median(self._samples(phase)))

    def percentile(self, phase: str, q: float) -> float:
        return float(np.percentile(self._samples(phase), q))

    def _samples(self, phase: str) -> np.ndarray:
        if phase == "build":
            return self.build_seconds
        if phase == "distance":
            return self.distance_seconds
        raise ArgumentError(f"unknown phase {phase!r}")


def _single_thread_context():
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=1)
    except ImportError:
        return contextlib.nullcontext()


def bench_timings(method: str, scans, repetitions: int, cfg: RunConfig | None = None) -> TimingReport:
    """Time descriptor construction and one descriptor-pair comparison.

    Each sample times a single encode (cycling through the given scans)
    or a single distance/similarity evaluation between two fixed
    descriptors. Preprocessing and codebook fitting happen outside the
    timed region, and BLAS thread pools are pinned to one thread so the
    samples are comparable across methods.
    """
    if method not in METHODS:
        raise ArgumentError(f"method must be one of {METHODS}, got {method!r}")
    if not scans:
        raise ArgumentError("at least one scan is required")
    if repetitions < 0:
        raise ArgumentError("repetitions must be >= 0")
    if repetitions == 0:
        return TimingReport(method, np.zeros(0), np.zeros(0))
    cfg = cfg if cfg is not None else RunConfig(method=method)

    if method == METHOD_RAPLACE:
        inputs = list(scans)
        encode = lambda s: encode_raplace(s, cfg.raplace)
        compare = raplace_similarity
    else:
        inputs = [preprocess_scan(s, cfg) for s in scans]
        if method == METHOD_RINGKEY:
            encode = encode_ring_key
            compare = descriptor_distance
        else:
            codebook = fit_method_codebook(scans, method, cfg)
            if method == METHOD_FFT_RADVLAD:
                encode = lambda s: encode_vlad(radial_fft_magnitude(s).magnitude, codebook)
            else:
                encode = lambda s: encode_vlad(s.power, codebook)
            compare = descriptor_distance

    build = np.empty(repetitions)
    distance = np.empty(repetitions)
    with _single_thread_context():
        for i in range(repetitions):
            item = inputs[i % len(inputs)]
            start = time.perf_counter()
            encode(item)
            build[i] = time.perf_counter() - start
        left = encode(inputs[0])
        right = encode(inputs[min(1, len(inputs) - 1)])
        for i in range(repetitions):
            start = time.perf_counter()
            compare(left, right)
            distance[i] = time.perf_counter() - start
    return TimingReport(method, build, distance)


def write_timing_csv(path, reports) -> None:
    """Flatten reports to rows: method,phase,sample_idx,seconds."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMING_CSV_HEADER)
        for report in reports:
            for phase in ("build", "distance"):
                for i, seconds in enumerate(report._samples(phase)):
                    writer.writerow([report.method, phase, i, f"{seconds:.9e}"])
