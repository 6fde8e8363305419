"""Per-pixel classifiers producing class maps from multiband scenes.

Five classifiers: unsupervised k-means plus four supervised rules driven by
:class:`~terraclass.training.ClassStats` (minimum distance, Mahalanobis
distance against the pooled covariance, maximum likelihood with per-class
covariances, and the parallelepiped box test). All decision ties break
toward the smallest class id, and every classifier is a pure function of
(pixel, model), so outputs are deterministic for any worker partitioning.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels, parallel
from .errors import (
    DegenerateInput,
    InsufficientSamples,
    InvalidPriors,
    RasterIOError,
    SingularCovariance,
    UnmappedCluster,
    ValidationError,
)
from .raster import ClassRaster, MultibandRaster
from .training import ClassStats, pooled_covariance


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 20
    change_threshold: float = 0.02

    def __post_init__(self):
        if not 1 <= self.k <= 255:
            raise ValidationError(f"k must be in 1..255, got {self.k}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 0.0 <= self.change_threshold < 1.0:
            raise ValidationError("change_threshold must be in [0, 1)")


@dataclass(frozen=True)
class ParallelepipedConfig:
    stddev_multiplier: float = 2.0

    def __post_init__(self):
        if self.stddev_multiplier <= 0:
            raise ValidationError("stddev_multiplier must be positive")


def _assign_chunked(pixels: np.ndarray, centers: np.ndarray, workers: int) -> np.ndarray:
    impl = kernels.get()
    out = np.empty(pixels.shape[0], dtype=np.int32)

    def run(lo: int, hi: int) -> None:
        out[lo:hi] = impl.assign_nearest(pixels[lo:hi], centers)

    parallel.map_chunks(run, pixels.shape[0], workers)
    return out


def kmeans_classify(raster: MultibandRaster, cfg: KMeansConfig,
                    workers: int | None = None) -> tuple[ClassRaster, np.ndarray, list[float]]:
    """Lloyd iteration with deterministic range-spread initialization.

    Returns the class map (ids 1..k ordered by ascending first-band centroid
    value at termination), the centroid matrix in id order, and the SSE
    recorded after each iteration's centroid update.

    Centroid j starts at min + (j + 0.5) * range / k per band. The loop
    stops when the fraction of pixels changing cluster drops to the
    configured threshold or the iteration cap is hit. A cluster that empties
    is re-seeded at the pixel farthest from its current centroid (ties to
    the lowest pixel index).
    """
    workers = parallel.worker_count(workers)
    impl = kernels.get()
    pixels = raster.pixel_matrix()
    n, nb = pixels.shape
    k = cfg.k
    if np.unique(pixels, axis=0).shape[0] < k:
        raise DegenerateInput(f"found fewer than k={k} distinct pixel vectors")

    mins = pixels.min(axis=0)
    spans = pixels.max(axis=0) - mins
    centers = np.ascontiguousarray(
        [mins + (j + 0.5) * spans / k for j in range(k)], dtype=np.float64)

    labels = np.full(n, -1, dtype=np.int32)
    sse_trace: list[float] = []
    for _ in range(cfg.max_iterations):
        new_labels = _assign_chunked(pixels, centers, workers)
        reseeds = 0
        while reseeds < k:
            counts = np.bincount(new_labels, minlength=k)
            empty = np.flatnonzero(counts == 0)
            if empty.size == 0:
                break
            j = int(empty[0])
            diff = pixels - centers[j]
            centers[j] = pixels[int(np.argmax((diff * diff).sum(axis=1)))]
            new_labels = _assign_chunked(pixels, centers, workers)
            reseeds += 1

        changed = float(np.count_nonzero(new_labels != labels)) / n
        labels = new_labels

        partials = parallel.map_chunks(
            lambda lo, hi: impl.accumulate_clusters(pixels[lo:hi], labels[lo:hi], k),
            n, workers)
        sums = np.zeros((k, nb), dtype=np.float64)
        counts = np.zeros(k, dtype=np.int64)
        for part_sums, part_counts in partials:
            sums += part_sums
            counts += part_counts
        occupied = counts > 0
        centers[occupied] = sums[occupied] / counts[occupied, None]

        sse_parts = parallel.map_chunks(
            lambda lo, hi: impl.sse_to_assigned(pixels[lo:hi], centers, labels[lo:hi]),
            n, workers)
        sse_trace.append(float(sum(sse_parts)))

        if changed <= cfg.change_threshold:
            break

    order = np.argsort(centers[:, 0], kind="stable")
    rank = np.empty(k, dtype=np.int64)
    rank[order] = np.arange(k)
    ids = (rank[labels] + 1).astype(np.uint8)
    return (ClassRaster(ids.reshape(raster.rows, raster.cols)),
            np.ascontiguousarray(centers[order]), sse_trace)


def _finish(labels_idx: np.ndarray, class_ids: list[int],
            shape: tuple[int, int]) -> ClassRaster:
    lut = np.array(class_ids, dtype=np.uint8)
    return ClassRaster(lut[labels_idx].reshape(shape))


def min_distance_classify(raster: MultibandRaster, stats: ClassStats,
                          workers: int | None = None) -> ClassRaster:
    """Nearest class mean by Euclidean distance."""
    workers = parallel.worker_count(workers)
    class_ids = stats.class_ids()
    if not class_ids:
        raise ValidationError("stats hold no classes")
    means = stats.means_matrix()
    labels = _assign_chunked(raster.pixel_matrix(), means, workers)
    return _finish(labels, class_ids, (raster.rows, raster.cols))


def _inverse_spd(matrix: np.ndarray, ridge: float,
                 class_id: int | None) -> tuple[np.ndarray, float]:
    """Inverse and log-determinant via Cholesky; ridge regularizes on request."""
    work = matrix if ridge == 0.0 else matrix + ridge * np.eye(matrix.shape[0])
    try:
        chol = np.linalg.cholesky(work)
    except np.linalg.LinAlgError:
        raise SingularCovariance(class_id) from None
    inverse = np.linalg.inv(work)
    inverse = (inverse + inverse.T) / 2.0
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    return np.ascontiguousarray(inverse), logdet


def _argmin_quadratic_chunked(pixels: np.ndarray, means: np.ndarray,
                              inv_mats: np.ndarray, offsets: np.ndarray,
                              workers: int) -> np.ndarray:
    impl = kernels.get()
    out = np.empty(pixels.shape[0], dtype=np.int32)

    def run(lo: int, hi: int) -> None:
        out[lo:hi] = impl.argmin_quadratic(pixels[lo:hi], means, inv_mats, offsets)

    parallel.map_chunks(run, pixels.shape[0], workers)
    return out


def mahalanobis_classify(raster: MultibandRaster, stats: ClassStats,
                         ridge: float = 0.0,
                         workers: int | None = None) -> ClassRaster:
    """Nearest class mean under the pooled-covariance Mahalanobis metric."""
    workers = parallel.worker_count(workers)
    class_ids = stats.class_ids()
    if not class_ids:
        raise ValidationError("stats hold no classes")
    nb = stats.bands()
    for cid in class_ids:
        if stats.summary(cid).count < nb + 1:
            raise InsufficientSamples(cid, needed=nb + 1)
    inverse, _ = _inverse_spd(pooled_covariance(stats), ridge, None)
    means = stats.means_matrix()
    inv_mats = np.ascontiguousarray(np.broadcast_to(inverse, (len(class_ids), nb, nb)))
    offsets = np.zeros(len(class_ids))
    labels = _argmin_quadratic_chunked(raster.pixel_matrix(), means, inv_mats, offsets, workers)
    return _finish(labels, class_ids, (raster.rows, raster.cols))


def _validated_priors(class_ids: list[int],
                      priors: dict[int, float] | None) -> np.ndarray:
    if priors is None:
        return np.full(len(class_ids), 1.0 / len(class_ids))
    if set(priors) != set(class_ids):
        raise InvalidPriors(f"priors must cover exactly the classes {class_ids}")
    vec = np.array([priors[c] for c in class_ids], dtype=np.float64)
    if (vec <= 0).any():
        raise InvalidPriors("priors must be strictly positive")
    if abs(float(vec.sum()) - 1.0) > 1e-9:
        raise InvalidPriors(f"priors sum to {vec.sum()!r}, expected 1")
    return vec


def max_likelihood_classify(raster: MultibandRaster, stats: ClassStats,
                            priors: dict[int, float] | None = None,
                            ridge: float = 0.0,
                            workers: int | None = None) -> ClassRaster:
    """Gaussian maximum-likelihood rule with per-class covariances.

    Discriminant per class: ln p - 0.5 ln|S| - 0.5 (x-m)' S^-1 (x-m),
    maximized; implemented as the equivalent quadratic-score minimization.
    """
    workers = parallel.worker_count(workers)
    class_ids = stats.class_ids()
    if not class_ids:
        raise ValidationError("stats hold no classes")
    nb = stats.bands()
    prior_vec = _validated_priors(class_ids, priors)

    inv_mats = np.empty((len(class_ids), nb, nb), dtype=np.float64)
    offsets = np.empty(len(class_ids), dtype=np.float64)
    for idx, cid in enumerate(class_ids):
        s = stats.summary(cid)
        if s.count < nb + 1 or s.covariance is None:
            raise InsufficientSamples(cid, needed=nb + 1)
        inv_mats[idx], logdet = _inverse_spd(s.covariance, ridge, cid)
        offsets[idx] = logdet - 2.0 * float(np.log(prior_vec[idx]))
    labels = _argmin_quadratic_chunked(raster.pixel_matrix(), stats.means_matrix(),
                                       np.ascontiguousarray(inv_mats), offsets, workers)
    return _finish(labels, class_ids, (raster.rows, raster.cols))


def parallelepiped_classify(raster: MultibandRaster, stats: ClassStats,
                            cfg: ParallelepipedConfig | None = None,
                            workers: int | None = None) -> ClassRaster:
    """Per-band box test; pixels outside every box stay unclassified (0)."""
    cfg = cfg or ParallelepipedConfig()
    workers = parallel.worker_count(workers)
    impl = kernels.get()
    class_ids = stats.class_ids()
    if not class_ids:
        raise ValidationError("stats hold no classes")
    lows = []
    highs = []
    for cid in class_ids:
        s = stats.summary(cid)
        if s.count < 2 or s.covariance is None:
            raise InsufficientSamples(cid, needed=2)
        sigma = np.sqrt(np.diag(s.covariance))
        lows.append(s.mean - cfg.stddev_multiplier * sigma)
        highs.append(s.mean + cfg.stddev_multiplier * sigma)
    lows = np.ascontiguousarray(lows)
    highs = np.ascontiguousarray(highs)

    pixels = raster.pixel_matrix()
    box_idx = np.empty(pixels.shape[0], dtype=np.int32)

    def run(lo: int, hi: int) -> None:
        box_idx[lo:hi] = impl.box_classify(pixels[lo:hi], lows, highs)

    parallel.map_chunks(run, pixels.shape[0], workers)
    lut = np.concatenate([[0], np.array(class_ids)]).astype(np.uint8)
    return ClassRaster(lut[box_idx + 1].reshape(raster.rows, raster.cols))


def cluster_to_class(cr: ClassRaster, mapping: dict[int, int]) -> ClassRaster:
    """Remap cluster ids to land-cover class ids; 0 stays unclassified."""
    for target in mapping.values():
        if not 1 <= target <= 255:
            raise ValidationError(f"mapping target {target} outside 1..255")
    lut = np.zeros(256, dtype=np.uint8)
    for cluster_id, class_id in mapping.items():
        if not 1 <= cluster_id <= 255:
            raise ValidationError(f"mapping source {cluster_id} outside 1..255")
        lut[cluster_id] = class_id
    for present in cr.class_ids():
        if present not in mapping:
            raise UnmappedCluster(present)
    return ClassRaster(lut[cr.values])


def load_priors(path: str | Path) -> dict[int, float]:
    """Read a ``class_id,prior`` CSV."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise RasterIOError(f"cannot read priors {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["class_id", "prior"]:
        raise InvalidPriors("priors CSV must start with header 'class_id,prior'")
    priors: dict[int, float] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            cid, p = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise InvalidPriors(f"priors line {line_no}: expected 'int,float'") from None
        if cid in priors:
            raise InvalidPriors(f"priors line {line_no}: duplicate class {cid}")
        priors[cid] = p
    return priors
