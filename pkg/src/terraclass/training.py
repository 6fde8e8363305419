"""ROI ingestion and per-class spectral statistics.

Statistics use the two-pass sample estimator (divisor n-1). Covariances are
flagged unusable until a class has enough samples: 2 for per-band spreads,
bands+1 for the quadratic-form classifiers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DuplicatePixel,
    EmptyRoi,
    InsufficientSamples,
    OutOfBounds,
    RasterIOError,
    ValidationError,
)
from .raster import MultibandRaster

ROI_HEADER = ["class", "row", "col"]


@dataclass(frozen=True)
class RoiSet:
    """Labeled pixels: (class_id, row, col) triples plus the target bounds."""

    entries: tuple[tuple[int, int, int], ...]
    bounds: tuple[int, int]

    def __post_init__(self):
        rows, cols = self.bounds
        if not self.entries:
            raise EmptyRoi()
        seen: set[tuple[int, int]] = set()
        for class_id, row, col in self.entries:
            if not 1 <= class_id <= 255:
                raise ValidationError(f"ROI class id {class_id} outside 1..255")
            if not (0 <= row < rows and 0 <= col < cols):
                raise OutOfBounds(row, col)
            if (row, col) in seen:
                raise DuplicatePixel(row, col)
            seen.add((row, col))

    def class_ids(self) -> list[int]:
        return sorted({class_id for class_id, _, _ in self.entries})

    def pixels_of(self, class_id: int) -> list[tuple[int, int]]:
        return [(r, c) for cid, r, c in self.entries if cid == class_id]


def load_roi(path: str | Path, rows: int, cols: int) -> RoiSet:
    """Read a ``class,row,col`` CSV of labeled pixels."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            raw = list(reader)
    except OSError as exc:
        raise RasterIOError(f"cannot read ROI {path}: {exc}") from exc
    if not raw or [cell.strip() for cell in raw[0]] != ROI_HEADER:
        raise ValidationError(f"ROI must start with header {','.join(ROI_HEADER)!r}")
    entries = []
    for line_no, row in enumerate(raw[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValidationError(f"ROI line {line_no}: expected 3 fields, got {len(row)}")
        try:
            entries.append((int(row[0]), int(row[1]), int(row[2])))
        except ValueError:
            raise ValidationError(f"ROI line {line_no}: non-integer field") from None
    return RoiSet(tuple(entries), (rows, cols))


@dataclass(frozen=True)
class ClassSummary:
    count: int
    mean: np.ndarray           # (bands,)
    covariance: np.ndarray | None  # (bands, bands) sample covariance, None when count < 2


@dataclass(frozen=True)
class ClassStats:
    """Per-class sample statistics, ordered by ascending class id."""

    classes: dict[int, ClassSummary]

    def class_ids(self) -> list[int]:
        return sorted(self.classes)

    def bands(self) -> int:
        first = next(iter(self.classes.values()))
        return int(first.mean.shape[0])

    def summary(self, class_id: int) -> ClassSummary:
        return self.classes[class_id]

    def covariance_ready(self, class_id: int) -> bool:
        """True once the class supports quadratic-form classifiers (n >= bands+1)."""
        s = self.classes[class_id]
        return s.count >= self.bands() + 1 and s.covariance is not None

    def means_matrix(self) -> np.ndarray:
        return np.ascontiguousarray([self.classes[c].mean for c in self.class_ids()])


def compute_class_stats(raster: MultibandRaster, roi: RoiSet) -> ClassStats:
    """Two-pass mean/covariance per ROI class."""
    if roi.bounds != (raster.rows, raster.cols):
        raise ValidationError(f"ROI bounds {roi.bounds} differ from raster {(raster.rows, raster.cols)}")
    classes: dict[int, ClassSummary] = {}
    for class_id in roi.class_ids():
        coords = roi.pixels_of(class_id)
        samples = np.array([raster.values[:, r, c] for r, c in coords], dtype=np.float64)
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        if n >= 2:
            centered = samples - mean
            cov = centered.T @ centered / (n - 1)
            cov = (cov + cov.T) / 2.0
        else:
            cov = None
        classes[class_id] = ClassSummary(n, mean, cov)
    return ClassStats(classes)


def pooled_covariance(stats: ClassStats) -> np.ndarray:
    """Weighted average of class covariances, weights n_c - 1."""
    scatter = None
    weight = 0
    for class_id in stats.class_ids():
        s = stats.summary(class_id)
        if s.count < 2 or s.covariance is None:
            raise InsufficientSamples(class_id, needed=2)
        term = (s.count - 1) * s.covariance
        scatter = term if scatter is None else scatter + term
        weight += s.count - 1
    pooled = scatter / weight
    return (pooled + pooled.T) / 2.0


def write_stats_csv(stats: ClassStats, path: str | Path) -> None:
    """Dump per-class means and covariance rows for inspection."""
    nb = stats.bands()
    with Path(path).open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class_id", "count", "kind", "row"] + [f"b{i}" for i in range(nb)])
        for class_id in stats.class_ids():
            s = stats.summary(class_id)
            writer.writerow([class_id, s.count, "mean", ""] + [repr(float(v)) for v in s.mean])
            if s.covariance is not None:
                for i in range(nb):
                    writer.writerow([class_id, s.count, "cov", i]
                                    + [repr(float(v)) for v in s.covariance[i]])
