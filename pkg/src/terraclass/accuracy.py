"""Error matrix construction and agreement statistics.

Convention, stated in every output header: rows are predicted classes,
columns are reference classes. Reference pixels predicted as 0 occupy a
dedicated "unclassified" row (id 0) so the sample total is never silently
reduced. Counts stay integers end to end; the statistics divide exact
integer sums, which keeps them reproducible to the last ulp.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateChance, EmptyMatrix, OutOfBounds
from .raster import ClassRaster
from .training import RoiSet


@dataclass(frozen=True)
class ConfusionMatrix:
    class_ids: tuple[int, ...]   # ascending; may include 0 for unclassified predictions
    counts: np.ndarray           # (m, m) int64, rows predicted, cols reference

    def __post_init__(self):
        m = len(self.class_ids)
        if self.counts.shape != (m, m):
            raise ValueError(f"counts shape {self.counts.shape} != ({m}, {m})")
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index_of(self, class_id: int) -> int:
        return self.class_ids.index(class_id)


def build_confusion(predicted: ClassRaster, reference: RoiSet) -> ConfusionMatrix:
    """Tally predicted-vs-reference labels over the reference pixels."""
    rows, cols = predicted.rows, predicted.cols
    pairs = []
    for class_id, r, c in reference.entries:
        if not (0 <= r < rows and 0 <= c < cols):
            raise OutOfBounds(r, c)
        pairs.append((int(predicted.values[r, c]), class_id))
    ids = sorted({p for p, _ in pairs} | {q for _, q in pairs})
    index = {cid: i for i, cid in enumerate(ids)}
    counts = np.zeros((len(ids), len(ids)), dtype=np.int64)
    for pred, ref in pairs:
        counts[index[pred], index[ref]] += 1
    return ConfusionMatrix(tuple(ids), counts)


def overall_accuracy(cm: ConfusionMatrix) -> float:
    """Diagonal fraction of all reference samples."""
    if cm.total == 0:
        raise EmptyMatrix()
    return int(np.trace(cm.counts)) / cm.total


def kappa(cm: ConfusionMatrix) -> float:
    """Chance-corrected agreement, computed from exact integer marginals."""
    n = cm.total
    if n == 0:
        raise EmptyMatrix()
    diag = int(np.trace(cm.counts))
    row_sums = cm.counts.sum(axis=1)
    col_sums = cm.counts.sum(axis=0)
    marg = int((row_sums * col_sums).sum())
    denominator = n * n - marg
    if denominator == 0:
        raise DegenerateChance()
    return (n * diag - marg) / denominator


def per_class_accuracy(cm: ConfusionMatrix) -> dict[int, tuple[float | None, float | None]]:
    """Producer's (column-wise) and user's (row-wise) accuracy per class.

    A zero marginal makes the corresponding rate undefined; it is reported
    as None, never as 0. The synthetic unclassified row (id 0) is skipped.
    """
    if cm.total == 0:
        raise EmptyMatrix()
    row_sums = cm.counts.sum(axis=1)
    col_sums = cm.counts.sum(axis=0)
    out: dict[int, tuple[float | None, float | None]] = {}
    for i, cid in enumerate(cm.class_ids):
        if cid == 0:
            continue
        diag = int(cm.counts[i, i])
        producer = diag / int(col_sums[i]) if col_sums[i] else None
        user = diag / int(row_sums[i]) if row_sums[i] else None
        out[cid] = (producer, user)
    return out


def write_report(cm: ConfusionMatrix, path: str | Path) -> None:
    """Sectioned CSV: MATRIX, OVERALL, PER_CLASS. Reals at full precision."""
    acc = overall_accuracy(cm)
    try:
        kap: float | None = kappa(cm)
    except DegenerateChance:
        kap = None
    per_class = per_class_accuracy(cm)
    with Path(path).open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["MATRIX"])
        writer.writerow(["predicted\\reference"] + [str(c) for c in cm.class_ids])
        for i, cid in enumerate(cm.class_ids):
            writer.writerow([cid] + [int(v) for v in cm.counts[i]])
        writer.writerow(["OVERALL"])
        writer.writerow(["overall_accuracy", repr(acc)])
        writer.writerow(["kappa", "" if kap is None else repr(kap)])
        writer.writerow(["n", cm.total])
        writer.writerow(["PER_CLASS"])
        writer.writerow(["class_id", "producer", "user"])
        for cid in sorted(per_class):
            producer, user = per_class[cid]
            writer.writerow([cid,
                             "" if producer is None else repr(producer),
                             "" if user is None else repr(user)])


def format_summary(cm: ConfusionMatrix) -> str:
    """Four-decimal display block for the terminal."""
    acc = overall_accuracy(cm)
    try:
        kap = f"{kappa(cm):.4f}"
    except DegenerateChance:
        kap = "undefined"
    lines = [f"overall accuracy: {acc:.4f}", f"kappa: {kap}", f"samples: {cm.total}"]
    for cid, (producer, user) in sorted(per_class_accuracy(cm).items()):
        ptxt = "n/a" if producer is None else f"{producer:.4f}"
        utxt = "n/a" if user is None else f"{user:.4f}"
        lines.append(f"class {cid}: producer {ptxt}, user {utxt}")
    return "\n".join(lines)
