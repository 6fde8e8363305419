"""NumPy fallback implementations of the hot kernels.

Accumulation over the band axis uses elementwise products followed by
``.sum(axis=-1)``; for the small band counts of multispectral scenes NumPy
reduces such axes in plain left-to-right order, which keeps scores
bit-identical to the compiled backend's explicit loops.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

# rows per scoring block; bounds temporary memory, has no effect on results
_BLOCK = 1 << 15


def assign_nearest(pixels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the nearest center (squared Euclidean) per pixel.

    Ties resolve to the lowest center index.
    """
    n = pixels.shape[0]
    k = centers.shape[0]
    out = np.empty(n, dtype=np.int32)
    step = max(1, _BLOCK // max(1, k))
    for lo in range(0, n, step):
        block = pixels[lo:lo + step]
        diff = block[:, None, :] - centers[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        out[lo:lo + step] = np.argmin(d2, axis=1).astype(np.int32)
    return out


def accumulate_clusters(pixels: np.ndarray, labels: np.ndarray, k: int):
    """Per-cluster coordinate sums and member counts.

    np.bincount adds weights in pixel order, matching a sequential loop.
    """
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.empty((k, pixels.shape[1]), dtype=np.float64)
    for b in range(pixels.shape[1]):
        sums[:, b] = np.bincount(labels, weights=pixels[:, b], minlength=k)
    return sums, counts


def sse_to_assigned(pixels: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    diff = pixels - centers[labels]
    return float((diff * diff).sum())


def argmin_quadratic(pixels: np.ndarray, means: np.ndarray, inv_mats: np.ndarray,
                     offsets: np.ndarray) -> np.ndarray:
    """Per pixel, the index minimizing (x-m)' A (x-m) + offset.

    Ties resolve to the lowest index.
    """
    n = pixels.shape[0]
    k = means.shape[0]
    out = np.empty(n, dtype=np.int32)
    step = max(1, _BLOCK // max(1, k))
    for lo in range(0, n, step):
        block = pixels[lo:lo + step]
        scores = np.empty((block.shape[0], k), dtype=np.float64)
        for j in range(k):
            d = block - means[j]
            # t[p, i] = sum_l A[i, l] * d[p, l]
            t = (inv_mats[j][None, :, :] * d[:, None, :]).sum(axis=2)
            scores[:, j] = (d * t).sum(axis=1) + offsets[j]
        out[lo:lo + step] = np.argmin(scores, axis=1).astype(np.int32)
    return out


def box_classify(pixels: np.ndarray, lows: np.ndarray, highs: np.ndarray) -> np.ndarray:
    """First box (lowest index) containing the pixel in every band; -1 if none."""
    n = pixels.shape[0]
    out = np.full(n, -1, dtype=np.int32)
    for j in range(lows.shape[0] - 1, -1, -1):
        inside = ((pixels >= lows[j]) & (pixels <= highs[j])).all(axis=1)
        out[inside] = j
    return out


def majority_filter(values: np.ndarray, window: int) -> np.ndarray:
    """Modal value in the clipped window around each cell.

    When several values tie for the maximum count the center keeps its
    original value. Processed in row bands to bound temporary memory.
    """
    rows, cols = values.shape
    half = window // 2
    present = np.unique(values)
    out = np.empty_like(values)
    padded = np.full((rows + 2 * half, cols + 2 * half), -1, dtype=np.int16)
    padded[half:half + rows, half:half + cols] = values

    band = max(1, (1 << 22) // (max(1, cols) * window * window))
    for lo in range(0, rows, band):
        hi = min(rows, lo + band)
        view = sliding_window_view(padded[lo:hi + 2 * half], (window, window))
        counts = np.empty((len(present), hi - lo, cols), dtype=np.int32)
        for i, v in enumerate(present):
            counts[i] = (view == v).sum(axis=(2, 3))
        best = counts.max(axis=0)
        tied = (counts == best).sum(axis=0) > 1
        modal = present[np.argmax(counts, axis=0)].astype(values.dtype)
        out[lo:hi] = np.where(tied, values[lo:hi], modal)
    return out


_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int8)
_STRUCT8 = np.ones((3, 3), dtype=np.int8)


def label_components(values: np.ndarray, connectivity: int) -> np.ndarray:
    """Raw connected-component labels over equal-value regions.

    Labels are positive and unique per component but in no particular order;
    callers canonicalize to row-major first-pixel order.
    """
    structure = _STRUCT4 if connectivity == 4 else _STRUCT8
    out = np.zeros(values.shape, dtype=np.int32)
    offset = 0
    for v in np.unique(values):
        mask = values == v
        labeled, n = ndimage.label(mask, structure=structure)
        out[mask] = labeled[mask] + offset
        offset += n
    return out
