# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot per-pixel kernels.

Float accumulations run left-to-right over the band axis, mirroring the
NumPy fallback so both backends emit identical labels.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def assign_nearest(const double[:, ::1] pixels, const double[:, ::1] centers):
    cdef Py_ssize_t n = pixels.shape[0]
    cdef Py_ssize_t nb = pixels.shape[1]
    cdef Py_ssize_t k = centers.shape[0]
    out_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t i, j, b
    cdef double best, d2, diff
    cdef int best_j
    with nogil:
        for i in range(n):
            best = 0.0
            best_j = 0
            for j in range(k):
                d2 = 0.0
                for b in range(nb):
                    diff = pixels[i, b] - centers[j, b]
                    d2 += diff * diff
                if j == 0 or d2 < best:
                    best = d2
                    best_j = <int>j
            out[i] = best_j
    return out_arr


def accumulate_clusters(const double[:, ::1] pixels, const int[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t n = pixels.shape[0]
    cdef Py_ssize_t nb = pixels.shape[1]
    sums_arr = np.zeros((k, nb), dtype=np.float64)
    counts_arr = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] sums = sums_arr
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t i, b
    cdef int lab
    with nogil:
        for i in range(n):
            lab = labels[i]
            counts[lab] += 1
            for b in range(nb):
                sums[lab, b] += pixels[i, b]
    return sums_arr, counts_arr


def sse_to_assigned(const double[:, ::1] pixels, const double[:, ::1] centers,
                    const int[::1] labels):
    cdef Py_ssize_t n = pixels.shape[0]
    cdef Py_ssize_t nb = pixels.shape[1]
    cdef double total = 0.0, diff
    cdef Py_ssize_t i, b
    cdef int lab
    with nogil:
        for i in range(n):
            lab = labels[i]
            for b in range(nb):
                diff = pixels[i, b] - centers[lab, b]
                total += diff * diff
    return total


def argmin_quadratic(const double[:, ::1] pixels, const double[:, ::1] means,
                     const double[:, :, ::1] inv_mats, const double[::1] offsets):
    cdef Py_ssize_t n = pixels.shape[0]
    cdef Py_ssize_t nb = pixels.shape[1]
    cdef Py_ssize_t k = means.shape[0]
    out_arr = np.empty(n, dtype=np.int32)
    cdef int[::1] out = out_arr
    # scratch for the centered pixel and the A @ d products
    d_arr = np.empty(nb, dtype=np.float64)
    t_arr = np.empty(nb, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] t = t_arr
    cdef Py_ssize_t i, j, a, b
    cdef double score, best, acc
    cdef int best_j
    with nogil:
        for i in range(n):
            best = 0.0
            best_j = 0
            for j in range(k):
                for b in range(nb):
                    d[b] = pixels[i, b] - means[j, b]
                for a in range(nb):
                    acc = 0.0
                    for b in range(nb):
                        acc += inv_mats[j, a, b] * d[b]
                    t[a] = acc
                score = 0.0
                for a in range(nb):
                    score += d[a] * t[a]
                score += offsets[j]
                if j == 0 or score < best:
                    best = score
                    best_j = <int>j
            out[i] = best_j
    return out_arr


def box_classify(const double[:, ::1] pixels, const double[:, ::1] lows,
                 const double[:, ::1] highs):
    cdef Py_ssize_t n = pixels.shape[0]
    cdef Py_ssize_t nb = pixels.shape[1]
    cdef Py_ssize_t k = lows.shape[0]
    out_arr = np.full(n, -1, dtype=np.int32)
    cdef int[::1] out = out_arr
    cdef Py_ssize_t i, j, b
    cdef bint inside
    with nogil:
        for i in range(n):
            for j in range(k):
                inside = True
                for b in range(nb):
                    if pixels[i, b] < lows[j, b] or pixels[i, b] > highs[j, b]:
                        inside = False
                        break
                if inside:
                    out[i] = <int>j
                    break
    return out_arr


def majority_filter(const unsigned char[:, ::1] values, int window):
    cdef Py_ssize_t rows = values.shape[0]
    cdef Py_ssize_t cols = values.shape[1]
    cdef int half = window // 2
    out_arr = np.empty((rows, cols), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef int counts[256]
    cdef Py_ssize_t r, c, rr, cc, r0, r1, c0, c1
    cdef int v, best, nbest
    cdef int best_v
    with nogil:
        for r in range(rows):
            for c in range(cols):
                for v in range(256):
                    counts[v] = 0
                r0 = r - half if r - half > 0 else 0
                r1 = r + half if r + half < rows - 1 else rows - 1
                c0 = c - half if c - half > 0 else 0
                c1 = c + half if c + half < cols - 1 else cols - 1
                for rr in range(r0, r1 + 1):
                    for cc in range(c0, c1 + 1):
                        counts[values[rr, cc]] += 1
                best = -1
                best_v = 0
                nbest = 0
                for v in range(256):
                    if counts[v] > best:
                        best = counts[v]
                        best_v = v
                        nbest = 1
                    elif counts[v] == best:
                        nbest += 1
                if nbest > 1:
                    out[r, c] = values[r, c]
                else:
                    out[r, c] = <unsigned char>best_v
    return out_arr


cdef inline int _find(int* parent, int x) nogil:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef inline void _union(int* parent, int a, int b) nogil:
    cdef int ra = _find(parent, a)
    cdef int rb = _find(parent, b)
    if ra < rb:
        parent[rb] = ra
    elif rb < ra:
        parent[ra] = rb


def label_components(const unsigned char[:, ::1] values, int connectivity):
    """Two-pass union-find labeling of equal-value components.

    Raw labels only; callers canonicalize to row-major first-pixel order.
    """
    cdef Py_ssize_t rows = values.shape[0]
    cdef Py_ssize_t cols = values.shape[1]
    out_arr = np.zeros((rows, cols), dtype=np.int32)
    cdef int[:, ::1] lab = out_arr
    parent_arr = np.zeros(rows * cols + 1, dtype=np.int32)
    cdef int[::1] parent_mv = parent_arr
    cdef int* parent = &parent_mv[0]
    cdef Py_ssize_t r, c
    cdef int nxt = 0
    cdef int cur, v
    cdef bint eight = connectivity == 8
    with nogil:
        for r in range(rows):
            for c in range(cols):
                v = values[r, c]
                cur = 0
                if c > 0 and values[r, c - 1] == v:
                    cur = lab[r, c - 1]
                if r > 0:
                    if values[r - 1, c] == v:
                        if cur == 0:
                            cur = lab[r - 1, c]
                        else:
                            _union(parent, cur, lab[r - 1, c])
                    if eight:
                        if c > 0 and values[r - 1, c - 1] == v:
                            if cur == 0:
                                cur = lab[r - 1, c - 1]
                            else:
                                _union(parent, cur, lab[r - 1, c - 1])
                        if c < cols - 1 and values[r - 1, c + 1] == v:
                            if cur == 0:
                                cur = lab[r - 1, c + 1]
                            else:
                                _union(parent, cur, lab[r - 1, c + 1])
                if cur == 0:
                    nxt += 1
                    parent[nxt] = nxt
                    cur = nxt
                lab[r, c] = cur
        for r in range(rows):
            for c in range(cols):
                lab[r, c] = _find(parent, lab[r, c])
    return out_arr
