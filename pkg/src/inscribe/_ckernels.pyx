# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


def window_sums_integral(const i64[:, ::1] sum_table, const i64[:, ::1] sq_table, Py_ssize_t r):
    cdef Py_ssize_t H = sum_table.shape[0] - 1
    cdef Py_ssize_t W = sum_table.shape[1] - 1
    S_arr = np.empty((H, W), dtype=np.int64)
    SS_arr = np.empty((H, W), dtype=np.int64)
    N_arr = np.empty((H, W), dtype=np.int64)
    cdef i64[:, ::1] S = S_arr
    cdef i64[:, ::1] SS = SS_arr
    cdef i64[:, ::1] N = N_arr
    cdef Py_ssize_t i, j, y0, y1, x0, x1
    with nogil:
        for i in range(H):
            y0 = i - r
            if y0 < 0:
                y0 = 0
            y1 = i + r + 1
            if y1 > H:
                y1 = H
            for j in range(W):
                x0 = j - r
                if x0 < 0:
                    x0 = 0
                x1 = j + r + 1
                if x1 > W:
                    x1 = W
                S[i, j] = sum_table[y1, x1] - sum_table[y0, x1] - sum_table[y1, x0] + sum_table[y0, x0]
                SS[i, j] = sq_table[y1, x1] - sq_table[y0, x1] - sq_table[y1, x0] + sq_table[y0, x0]
                N[i, j] = (y1 - y0) * (x1 - x0)
    return S_arr, SS_arr, N_arr


def window_sums_naive(const u8[:, ::1] img, Py_ssize_t r):
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    S_arr = np.empty((H, W), dtype=np.int64)
    SS_arr = np.empty((H, W), dtype=np.int64)
    N_arr = np.empty((H, W), dtype=np.int64)
    cdef i64[:, ::1] S = S_arr
    cdef i64[:, ::1] SS = SS_arr
    cdef i64[:, ::1] N = N_arr
    cdef Py_ssize_t i, j, y, x, y0, y1, x0, x1
    cdef i64 s, ss, v
    with nogil:
        for i in range(H):
            y0 = i - r
            if y0 < 0:
                y0 = 0
            y1 = i + r + 1
            if y1 > H:
                y1 = H
            for j in range(W):
                x0 = j - r
                if x0 < 0:
                    x0 = 0
                x1 = j + r + 1
                if x1 > W:
                    x1 = W
                s = 0
                ss = 0
                for y in range(y0, y1):
                    for x in range(x0, x1):
                        v = img[y, x]
                        s += v
                        ss += v * v
                S[i, j] = s
                SS[i, j] = ss
                N[i, j] = (y1 - y0) * (x1 - x0)
    return S_arr, SS_arr, N_arr


cdef void _combine(const u8[:, ::1] img, u8[:, ::1] out, Py_ssize_t dy, Py_ssize_t dx, bint conj) noexcept nogil:
    # out[i, j] (&= or |=) img[i + dy, j + dx], with zeros outside the image
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    cdef Py_ssize_t i, j, y
    cdef Py_ssize_t j0 = -dx if dx < 0 else 0
    cdef Py_ssize_t j1 = W - dx if dx > 0 else W
    for i in range(H):
        y = i + dy
        if y < 0 or y >= H or j0 >= j1:
            if conj:
                for j in range(W):
                    out[i, j] = 0
            continue
        if conj:
            for j in range(j0):
                out[i, j] = 0
            for j in range(j0, j1):
                out[i, j] &= img[y, j + dx]
            for j in range(j1, W):
                out[i, j] = 0
        else:
            for j in range(j0, j1):
                out[i, j] |= img[y, j + dx]


def erode(const u8[:, ::1] img, const i64[:, ::1] offsets):
    out_arr = np.ones((img.shape[0], img.shape[1]), dtype=np.uint8)
    cdef u8[:, ::1] out = out_arr
    cdef Py_ssize_t k
    with nogil:
        for k in range(offsets.shape[0]):
            _combine(img, out, offsets[k, 0], offsets[k, 1], True)
    return out_arr


def dilate(const u8[:, ::1] img, const i64[:, ::1] offsets):
    out_arr = np.zeros((img.shape[0], img.shape[1]), dtype=np.uint8)
    cdef u8[:, ::1] out = out_arr
    cdef Py_ssize_t k
    with nogil:
        for k in range(offsets.shape[0]):
            _combine(img, out, -offsets[k, 0], -offsets[k, 1], False)
    return out_arr


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t a) noexcept nogil:
    cdef Py_ssize_t root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        a, parent[a] = parent[a], root
    return root


cdef inline void _union(Py_ssize_t[::1] parent, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label(const u8[:, ::1] img, int connectivity):
    """Two-pass union-find labeling; labels numbered by raster first encounter."""
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    labels_arr = np.zeros((H, W), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] lab = labels_arr
    parent_arr = np.zeros(H * W // 2 + 2, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    remap_arr = np.zeros(H * W // 2 + 2, dtype=np.int32)
    cdef cnp.int32_t[::1] remap = remap_arr
    cdef Py_ssize_t i, j, cur, nb, next_label = 1
    cdef bint eight = connectivity == 8
    cdef cnp.int32_t count = 0
    with nogil:
        for i in range(H):
            for j in range(W):
                if img[i, j] == 0:
                    continue
                cur = 0
                # earlier neighbours in raster order
                if j > 0 and lab[i, j - 1]:
                    cur = lab[i, j - 1]
                if i > 0:
                    nb = lab[i - 1, j]
                    if nb:
                        if cur:
                            _union(parent, cur, nb)
                        else:
                            cur = nb
                    if eight:
                        if j > 0:
                            nb = lab[i - 1, j - 1]
                            if nb:
                                if cur:
                                    _union(parent, cur, nb)
                                else:
                                    cur = nb
                        if j + 1 < W:
                            nb = lab[i - 1, j + 1]
                            if nb:
                                if cur:
                                    _union(parent, cur, nb)
                                else:
                                    cur = nb
                if cur == 0:
                    cur = next_label
                    parent[cur] = cur
                    next_label += 1
                lab[i, j] = <cnp.int32_t>cur
        for i in range(H):
            for j in range(W):
                if lab[i, j]:
                    cur = _find(parent, lab[i, j])
                    if remap[cur] == 0:
                        count += 1
                        remap[cur] = count
                    lab[i, j] = remap[cur]
    return labels_arr, int(count)
