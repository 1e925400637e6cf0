"""Pure numpy/Python versions of the compiled kernels.

Every function here returns arrays identical to its counterpart in
``_ckernels``; the test-suite runs both against each other.
"""

from __future__ import annotations

import numpy as np


def _clamped_bounds(length: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(length)
    return np.maximum(idx - r, 0), np.minimum(idx + r + 1, length)


def window_sums_integral(sum_table: np.ndarray, sq_table: np.ndarray, r: int):
    H, W = sum_table.shape[0] - 1, sum_table.shape[1] - 1
    y0, y1 = _clamped_bounds(H, r)
    x0, x1 = _clamped_bounds(W, r)

    def rect(table):
        return (table[np.ix_(y1, x1)] - table[np.ix_(y0, x1)]
                - table[np.ix_(y1, x0)] + table[np.ix_(y0, x0)])

    n = np.outer(y1 - y0, x1 - x0).astype(np.int64)
    return rect(sum_table), rect(sq_table), n


def window_sums_naive(img: np.ndarray, r: int):
    # O(w^2) per pixel: one shifted accumulation per window offset
    H, W = img.shape
    v = img.astype(np.int64)
    v2 = v * v
    S = np.zeros((H, W), dtype=np.int64)
    SS = np.zeros((H, W), dtype=np.int64)
    N = np.zeros((H, W), dtype=np.int64)
    for dy in range(-r, r + 1):
        ys, ye = max(0, -dy), min(H, H - dy)
        if ys >= ye:
            continue
        for dx in range(-r, r + 1):
            xs, xe = max(0, -dx), min(W, W - dx)
            if xs >= xe:
                continue
            S[ys:ye, xs:xe] += v[ys + dy:ye + dy, xs + dx:xe + dx]
            SS[ys:ye, xs:xe] += v2[ys + dy:ye + dy, xs + dx:xe + dx]
            N[ys:ye, xs:xe] += 1
    return S, SS, N


def _shifted(img: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """``out[i, j] = img[i + dy, j + dx]``, zero outside the image."""
    H, W = img.shape
    out = np.zeros_like(img)
    ys, ye = max(0, -dy), min(H, H - dy)
    xs, xe = max(0, -dx), min(W, W - dx)
    if ys < ye and xs < xe:
        out[ys:ye, xs:xe] = img[ys + dy:ye + dy, xs + dx:xe + dx]
    return out


def erode(img: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    out = np.ones_like(img)
    for dy, dx in offsets.tolist():
        out &= _shifted(img, dy, dx)
    return out


def dilate(img: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    out = np.zeros_like(img)
    for dy, dx in offsets.tolist():
        out |= _shifted(img, -dy, -dx)
    return out


def _find(parent: list[int], a: int) -> int:
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        parent[a], a = root, parent[a]
    return root


def label(img: np.ndarray, connectivity: int):
    """Run-length union-find labeling; labels numbered by raster first encounter."""
    H, W = img.shape
    reach = 1 if connectivity == 8 else 0
    padded = np.zeros((H, W + 2), dtype=np.int8)
    padded[:, 1:-1] = img != 0
    edges = np.diff(padded, axis=1)
    rows, starts = np.nonzero(edges == 1)
    _, ends = np.nonzero(edges == -1)

    parent = list(range(len(starts)))
    row_first = np.searchsorted(rows, np.arange(H + 1))
    for row in range(1, H):
        a, a_end = row_first[row - 1], row_first[row]
        b, b_end = row_first[row], row_first[row + 1]
        while a < a_end and b < b_end:
            # runs are half-open [start, end); 8-connectivity widens contact by one
            if starts[a] < ends[b] + reach and starts[b] < ends[a] + reach:
                ra, rb = _find(parent, a), _find(parent, b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            if ends[a] < ends[b]:
                a += 1
            else:
                b += 1

    labels = np.zeros((H, W), dtype=np.int32)
    remap: dict[int, int] = {}
    for run in range(len(starts)):
        root = _find(parent, run)
        lab = remap.get(root)
        if lab is None:
            lab = remap[root] = len(remap) + 1
        labels[rows[run], starts[run]:ends[run]] = lab
    return labels, len(remap)
