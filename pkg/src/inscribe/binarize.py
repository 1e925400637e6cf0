"""Global (Otsu) and local (Niblack, Sauvola) thresholding.

Windowed statistics are computed from exact integer window sums, which come
either from an integral image (O(1) per pixel) or from a direct scan of the
window (O(w^2) per pixel). Both routes feed the same floating point formula,
so they give bit-identical maps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _backend
from .errors import DegenerateHistogram
from .raster import BinaryRaster, GrayRaster

METHODS = ("global-otsu", "local-niblack", "local-sauvola", "auto")
POLARITIES = ("dark-text", "light-text")
DEFAULT_K = {"local-niblack": -0.2, "local-sauvola": 0.5}


@dataclass(frozen=True)
class ThresholdParams:
    """Binarization settings.

    ``k`` left as ``None`` resolves to the method default (-0.2 for Niblack,
    0.5 for Sauvola). ``regularity_cutoff`` and ``block`` only matter for
    ``method="auto"``.
    """

    method: str = "auto"
    window: int = 31
    k: Optional[float] = None
    R: float = 128.0
    polarity: str = "dark-text"
    regularity_cutoff: float = 18.0
    block: int = 16

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}, got {self.polarity!r}")
        if not self.regularity_cutoff >= 0:
            raise ValueError("regularity_cutoff must be >= 0")
        if self.block < 2:
            raise ValueError("block must be >= 2")

    def k_for(self, method: str) -> float:
        return DEFAULT_K[method] if self.k is None else float(self.k)


# --------------------------------------------------------------------------
# Global thresholding
# --------------------------------------------------------------------------


def histogram(img: GrayRaster) -> np.ndarray:
    """256-bin intensity histogram (int64 counts)."""
    return np.bincount(img.data.ravel(), minlength=256).astype(np.int64)


def otsu_threshold(hist) -> int:
    """Otsu's threshold from a 256-bin histogram.

    Class 0 holds intensities ``<= t``. Returns the ``t`` in ``[0, 254]`` that
    maximises the between-class variance, the smallest one on ties. All
    comparisons are exact integer cross-multiplications.
    """
    counts = [int(c) for c in hist]
    if len(counts) != 256 or any(c < 0 for c in counts):
        raise ValueError("histogram must hold 256 non-negative counts")
    if sum(1 for c in counts if c) < 2:
        raise DegenerateHistogram("histogram mass is concentrated on a single intensity")

    total = sum(counts)
    total_sum = sum(v * c for v, c in enumerate(counts))
    # between-class variance = (s0*n1 - s1*n0)^2 / (N^2 * n0 * n1); N^2 is common
    best_t, best_num, best_den = 0, -1, 1
    n0 = s0 = 0
    for t in range(255):
        n0 += counts[t]
        s0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            num, den = 0, 1
        else:
            diff = s0 * n1 - (total_sum - s0) * n0
            num, den = diff * diff, n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize_global(img: GrayRaster, t: int, polarity: str = "dark-text") -> BinaryRaster:
    """Fixed threshold: dark text is ``pixel <= t``, light text is ``pixel > t``."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must lie in [0, 255], got {t}")
    if polarity == "dark-text":
        out = img.data <= t
    elif polarity == "light-text":
        out = img.data > t
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return BinaryRaster(out.astype(np.uint8), meta={"route": "global", "threshold": int(t)})


# --------------------------------------------------------------------------
# Windowed statistics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegralPair:
    """Summed-area tables of intensity and squared intensity.

    Both are ``(height + 1, width + 1)`` int64 with a zero first row/column.
    """

    sum_table: np.ndarray
    sq_table: np.ndarray

    def rect_sum(self, y0: int, x0: int, y1: int, x1: int) -> int:
        """Sum over rows ``y0:y1`` and columns ``x0:x1`` (half-open)."""
        t = self.sum_table
        return int(t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0])

    def rect_sq(self, y0: int, x0: int, y1: int, x1: int) -> int:
        t = self.sq_table
        return int(t[y1, x1] - t[y0, x1] - t[y1, x0] + t[y0, x0])


def integral_pair(img: GrayRaster) -> IntegralPair:
    v = img.data.astype(np.int64)
    h, w = v.shape
    s = np.zeros((h + 1, w + 1), dtype=np.int64)
    q = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(v, axis=0), axis=1, out=s[1:, 1:])
    np.cumsum(np.cumsum(v * v, axis=0), axis=1, out=q[1:, 1:])
    return IntegralPair(s, q)


@dataclass(frozen=True)
class LocalStatsMap:
    """Per-pixel mean and population std over a border-clamped square window."""

    mean: np.ndarray
    std: np.ndarray
    window: int
    n: np.ndarray


def _stats_from_sums(S: np.ndarray, SS: np.ndarray, N: np.ndarray):
    n = N.astype(np.float64)
    mean = S / n
    var = SS / n - mean * mean
    return mean, np.sqrt(np.maximum(var, 0.0))


def local_stats(img: GrayRaster, window: int = 31, *, route: str = "integral", kernels=None) -> LocalStatsMap:
    """Windowed mean and std at every pixel.

    The window is clipped to the image and ``n`` is the clipped area, so the
    statistics at the border are over real pixels only. ``route`` chooses
    ``"integral"`` (summed-area tables) or ``"naive"`` (direct window scan);
    ``kernels`` overrides the backend selected at import.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    k = kernels or _backend.kernels
    r = window // 2
    if route == "integral":
        pair = integral_pair(img)
        S, SS, N = k.window_sums_integral(pair.sum_table, pair.sq_table, r)
    elif route == "naive":
        S, SS, N = k.window_sums_naive(img.data, r)
    else:
        raise ValueError(f"route must be 'integral' or 'naive', got {route!r}")
    mean, std = _stats_from_sums(S, SS, N)
    return LocalStatsMap(mean=mean, std=std, window=window, n=N)


def local_threshold_map(stats: LocalStatsMap, method: str, k: float, R: float = 128.0) -> np.ndarray:
    if method == "local-niblack":
        return stats.mean + k * stats.std
    if method == "local-sauvola":
        return stats.mean * (1.0 + k * (stats.std / R - 1.0))
    raise ValueError(f"not a local method: {method!r}")


def binarize_local(img: GrayRaster, params: ThresholdParams, stats: Optional[LocalStatsMap] = None) -> BinaryRaster:
    """Per-pixel Niblack or Sauvola thresholding.

    Foreground uses a strict comparison against the local threshold, so a
    flat window (std 0, threshold equal to the mean) is always background.
    """
    if params.method not in DEFAULT_K:
        raise ValueError(f"binarize_local needs a local method, got {params.method!r}")
    if stats is None:
        stats = local_stats(img, params.window)
    k = params.k_for(params.method)
    T = local_threshold_map(stats, params.method, k, params.R)
    pix = img.data
    out = pix < T if params.polarity == "dark-text" else pix > T
    return BinaryRaster(out.astype(np.uint8), meta={"route": "local", "k": k, "window": params.window})


def background_regularity(img: GrayRaster, block: int = 16) -> float:
    """Population std of block means over a non-overlapping tiling.

    Edge blocks may be partial; each is averaged over its own pixel count.
    A constant image scores 0.
    """
    if block < 2:
        raise ValueError("block must be >= 2")
    v = img.data.astype(np.int64)
    rows = np.arange(0, v.shape[0], block)
    cols = np.arange(0, v.shape[1], block)
    sums = np.add.reduceat(np.add.reduceat(v, rows, axis=0), cols, axis=1)
    hs = np.diff(np.append(rows, v.shape[0]))
    ws = np.diff(np.append(cols, v.shape[1]))
    means = sums / np.outer(hs, ws)
    return float(np.sqrt(np.mean((means - means.mean()) ** 2)))


def binarize(img: GrayRaster, params: ThresholdParams = ThresholdParams()) -> BinaryRaster:
    """Binarize with the configured method.

    ``method="auto"`` measures :func:`background_regularity` and uses Otsu
    when it is below ``regularity_cutoff``, Sauvola otherwise. The result's
    ``meta`` records the method used, the route and, for auto, the score.
    """
    meta: dict = {"requested": params.method}
    method = params.method
    if method == "auto":
        score = background_regularity(img, params.block)
        method = "global-otsu" if score < params.regularity_cutoff else "local-sauvola"
        meta["regularity"] = score
    if method == "global-otsu":
        t = otsu_threshold(histogram(img))
        out = binarize_global(img, t, params.polarity)
    else:
        out = binarize_local(img, replace(params, method=method))
    meta.update(out.meta)
    meta["method"] = method
    return BinaryRaster(out.data, meta=meta)

