"""Mean / standard deviation descriptors over text regions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyMask
from .raster import BinaryRaster, GrayRaster


@dataclass(frozen=True)
class FeatureVector:
    mean: float
    std: float
    n: int = 0
    fallback: bool = False

    def as_tuple(self) -> tuple[float, float]:
        return (self.mean, self.std)


def mean_std(values: np.ndarray) -> FeatureVector:
    """Population mean and std of integer samples.

    Sums are accumulated as exact Python integers and the variance numerator
    ``n * sum(x^2) - sum(x)^2`` is formed exactly, so the std is 0 precisely
    when all samples are equal.
    """
    v = np.asarray(values).ravel()
    n = int(v.size)
    if n == 0:
        raise EmptyMask("no samples")
    wide = v.astype(np.int64)
    s = int(wide.sum(dtype=np.int64)) if n < (1 << 40) else sum(int(x) for x in wide)
    ss = int(np.dot(wide, wide)) if n < (1 << 30) else sum(int(x) * int(x) for x in wide)
    num = n * ss - s * s
    return FeatureVector(mean=s / n, std=math.sqrt(num) / n, n=n)


def region_mean_std(img: GrayRaster, mask: BinaryRaster) -> FeatureVector:
    """Mean and population std of the pixels where ``mask`` is 1."""
    if img.shape != mask.shape:
        raise ValueError(f"mask shape {mask.shape} differs from image shape {img.shape}")
    sel = img.data[mask.data.astype(bool)]
    if sel.size == 0:
        raise EmptyMask("mask selects no pixels")
    return mean_std(sel)


def image_features(img: GrayRaster, mask: Optional[BinaryRaster] = None) -> FeatureVector:
    """The per-image classifier input.

    With a mask this is :func:`region_mean_std`; without one, or when the
    mask is empty, the whole image is used and an empty mask sets
    ``fallback``.
    """
    if mask is not None:
        try:
            return region_mean_std(img, mask)
        except EmptyMask:
            fv = mean_std(img.data)
            return FeatureVector(fv.mean, fv.std, fv.n, fallback=True)
    return mean_std(img.data)
