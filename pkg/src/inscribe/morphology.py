"""Binary morphology and connected components.

Pixels outside the image read as 0 for every operator (zero padding).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _backend
from .raster import BinaryRaster


@dataclass(frozen=True)
class StructuringElement:
    """A set of ``(dy, dx)`` offsets probing the neighbourhood of a pixel."""

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        offs = tuple(sorted({(int(dy), int(dx)) for dy, dx in self.offsets}))
        if not offs:
            raise ValueError("structuring element needs at least one offset")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def box(cls, size: int = 3) -> "StructuringElement":
        """Square of side ``size`` (odd) centred on the origin."""
        r = _radius(size)
        return cls(tuple((dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)))

    @classmethod
    def cross(cls, size: int = 3) -> "StructuringElement":
        """Plus shape with arms of length ``size // 2``."""
        r = _radius(size)
        return cls(tuple({(d, 0) for d in range(-r, r + 1)} | {(0, d) for d in range(-r, r + 1)}))

    @property
    def origin_included(self) -> bool:
        return (0, 0) in self.offsets

    @property
    def radius(self) -> int:
        return max(max(abs(dy), abs(dx)) for dy, dx in self.offsets)

    def reflect(self) -> "StructuringElement":
        return StructuringElement(tuple((-dy, -dx) for dy, dx in self.offsets))

    def as_array(self) -> np.ndarray:
        return np.array(self.offsets, dtype=np.int64).reshape(-1, 2)


def _radius(size: int) -> int:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"structuring element size must be odd and positive, got {size}")
    return size // 2


def erode(img: BinaryRaster, se: StructuringElement, *, kernels=None) -> BinaryRaster:
    """1 where every offset of ``se`` lands on a foreground pixel."""
    k = kernels or _backend.kernels
    return BinaryRaster(k.erode(img.data, se.as_array()))


def dilate(img: BinaryRaster, se: StructuringElement, *, kernels=None) -> BinaryRaster:
    """1 where some offset of the reflected ``se`` lands on a foreground pixel."""
    k = kernels or _backend.kernels
    return BinaryRaster(k.dilate(img.data, se.as_array()))


def opening(img: BinaryRaster, se: StructuringElement) -> BinaryRaster:
    return dilate(erode(img, se), se)


def closing(img: BinaryRaster, se: StructuringElement) -> BinaryRaster:
    return erode(dilate(img, se), se)


@dataclass(frozen=True, eq=False)
class Region:
    """One connected component.

    ``rows``/``cols`` list its pixels in raster order; ``bbox`` is
    ``(min_row, min_col, max_row, max_col)``, inclusive.
    """

    label: int
    rows: np.ndarray
    cols: np.ndarray

    @property
    def area(self) -> int:
        return int(self.rows.size)

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        return (int(self.rows.min()), int(self.cols.min()), int(self.rows.max()), int(self.cols.max()))

    @property
    def pixels(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))


def label_map(img: BinaryRaster, connectivity: int = 8, *, kernels=None) -> tuple[np.ndarray, int]:
    """Integer label image (0 = background) and the number of components.

    Labels start at 1 and follow the raster order in which each component is
    first met.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    k = kernels or _backend.kernels
    return k.label(img.data, connectivity)


def label_components(img: BinaryRaster, connectivity: int = 8) -> list[Region]:
    labels, count = label_map(img, connectivity)
    if count == 0:
        return []
    flat = labels.ravel()
    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(1, count + 2))
    width = labels.shape[1]
    regions = []
    for lab in range(1, count + 1):
        idx = order[bounds[lab - 1]:bounds[lab]]
        regions.append(Region(lab, idx // width, idx % width))
    return regions


def remove_small_components(img: BinaryRaster, min_area: int, connectivity: int = 8) -> BinaryRaster:
    """Drop foreground components with fewer than ``min_area`` pixels."""
    if min_area < 1:
        raise ValueError("min_area must be >= 1")
    labels, count = label_map(img, connectivity)
    if count == 0 or min_area == 1:
        return BinaryRaster(img.data)
    areas = np.bincount(labels.ravel(), minlength=count + 1)
    keep = areas >= min_area
    keep[0] = False
    return BinaryRaster(keep[labels].astype(np.uint8))


@dataclass(frozen=True)
class CleanupConfig:
    """Post-binarization cleanup: speck removal, then closing, then (optionally) opening."""

    remove_small: bool = True
    min_area: int = 8
    connectivity: int = 8
    close: bool = True
    open: bool = False
    se_size: int = 3
    se_shape: str = "box"

    def __post_init__(self) -> None:
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if self.se_shape not in ("box", "cross"):
            raise ValueError("se_shape must be 'box' or 'cross'")
        _radius(self.se_size)

    @property
    def structuring_element(self) -> StructuringElement:
        return getattr(StructuringElement, self.se_shape)(self.se_size)


def cleanup(img: BinaryRaster, config: CleanupConfig = CleanupConfig()) -> BinaryRaster:
    out = img
    if config.remove_small:
        out = remove_small_components(out, config.min_area, config.connectivity)
    se = config.structuring_element
    if config.close:
        out = closing(out, se)
    if config.open:
        out = opening(out, se)
    return out


def union_mask(regions: Iterable[Region], shape: tuple[int, int]) -> BinaryRaster:
    mask = np.zeros(shape, dtype=np.uint8)
    for reg in regions:
        mask[reg.rows, reg.cols] = 1
    return BinaryRaster(mask)
