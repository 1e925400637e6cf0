"""Raster containers and Netpbm (PGM/PPM/PBM) codecs.

Three immutable raster types carry images through the pipeline:

* :class:`RgbRaster`    -- ``(height, width, 3)`` uint8 array
* :class:`GrayRaster`   -- ``(height, width)`` uint8 array
* :class:`BinaryRaster` -- ``(height, width)`` uint8 array holding only 0/1,
  where 1 marks foreground text

The Netpbm codecs are implemented here so that golden files need nothing
beyond numpy. PNG input is delegated to Pillow when it is installed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from .errors import CorruptImage, UnsupportedFormat

MAX_SIDE = 1 << 16
MAXVAL = 255

__all__ = [
    "RgbRaster",
    "GrayRaster",
    "BinaryRaster",
    "load_image",
    "save_gray",
    "save_binary",
    "save_rgb",
    "encode_pnm",
    "decode_pnm",
    "to_grayscale",
]


def _freeze(arr: np.ndarray, ndim: int, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.ndim != ndim:
        raise ValueError(f"{name} expects a {ndim}-D array, got shape {arr.shape}")
    h, w = arr.shape[:2]
    if not (1 <= h <= MAX_SIDE and 1 <= w <= MAX_SIDE):
        raise ValueError(f"{name} side lengths must lie in [1, {MAX_SIDE}], got {w}x{h}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError(f"{name} values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    else:
        arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _Raster:
    data: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"{type(self).__name__}(width={self.width}, height={self.height})"


@dataclass(frozen=True, eq=False, repr=False)
class RgbRaster(_Raster):
    """Color image, row-major ``(R, G, B)`` triples."""

    def __post_init__(self) -> None:
        arr = _freeze(self.data, 3, "RgbRaster")
        if arr.shape[2] != 3:
            raise ValueError(f"RgbRaster needs 3 channels, got {arr.shape[2]}")
        object.__setattr__(self, "data", arr)


@dataclass(frozen=True, eq=False, repr=False)
class GrayRaster(_Raster):
    """Single-channel 8-bit image."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _freeze(self.data, 2, "GrayRaster"))


@dataclass(frozen=True, eq=False, repr=False)
class BinaryRaster(_Raster):
    """Two-level image: 1 is foreground text, 0 is background."""

    def __post_init__(self) -> None:
        arr = _freeze(self.data, 2, "BinaryRaster")
        if arr.size and arr.max() > 1:
            raise ValueError("BinaryRaster values must be 0 or 1")
        object.__setattr__(self, "data", arr)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.data))


AnyRaster = Union[RgbRaster, GrayRaster, BinaryRaster]


# --------------------------------------------------------------------------
# Netpbm decoding
# --------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\v\f"


def _read_header(buf: bytes, ntokens: int) -> tuple[list[int], int]:
    """Read ``ntokens`` integers after the magic; return them and the payload offset."""
    pos = 2
    tokens: list[int] = []
    n = len(buf)
    while len(tokens) < ntokens:
        if pos >= n:
            raise CorruptImage("header ends before all fields were read")
        c = buf[pos:pos + 1]
        if c in _WHITESPACE:
            pos += 1
        elif c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            start = pos
            while pos < n and buf[pos:pos + 1] not in _WHITESPACE and buf[pos:pos + 1] != b"#":
                pos += 1
            tok = buf[start:pos]
            if not tok.isdigit():
                raise CorruptImage(f"non-numeric header field {tok!r}")
            tokens.append(int(tok))
    # exactly one whitespace byte separates header from a raw payload
    if pos < n and buf[pos:pos + 1] not in _WHITESPACE:
        raise CorruptImage("missing whitespace after header")
    return tokens, pos + 1


def _ascii_values(payload: bytes, count: int, what: str) -> np.ndarray:
    parts = []
    for line in payload.splitlines():
        parts.append(line.split(b"#", 1)[0])
    values = b" ".join(parts).split()
    if len(values) != count:
        raise CorruptImage(f"{what}: expected {count} samples, found {len(values)}")
    try:
        return np.array([int(v) for v in values], dtype=np.int64)
    except ValueError as exc:
        raise CorruptImage(f"{what}: non-numeric sample") from exc


def _ascii_bits(payload: bytes, count: int) -> np.ndarray:
    parts = []
    for line in payload.splitlines():
        parts.append(line.split(b"#", 1)[0])
    digits = [ch for ch in b"".join(parts) if ch not in _WHITESPACE]
    if len(digits) != count or any(d not in (0x30, 0x31) for d in digits):
        raise CorruptImage(f"P1: expected {count} bits of 0/1")
    return np.frombuffer(bytes(digits), dtype=np.uint8) - 0x30


def decode_pnm(buf: bytes) -> AnyRaster:
    """Decode a Netpbm byte string (P1-P6) into the matching raster type."""
    magic = buf[:2]
    if magic not in (b"P1", b"P2", b"P3", b"P4", b"P5", b"P6"):
        raise UnsupportedFormat(f"unrecognised magic number {magic!r}")
    bitmap = magic in (b"P1", b"P4")
    (w, h, *rest), offset = _read_header(buf, 2 if bitmap else 3)
    if not (1 <= w <= MAX_SIDE and 1 <= h <= MAX_SIDE):
        raise CorruptImage(f"image size {w}x{h} out of range")
    if not bitmap and rest[0] != MAXVAL:
        raise UnsupportedFormat(f"only maxval {MAXVAL} is supported, got {rest[0]}")
    payload = buf[offset:]

    if magic == b"P4":
        stride = (w + 7) // 8
        need = stride * h
        if len(payload) < need:
            raise CorruptImage(f"P4: expected {need} payload bytes, found {len(payload)}")
        packed = np.frombuffer(payload[:need], dtype=np.uint8).reshape(h, stride)
        return BinaryRaster(np.unpackbits(packed, axis=1)[:, :w])
    if magic == b"P1":
        return BinaryRaster(_ascii_bits(payload, w * h).reshape(h, w))

    channels = 3 if magic in (b"P3", b"P6") else 1
    count = w * h * channels
    if magic in (b"P5", b"P6"):
        if len(payload) < count:
            raise CorruptImage(f"{magic.decode()}: expected {count} payload bytes, found {len(payload)}")
        values = np.frombuffer(payload[:count], dtype=np.uint8)
    else:
        values = _ascii_values(payload, count, magic.decode())
        if values.max(initial=0) > MAXVAL:
            raise CorruptImage("sample exceeds maxval")
    if channels == 3:
        return RgbRaster(values.reshape(h, w, 3))
    return GrayRaster(values.reshape(h, w))


def encode_pnm(raster: AnyRaster, *, binary_as: str = "pbm", plain: bool = False) -> bytes:
    """Encode a raster as Netpbm bytes.

    ``binary_as`` picks the container for a :class:`BinaryRaster`: ``"pbm"``
    (1 is black) or ``"pgm"`` (0 -> 0, 1 -> 255). ``plain`` selects the
    ASCII variants P1/P2/P3.
    """
    if isinstance(raster, BinaryRaster):
        if binary_as == "pgm":
            return encode_pnm(GrayRaster(raster.data * np.uint8(255)), plain=plain)
        if binary_as != "pbm":
            raise ValueError(f"binary_as must be 'pbm' or 'pgm', got {binary_as!r}")
        h, w = raster.data.shape
        if plain:
            rows = "\n".join(" ".join(map(str, row)) for row in raster.data.tolist())
            return f"P1\n{w} {h}\n{rows}\n".encode()
        return f"P4\n{w} {h}\n".encode() + np.packbits(raster.data, axis=1).tobytes()

    if isinstance(raster, RgbRaster):
        magic = "P3" if plain else "P6"
    elif isinstance(raster, GrayRaster):
        magic = "P2" if plain else "P5"
    else:
        raise TypeError(f"cannot encode {type(raster).__name__}")
    h, w = raster.data.shape[:2]
    header = f"{magic}\n{w} {h}\n{MAXVAL}\n".encode()
    if plain:
        flat = raster.data.reshape(h, -1)
        return header + "\n".join(" ".join(map(str, row)) for row in flat.tolist()).encode() + b"\n"
    return header + raster.data.tobytes()


# --------------------------------------------------------------------------
# File I/O
# --------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _load_png(path: str) -> Union[RgbRaster, GrayRaster]:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise UnsupportedFormat("PNG input requires Pillow (pip install 'artifact[png]')") from exc
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("L", "1"):
                return GrayRaster(np.asarray(im.convert("L")))
            if im.mode.startswith("I") or im.mode == "F":
                raise UnsupportedFormat(f"PNG mode {im.mode} is not supported")
            return RgbRaster(np.asarray(im.convert("RGB")))
    except OSError as exc:
        raise CorruptImage(f"unreadable PNG: {exc}") from exc


def load_image(path: Union[str, os.PathLike]) -> AnyRaster:
    """Load a PGM, PPM, PBM or PNG file.

    Color sources come back as :class:`RgbRaster`, single channel sources as
    :class:`GrayRaster` and bitmaps as :class:`BinaryRaster`.

    Raises
    ------
    FileNotFoundError
        ``path`` does not exist.
    UnsupportedFormat
        Magic number unrecognised or maxval other than 255.
    CorruptImage
        Header and payload disagree.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf.startswith(_PNG_MAGIC):
        return _load_png(path)
    return decode_pnm(buf)


def _write(path: Union[str, os.PathLike], payload: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(payload)


def save_gray(raster: GrayRaster, path: Union[str, os.PathLike], *, plain: bool = False) -> None:
    """Write a grayscale raster as PGM (P5, or P2 when ``plain``)."""
    _write(path, encode_pnm(raster, plain=plain))


def save_rgb(raster: RgbRaster, path: Union[str, os.PathLike], *, plain: bool = False) -> None:
    """Write a color raster as PPM (P6, or P3 when ``plain``)."""
    _write(path, encode_pnm(raster, plain=plain))


def save_binary(raster: BinaryRaster, path: Union[str, os.PathLike], *, fmt: str | None = None) -> None:
    """Write a binary raster.

    ``fmt`` is ``"pbm"`` or ``"pgm"``; when omitted it is taken from the file
    extension and defaults to PBM.
    """
    if fmt is None:
        fmt = "pgm" if os.fspath(path).lower().endswith(".pgm") else "pbm"
    _write(path, encode_pnm(raster, binary_as=fmt))


# --------------------------------------------------------------------------
# Color conversion
# --------------------------------------------------------------------------


def to_grayscale(img: Union[RgbRaster, GrayRaster]) -> GrayRaster:
    """BT.601 luma, rounded half up: ``round(0.299 R + 0.587 G + 0.114 B)``.

    Computed in integer arithmetic so the rounding is exact.
    """
    if isinstance(img, GrayRaster):
        return img
    rgb = img.data.astype(np.int32)
    acc = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500
    return GrayRaster(np.clip(acc // 1000, 0, 255).astype(np.uint8))
