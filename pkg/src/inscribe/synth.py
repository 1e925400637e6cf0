"""Seeded synthetic inscription corpus.

Renders glyph-like dark strokes on light backgrounds. ``regular`` images get
a flat background with mild noise; ``irregular`` ones get an illumination
gradient, stains and heavy noise, with ink that darkens whatever lies
beneath it. Each material adds its own surface texture.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .classify import BACKGROUNDS, MATERIALS
from .raster import GrayRaster, save_gray

DEFAULT_SIZE = 128


def _smooth(noise: np.ndarray, passes: int) -> np.ndarray:
    out = noise
    for _ in range(passes):
        out = (out + np.roll(out, 1, 0) + np.roll(out, -1, 0) + np.roll(out, 1, 1) + np.roll(out, -1, 1)) / 5.0
    return out


def _texture(material: str, rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """Zero-mean surface texture with unit-ish amplitude."""
    h, w = shape
    if material == "stone":
        tex = _smooth(rng.normal(size=shape), 2)
    elif material == "metal":
        rows = _smooth(rng.normal(size=(h, 1)).repeat(w, axis=1), 1)
        sheen = np.sin(np.linspace(0, rng.uniform(2, 5) * np.pi, w))[None, :]
        tex = rows + 0.5 * sheen
    else:
        tex = np.zeros(shape)
        for x in rng.integers(0, w, size=rng.integers(3, 7)):
            tex[:, x] += rng.uniform(0.5, 1.5)
        tex = _smooth(tex + 0.3 * rng.normal(size=shape), 1)
    return (tex - tex.mean()) / (tex.std() + 1e-12)


def _ink_mask(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """Boolean mask of stroke pixels laid out in rough text lines."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    mask = np.zeros(shape, dtype=bool)
    margin = 10
    n_lines = int(rng.integers(3, 5))
    line_ys = np.linspace(margin + 8, h - margin - 8, n_lines)
    for ly in line_ys:
        x = margin + rng.uniform(0, 6)
        while x < w - margin - 10:
            gw = rng.uniform(8, 14)
            # one glyph: a few strokes inside a gw x 14 box
            for _ in range(int(rng.integers(2, 4))):
                x0, x1 = x + rng.uniform(0, gw, size=2)
                y0, y1 = ly + rng.uniform(-7, 7, size=2)
                thick = rng.uniform(1.0, 1.8)
                dx, dy = x1 - x0, y1 - y0
                L2 = dx * dx + dy * dy + 1e-9
                t = np.clip(((xx - x0) * dx + (yy - y0) * dy) / L2, 0.0, 1.0)
                d2 = (xx - x0 - t * dx) ** 2 + (yy - y0 - t * dy) ** 2
                mask |= d2 <= thick * thick
            x += gw + rng.uniform(3, 7)
    return mask


def render(material: str, background: str, rng: np.random.Generator, size: int = DEFAULT_SIZE) -> GrayRaster:
    shape = (size, size)
    h, w = shape
    level = rng.uniform(175, 215)
    ink = _ink_mask(rng, shape)
    tex = _texture(material, rng, shape)
    if background == "regular":
        bg = level + rng.uniform(1.5, 3.0) * tex + rng.normal(0, rng.uniform(2.0, 4.0), shape)
        fg = rng.uniform(25, 50) + rng.normal(0, 3.0, shape)
    else:
        yy, xx = np.mgrid[0:h, 0:w] / float(size)
        angle = rng.uniform(0, 2 * np.pi)
        grad = (np.cos(angle) * (xx - 0.5) + np.sin(angle) * (yy - 0.5)) * rng.uniform(60, 110)
        stains = np.zeros(shape)
        for _ in range(int(rng.integers(3, 7))):
            cy, cx = rng.uniform(0, 1, size=2)
            sig = rng.uniform(0.06, 0.18)
            amp = rng.uniform(30, 60) * rng.choice([-1.0, 1.0], p=[0.6, 0.4])
            stains += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sig * sig))
        bg = level + grad + stains + rng.uniform(8, 14) * tex + rng.normal(0, rng.uniform(12, 20), shape)
        fg = bg * rng.uniform(0.45, 0.6) + rng.normal(0, 8.0, shape)
    img = np.where(ink, fg, bg)
    return GrayRaster(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def generate_synthetic_corpus(out_dir, n: int = 25, seed: int = 7, size: int = DEFAULT_SIZE) -> dict:
    """Write ``3 * 2 * n`` PGM images plus ``manifest.json`` under ``out_dir``.

    Every image draws from its own generator seeded by ``(seed, index)``, so
    the corpus is byte-for-byte reproducible. Manifest paths are relative to
    the manifest file. Returns the manifest as a dict.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
    entries = []
    index = 0
    for material in MATERIALS:
        for background in BACKGROUNDS:
            for i in range(n):
                rng = np.random.default_rng([seed, index])
                index += 1
                image_id = f"{material}_{background}_{i:03d}"
                rel = f"images/{image_id}.pgm"
                save_gray(render(material, background, rng, size), os.path.join(out_dir, rel))
                entries.append({"path": rel, "image_id": image_id, "material": material, "background": background})
    manifest = {"entries": entries}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
