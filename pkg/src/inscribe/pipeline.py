"""Batch enhancement, feature extraction and evaluation.

``run_pipeline`` writes into its output directory::

    enhanced/<image_id>.pgm|pbm   cleaned binary images
    features.csv                  image_id,material,background,mean,std,fallback
    regions.csv                   per-component statistics
    scatter.csv                   mean,std,background,predicted
    predictions.csv               image_id,split,background,<one column per classifier>
    histogram.csv                 feature,bin,lo,hi,count
    report.json

Every file is a pure function of the manifest, the images and the config.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .binarize import ThresholdParams, binarize
from .classify import (
    BACKGROUNDS,
    MATERIALS,
    REFERENCE_ACCURACY,
    LabeledSample,
    Model,
    evaluate,
    knn_train,
    predict,
    split_dataset,
    svm_train,
)
from .errors import InscribeError, ManifestParseError
from .features import FeatureVector, image_features, region_mean_std
from .morphology import CleanupConfig, Region, cleanup, label_components, union_mask
from .raster import BinaryRaster, GrayRaster, load_image, save_binary, to_grayscale

log = logging.getLogger(__name__)

CLASSIFIERS = ("knn", "svm")
FEATURES_HEADER = ["image_id", "material", "background", "mean", "std", "fallback"]
SCATTER_HEADER = ["mean", "std", "background", "predicted"]


# --------------------------------------------------------------------------
# Manifest
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    image_id: str
    material: str
    background: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)


def parse_manifest(path) -> DatasetManifest:
    """Load and validate a manifest JSON file.

    Relative image paths are resolved against the manifest's directory.
    Problems are reported as :class:`ManifestParseError` naming the offending
    line (for syntax errors) or field.
    """
    path = os.fspath(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestParseError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise ManifestParseError(f"{path}: cannot read manifest: {exc}") from exc
    return manifest_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)), source=path)


def manifest_from_dict(doc, base_dir: str = ".", source: str = "<manifest>") -> DatasetManifest:
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise ManifestParseError(f"{source}: expected an object with an 'entries' list")
    entries = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["entries"]):
        where = f"{source}: entries[{i}]"
        if not isinstance(raw, dict):
            raise ManifestParseError(f"{where}: expected an object")
        for key in ("path", "image_id", "material", "background"):
            if not isinstance(raw.get(key), str) or not raw[key]:
                raise ManifestParseError(f"{where}.{key}: missing or not a non-empty string")
        if raw["material"] not in MATERIALS:
            raise ManifestParseError(f"{where}.material: {raw['material']!r} not in {MATERIALS}")
        if raw["background"] not in BACKGROUNDS:
            raise ManifestParseError(f"{where}.background: {raw['background']!r} not in {BACKGROUNDS}")
        if raw["image_id"] in seen:
            raise ManifestParseError(f"{where}.image_id: duplicate id {raw['image_id']!r}")
        seen.add(raw["image_id"])
        p = raw["path"] if os.path.isabs(raw["path"]) else os.path.join(base_dir, raw["path"])
        entries.append(ManifestEntry(p, raw["image_id"], raw["material"], raw["background"]))
    return DatasetManifest(tuple(entries))


# --------------------------------------------------------------------------
# Config
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    threshold: ThresholdParams = field(default_factory=ThresholdParams)
    cleanup: CleanupConfig = field(default_factory=CleanupConfig)
    classifiers: tuple[str, ...] = CLASSIFIERS
    knn_k: int = 3
    C: float = 1.0
    epochs: int = 1000
    ratio: float = 0.8
    seed: int = 42
    enhanced_format: str = "pgm"

    def __post_init__(self) -> None:
        if not self.classifiers or any(c not in CLASSIFIERS for c in self.classifiers):
            raise ValueError(f"classifiers must be drawn from {CLASSIFIERS}")
        if self.knn_k < 1 or self.knn_k % 2 == 0:
            raise ValueError("knn_k must be an odd positive integer")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.enhanced_format not in ("pgm", "pbm"):
            raise ValueError("enhanced_format must be 'pgm' or 'pbm'")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["classifiers"] = list(self.classifiers)
        return d


# --------------------------------------------------------------------------
# Single image
# --------------------------------------------------------------------------


@dataclass
class EnhanceResult:
    image_id: str
    binary: BinaryRaster
    features: FeatureVector
    regions: list[Region]
    region_features: list[FeatureVector]
    route: dict


def _as_gray(raster) -> GrayRaster:
    if isinstance(raster, BinaryRaster):
        return GrayRaster((1 - raster.data) * np.uint8(255))
    return to_grayscale(raster)


def enhance_gray(gray: GrayRaster, config: PipelineConfig = PipelineConfig(), image_id: str = "") -> EnhanceResult:
    """Binarize, clean up, label text regions and measure them."""
    binary = binarize(gray, config.threshold)
    cleaned = cleanup(binary, config.cleanup)
    regions = label_components(cleaned, config.cleanup.connectivity)
    mask = union_mask(regions, gray.shape)
    fv = image_features(gray, mask)
    per_region = [region_mean_std(gray, union_mask([r], gray.shape)) for r in regions]
    route = {k: v for k, v in binary.meta.items() if k in ("method", "route", "threshold", "regularity")}
    return EnhanceResult(image_id, cleaned, fv, regions, per_region, route)


def enhance_one(path, config: PipelineConfig = PipelineConfig(), out_dir: Optional[str] = None,
                image_id: Optional[str] = None) -> EnhanceResult:
    """Run the enhancement chain on one file, writing the result if ``out_dir`` is given."""
    image_id = image_id or os.path.splitext(os.path.basename(os.fspath(path)))[0]
    result = enhance_gray(_as_gray(load_image(path)), config, image_id)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        save_binary(result.binary, os.path.join(out_dir, f"{image_id}.{config.enhanced_format}"),
                    fmt=config.enhanced_format)
    return result


def enhance_manifest(manifest: DatasetManifest, config: PipelineConfig, out_dir: Optional[str] = None):
    """Enhance every entry; failures are collected rather than raised.

    Returns ``(results, samples, skipped)`` in manifest order.
    """
    results: list[EnhanceResult] = []
    samples: list[LabeledSample] = []
    skipped: list[dict] = []
    enhanced_dir = os.path.join(out_dir, "enhanced") if out_dir else None
    for entry in manifest.entries:
        try:
            res = enhance_one(entry.path, config, enhanced_dir, entry.image_id)
        except (InscribeError, OSError, ValueError) as exc:
            log.warning("skipping %s: %s", entry.image_id, exc)
            skipped.append({"image_id": entry.image_id, "error": f"{type(exc).__name__}: {exc}"})
            continue
        results.append(res)
        samples.append(LabeledSample(entry.image_id, entry.material, entry.background, res.features))
    return results, samples, skipped


# --------------------------------------------------------------------------
# Training / evaluation
# --------------------------------------------------------------------------


def train_classifier(name: str, train: Sequence[LabeledSample], config: PipelineConfig) -> Model:
    if name == "knn":
        return knn_train(train, config.knn_k, config.seed)
    if name == "svm":
        return svm_train(train, config.C, config.epochs, config.seed)
    raise ValueError(f"unknown classifier {name!r}")


@dataclass
class PipelineResult:
    report: dict
    samples: list[LabeledSample]
    predictions: dict[str, list[str]]
    split: dict[str, list[str]]
    results: list[EnhanceResult] = field(repr=False, default_factory=list)


def run_pipeline(manifest: DatasetManifest, config: PipelineConfig = PipelineConfig(),
                 out_dir: Optional[str] = None) -> PipelineResult:
    """Enhance, extract features, split, train, evaluate and (optionally) write artifacts."""
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    results, samples, skipped = enhance_manifest(manifest, config, out_dir)
    train, test = split_dataset(samples, config.ratio, config.seed)

    reports = {}
    predictions = {}
    for name in config.classifiers:
        model = train_classifier(name, train, config)
        reports[name] = evaluate(model, test, seed=config.seed)
        predictions[name] = predict(model, samples) if samples else []

    split = {"train": [s.image_id for s in train], "test": [s.image_id for s in test]}
    routes: dict[str, int] = {}
    for r in results:
        routes[r.route["method"]] = routes.get(r.route["method"], 0) + 1
    counts = {
        "manifest": len(manifest),
        "processed": len(samples),
        "skipped": len(skipped),
        "train": len(train),
        "test": len(test),
    }
    for m in MATERIALS:
        counts[f"test_{m}"] = sum(1 for s in test if s.material == m)
    report = {
        "overall_accuracy": {n: rep.overall_accuracy for n, rep in reports.items()},
        "per_material": {n: rep.per_material for n, rep in reports.items()},
        "confusion": {n: rep.confusion for n, rep in reports.items()},
        "seed": config.seed,
        "counts": counts,
        "skipped": skipped,
        "split": split,
        "classifiers": list(config.classifiers),
        "routing": dict(sorted(routes.items())),
        "config": config.to_dict(),
        "reference_accuracy": REFERENCE_ACCURACY,
    }
    out = PipelineResult(report, samples, predictions, split, results)
    if out_dir:
        write_artifacts(out, config, out_dir)
    return out


# --------------------------------------------------------------------------
# Artifacts
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_features_csv(samples: Sequence[LabeledSample], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FEATURES_HEADER)
        for s in samples:
            w.writerow([s.image_id, s.material, s.background, _fmt(s.features.mean), _fmt(s.features.std),
                        int(s.features.fallback)])


def read_features_csv(path) -> list[LabeledSample]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FEATURES_HEADER:
            raise ValueError(f"{path}: expected header {','.join(FEATURES_HEADER)}")
        return [
            LabeledSample(row["image_id"], row["material"], row["background"],
                          FeatureVector(float(row["mean"]), float(row["std"]), fallback=row["fallback"] == "1"))
            for row in reader
        ]


def write_regions_csv(results: Sequence[EnhanceResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", "label", "area", "min_row", "min_col", "max_row", "max_col", "mean", "std"])
        for res in results:
            for reg, fv in zip(res.regions, res.region_features):
                w.writerow([res.image_id, reg.label, reg.area, *reg.bbox, _fmt(fv.mean), _fmt(fv.std)])


def write_scatter_csv(samples: Sequence[LabeledSample], predicted: Sequence[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCATTER_HEADER)
        for s, p in zip(samples, predicted):
            w.writerow([_fmt(s.features.mean), _fmt(s.features.std), s.background, p])


def write_histogram_csv(samples: Sequence[LabeledSample], path, bins: int = 16) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "bin", "lo", "hi", "count"])
        for name, values in (("mean", [s.features.mean for s in samples]), ("std", [s.features.std for s in samples])):
            if not values:
                continue
            counts, edges = np.histogram(np.asarray(values), bins=bins)
            for i, c in enumerate(counts.tolist()):
                w.writerow([name, i, _fmt(edges[i]), _fmt(edges[i + 1]), c])


def write_artifacts(result: PipelineResult, config: PipelineConfig, out_dir: str) -> None:
    samples = result.samples
    write_features_csv(samples, os.path.join(out_dir, "features.csv"))
    write_regions_csv(result.results, os.path.join(out_dir, "regions.csv"))
    primary = config.classifiers[0]
    write_scatter_csv(samples, result.predictions[primary], os.path.join(out_dir, "scatter.csv"))
    write_histogram_csv(samples, os.path.join(out_dir, "histogram.csv"))
    test_ids = set(result.split["test"])
    with open(os.path.join(out_dir, "predictions.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image_id", "split", "background", *config.classifiers])
        for i, s in enumerate(samples):
            w.writerow([s.image_id, "test" if s.image_id in test_ids else "train", s.background,
                        *(result.predictions[c][i] for c in config.classifiers)])
    write_json(result.report, os.path.join(out_dir, "report.json"))


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
