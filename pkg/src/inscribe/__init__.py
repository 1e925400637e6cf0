"""Enhancement and background classification of degraded inscription images."""

from ._backend import name as backend
from .binarize import ThresholdParams, background_regularity, binarize, local_stats, otsu_threshold
from .classify import evaluate, knn_train, predict, split_dataset, svm_train
from .features import FeatureVector, image_features, region_mean_std
from .morphology import CleanupConfig, StructuringElement, cleanup, label_components
from .pipeline import PipelineConfig, enhance_one, parse_manifest, run_pipeline
from .raster import BinaryRaster, GrayRaster, RgbRaster, load_image, to_grayscale

__version__ = "0.1.0"

__all__ = [
    "BinaryRaster",
    "CleanupConfig",
    "FeatureVector",
    "GrayRaster",
    "PipelineConfig",
    "RgbRaster",
    "StructuringElement",
    "ThresholdParams",
    "background_regularity",
    "backend",
    "binarize",
    "cleanup",
    "enhance_one",
    "evaluate",
    "image_features",
    "knn_train",
    "label_components",
    "load_image",
    "local_stats",
    "otsu_threshold",
    "parse_manifest",
    "predict",
    "region_mean_std",
    "run_pipeline",
    "split_dataset",
    "svm_train",
    "to_grayscale",
]
