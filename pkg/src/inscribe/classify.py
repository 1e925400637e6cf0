"""K-nearest-neighbour and linear SVM classifiers over (mean, std) features.

The target is the background type (``regular`` / ``irregular``); the
material (``stone`` / ``metal`` / ``document``) only groups the accuracy
report.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import SingleClassTrainingSet, StratumTooSmall
from .features import FeatureVector

MATERIALS = ("stone", "metal", "document")
BACKGROUNDS = ("regular", "irregular")
MODEL_VERSION = 1

# Published per-material accuracies on a corpus we do not have. Reported as
# metadata next to our own numbers, never asserted against.
REFERENCE_ACCURACY = {
    "knn": {"stone": 0.557, "metal": 0.62, "document": 0.656},
    "svm": {"stone": 0.532, "metal": 0.595, "document": 0.678},
}


@dataclass(frozen=True)
class LabeledSample:
    image_id: str
    material: str
    background: str
    features: FeatureVector

    def __post_init__(self) -> None:
        if self.material not in MATERIALS:
            raise ValueError(f"unknown material {self.material!r}")
        if self.background not in BACKGROUNDS:
            raise ValueError(f"unknown background {self.background!r}")

    @property
    def x(self) -> tuple[float, float]:
        return (self.features.mean, self.features.std)


def _matrix(samples: Sequence[LabeledSample]) -> np.ndarray:
    return np.array([s.x for s in samples], dtype=np.float64).reshape(-1, 2)


# --------------------------------------------------------------------------
# Splitting
# --------------------------------------------------------------------------


def split_dataset(samples: Iterable[LabeledSample], ratio: float = 0.8, seed: int = 0):
    """Stratified train/test split over (material, background).

    Each stratum contributes ``floor(ratio * n)`` samples to training, picked
    by a seeded shuffle of the stratum sorted by ``image_id``. Strata are
    visited in sorted order, so the result depends only on the sample set
    and the seed. Both halves are returned sorted by ``image_id``.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    strata: dict[tuple[str, str], list[LabeledSample]] = {}
    seen: set[str] = set()
    for s in samples:
        if s.image_id in seen:
            raise ValueError(f"duplicate image_id {s.image_id!r}")
        seen.add(s.image_id)
        strata.setdefault((s.material, s.background), []).append(s)

    rng = np.random.default_rng(seed)
    train: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for key in sorted(strata):
        group = sorted(strata[key], key=lambda s: s.image_id)
        if len(group) < 2:
            raise StratumTooSmall(f"stratum {key[0]}/{key[1]} has {len(group)} sample(s); need >= 2")
        n_train = math.floor(ratio * len(group) + 1e-9)
        order = rng.permutation(len(group))
        train.extend(group[i] for i in order[:n_train])
        test.extend(group[i] for i in order[n_train:])
    train.sort(key=lambda s: s.image_id)
    test.sort(key=lambda s: s.image_id)
    return train, test


# --------------------------------------------------------------------------
# Scaling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Scaler:
    """Per-dimension z-score transform fitted on training data.

    Dimensions with zero spread get ``mean=0, std=1`` and pass through
    unchanged.
    """

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - np.asarray(self.mean)) / np.asarray(self.std)


def fit_scaler(train) -> Scaler:
    X = _matrix(train) if _is_samples(train) else np.asarray(train, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    flat = std == 0
    mean[flat] = 0.0
    std[flat] = 1.0
    return Scaler(tuple(float(v) for v in mean), tuple(float(v) for v in std))


def apply_scaler(scaler: Scaler, features) -> np.ndarray:
    return scaler.transform(_as_points(features))


def _is_samples(obj) -> bool:
    return isinstance(obj, (list, tuple)) and bool(obj) and isinstance(obj[0], LabeledSample)


FeatureInput = Union[FeatureVector, LabeledSample, Sequence[float], np.ndarray, Sequence]


def _as_points(features: FeatureInput) -> np.ndarray:
    if isinstance(features, FeatureVector):
        return np.array([[features.mean, features.std]])
    if isinstance(features, LabeledSample):
        return np.array([features.x])
    if _is_samples(features):
        return _matrix(features)
    if isinstance(features, (list, tuple)) and features and isinstance(features[0], FeatureVector):
        return np.array([f.as_tuple() for f in features])
    arr = np.asarray(features, dtype=np.float64)
    return arr.reshape(1, -1) if arr.ndim == 1 else arr


def _single(features: FeatureInput) -> bool:
    if isinstance(features, (FeatureVector, LabeledSample)):
        return True
    if isinstance(features, (list, tuple)) and features and isinstance(features[0], (FeatureVector, LabeledSample)):
        return False
    return np.asarray(features).ndim == 1


# --------------------------------------------------------------------------
# K-NN
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KnnModel:
    k: int
    scaler: Scaler
    X: np.ndarray  # scaled training features
    labels: tuple[str, ...]
    ids: tuple[str, ...]
    raw: tuple[tuple[float, float], ...] = ()
    materials: tuple[str, ...] = ()

    kind = "knn"

    @property
    def id_rank(self) -> np.ndarray:
        order = sorted(range(len(self.ids)), key=self.ids.__getitem__)
        rank = np.empty(len(self.ids), dtype=np.int64)
        rank[order] = np.arange(len(self.ids))
        return rank


def knn_train(train: Sequence[LabeledSample], k: int = 3, seed: int | None = None) -> KnnModel:
    """Store the scaled training set. ``seed`` is accepted for interface symmetry."""
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be an odd positive integer, got {k}")
    if k > len(train):
        raise ValueError(f"k={k} exceeds training-set size {len(train)}")
    scaler = fit_scaler(list(train))
    raw = _matrix(train)
    return KnnModel(
        k=k,
        scaler=scaler,
        X=scaler.transform(raw),
        labels=tuple(s.background for s in train),
        ids=tuple(s.image_id for s in train),
        raw=tuple((float(a), float(b)) for a, b in raw),
        materials=tuple(s.material for s in train),
    )


def knn_predict(model: KnnModel, features: FeatureInput):
    """Majority background label among the ``k`` nearest training samples.

    Distance is Euclidean in scaled space. Equal distances are ordered by
    ``image_id``; a tied vote goes to the label of the single nearest sample.
    Returns one label for a single query, else a list.
    """
    Q = model.scaler.transform(_as_points(features))
    rank = model.id_rank
    labels = model.labels
    out = []
    for q in Q:
        diff = model.X - q
        d2 = diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1]
        nearest = np.lexsort((rank, d2))[: model.k]
        votes = Counter(labels[i] for i in nearest)
        top = max(votes.values())
        winners = [lab for lab, c in votes.items() if c == top]
        out.append(winners[0] if len(winners) == 1 else labels[nearest[0]])
    return out[0] if _single(features) else out


# --------------------------------------------------------------------------
# Linear SVM
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: tuple[float, float]
    bias: float
    scaler: Scaler
    C: float = 1.0
    epochs: int = 1000
    seed: int = 0
    objective_history: tuple[float, ...] = field(default=(), repr=False)
    best_epoch: int = 0

    kind = "svm"

    def decision(self, features: FeatureInput) -> np.ndarray:
        Z = self.scaler.transform(_as_points(features))
        return Z @ np.asarray(self.weights) + self.bias


def _label_sign(background: str) -> float:
    return 1.0 if background == "irregular" else -1.0


def svm_objective(w, b: float, Z: np.ndarray, y: np.ndarray, C: float) -> float:
    """``0.5 * |w|^2 + C * sum(hinge(y * (w.x + b)))``."""
    w = np.asarray(w, dtype=np.float64)
    margins = y * (Z @ w + b)
    return float(0.5 * (w @ w) + C * np.maximum(0.0, 1.0 - margins).sum())


def svm_train(train: Sequence[LabeledSample], C: float = 1.0, epochs: int = 1000, seed: int = 0) -> SvmModel:
    """Primal subgradient (Pegasos-style) training of a linear SVM.

    Step size at update ``t`` is ``1 / (lam * t)`` with ``lam = 1 / (C n)``;
    samples are visited in a fresh seeded permutation each epoch. The bias is
    left unregularised. The objective is evaluated after every epoch and the
    best iterate seen is returned.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if len({s.background for s in train}) < 2:
        raise SingleClassTrainingSet("SVM training needs both background labels")
    scaler = fit_scaler(list(train))
    Z = scaler.transform(_matrix(train))
    y = np.array([_label_sign(s.background) for s in train])
    n = len(train)
    lam = 1.0 / (C * n)
    rng = np.random.default_rng(seed)
    zs = Z.tolist()
    ys = y.tolist()

    w0 = w1 = b = 0.0
    t = 1
    best = (math.inf, 0.0, 0.0, 0.0, 0)
    history = []
    for epoch in range(1, epochs + 1):
        for i in rng.permutation(n).tolist():
            eta = 1.0 / (lam * t)
            x0, x1 = zs[i]
            yi = ys[i]
            margin = yi * (w0 * x0 + w1 * x1 + b)
            shrink = 1.0 - eta * lam
            w0 *= shrink
            w1 *= shrink
            if margin < 1.0:
                w0 += eta * yi * x0
                w1 += eta * yi * x1
                b += eta * yi
            t += 1
        obj = svm_objective((w0, w1), b, Z, y, C)
        history.append(obj)
        if obj < best[0]:
            best = (obj, w0, w1, b, epoch)
    _, w0, w1, b, best_epoch = best
    return SvmModel(
        weights=(w0, w1),
        bias=b,
        scaler=scaler,
        C=C,
        epochs=epochs,
        seed=seed,
        objective_history=tuple(history),
        best_epoch=best_epoch,
    )


def svm_predict(model: SvmModel, features: FeatureInput):
    """``sign(w.x + b)`` on scaled features; 0 counts as ``irregular``."""
    scores = model.decision(features)
    out = ["irregular" if s >= 0 else "regular" for s in scores.tolist()]
    return out[0] if _single(features) else out


Model = Union[KnnModel, SvmModel]


def predict(model: Model, features: FeatureInput):
    if isinstance(model, KnnModel):
        return knn_predict(model, features)
    if isinstance(model, SvmModel):
        return svm_predict(model, features)
    raise TypeError(f"unknown model type {type(model).__name__}")


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


@dataclass
class EvaluationReport:
    overall_accuracy: float
    per_material: dict[str, float]
    confusion: dict[str, dict[str, int]]  # actual -> predicted -> count
    counts: dict[str, int]
    seed: int | None = None
    predictions: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "overall_accuracy": self.overall_accuracy,
            "per_material": dict(self.per_material),
            "confusion": {a: dict(p) for a, p in self.confusion.items()},
            "counts": dict(self.counts),
            "seed": self.seed,
        }


def evaluate(model: Model, test: Sequence[LabeledSample], seed: int | None = None) -> EvaluationReport:
    if not test:
        raise ValueError("test set is empty")
    preds = predict(model, list(test))
    confusion = {a: {p: 0 for p in BACKGROUNDS} for a in BACKGROUNDS}
    per_total: Counter = Counter()
    per_correct: Counter = Counter()
    correct = 0
    for s, p in zip(test, preds):
        confusion[s.background][p] += 1
        per_total[s.material] += 1
        if p == s.background:
            correct += 1
            per_correct[s.material] += 1
    per_material = {m: per_correct[m] / per_total[m] for m in MATERIALS if per_total[m]}
    counts = {"test": len(test), "correct": correct}
    counts.update({f"test_{m}": per_total[m] for m in MATERIALS if per_total[m]})
    return EvaluationReport(
        overall_accuracy=correct / len(test),
        per_material=per_material,
        confusion=confusion,
        counts=counts,
        seed=seed,
        predictions={s.image_id: p for s, p in zip(test, preds)},
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def model_to_dict(model: Model) -> dict:
    scaler = {"mean": list(model.scaler.mean), "std": list(model.scaler.std)}
    if isinstance(model, KnnModel):
        return {
            "version": MODEL_VERSION,
            "kind": "knn",
            "k": model.k,
            "scaler": scaler,
            "train": [
                {"image_id": i, "material": m, "background": lab, "mean": r[0], "std": r[1]}
                for i, m, lab, r in zip(model.ids, model.materials, model.labels, model.raw)
            ],
        }
    return {
        "version": MODEL_VERSION,
        "kind": "svm",
        "weights": list(model.weights),
        "bias": model.bias,
        "scaler": scaler,
        "C": model.C,
        "epochs": model.epochs,
        "seed": model.seed,
        "best_epoch": model.best_epoch,
        "best_objective": min(model.objective_history) if model.objective_history else None,
    }


def model_from_dict(d: dict) -> Model:
    if d.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {d.get('version')!r}")
    scaler = Scaler(tuple(d["scaler"]["mean"]), tuple(d["scaler"]["std"]))
    if d["kind"] == "knn":
        rows = d["train"]
        raw = np.array([[r["mean"], r["std"]] for r in rows], dtype=np.float64).reshape(-1, 2)
        return KnnModel(
            k=int(d["k"]),
            scaler=scaler,
            X=scaler.transform(raw),
            labels=tuple(r["background"] for r in rows),
            ids=tuple(r["image_id"] for r in rows),
            raw=tuple((float(a), float(b)) for a, b in raw),
            materials=tuple(r["material"] for r in rows),
        )
    if d["kind"] == "svm":
        return SvmModel(
            weights=(float(d["weights"][0]), float(d["weights"][1])),
            bias=float(d["bias"]),
            scaler=scaler,
            C=float(d["C"]),
            epochs=int(d["epochs"]),
            seed=int(d["seed"]),
            best_epoch=int(d.get("best_epoch", 0)),
        )
    raise ValueError(f"unknown model kind {d['kind']!r}")


def save_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
