"""Command line entry point: ``inscribe <verb> ...``.

Verbs::

    synth     write a seeded synthetic corpus and its manifest
    enhance   binarize and clean images (a manifest or individual files)
    features  enhance a manifest and write features.csv / regions.csv / histogram.csv
    train     fit one classifier on the training split of a features.csv
    evaluate  score a saved model on the test split recorded with it
    pipeline  everything above in one go

Exit status: 0 on success, 2 for a bad manifest, 3 when a stratum is too
small to split, 1 for anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .binarize import METHODS, POLARITIES, ThresholdParams
from .classify import evaluate, model_from_dict, model_to_dict, split_dataset
from .errors import InscribeError, ManifestParseError, StratumTooSmall
from .morphology import CleanupConfig
from .pipeline import (
    CLASSIFIERS,
    PipelineConfig,
    enhance_manifest,
    enhance_one,
    parse_manifest,
    read_features_csv,
    run_pipeline,
    train_classifier,
    write_features_csv,
    write_histogram_csv,
    write_json,
    write_regions_csv,
)
from .synth import generate_synthetic_corpus

EXIT_OK, EXIT_OTHER, EXIT_MANIFEST, EXIT_STRATUM = 0, 1, 2, 3


def _odd(text: str) -> int:
    v = int(text)
    if v < 1 or v % 2 == 0:
        raise argparse.ArgumentTypeError(f"expected an odd positive integer, got {text}")
    return v


def _add_threshold_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("binarization")
    g.add_argument("--method", choices=METHODS, default="auto")
    g.add_argument("--window", type=_odd, default=31)
    g.add_argument("--k", type=float, default=None, help="Niblack/Sauvola k (default: per method)")
    g.add_argument("--R", type=float, default=128.0, help="Sauvola dynamic range")
    g.add_argument("--polarity", choices=POLARITIES, default="dark-text")
    g.add_argument("--regularity-cutoff", type=float, default=18.0)
    g.add_argument("--block", type=int, default=16, help="block size for the regularity score")

    g = p.add_argument_group("cleanup")
    g.add_argument("--no-remove-small", dest="remove_small", action="store_false")
    g.add_argument("--min-area", type=int, default=8)
    g.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    g.add_argument("--no-close", dest="close", action="store_false")
    g.add_argument("--open", action="store_true")
    g.add_argument("--se-size", type=_odd, default=3)
    g.add_argument("--se-shape", choices=("box", "cross"), default="box")
    p.add_argument("--enhanced-format", choices=("pgm", "pbm"), default="pgm")


def _add_classifier_args(p: argparse.ArgumentParser, multi: bool) -> None:
    g = p.add_argument_group("classification")
    if multi:
        g.add_argument("--classifiers", nargs="+", choices=CLASSIFIERS, default=list(CLASSIFIERS))
    else:
        g.add_argument("--classifier", choices=CLASSIFIERS, default="knn")
    g.add_argument("--knn-k", type=_odd, default=3)
    g.add_argument("--C", type=float, default=1.0)
    g.add_argument("--epochs", type=int, default=1000)
    g.add_argument("--ratio", type=float, default=0.8)
    g.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inscribe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=25, help="images per material/background pair")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--size", type=int, default=128)

    p = sub.add_parser("enhance", help="binarize and clean images")
    p.add_argument("inputs", nargs="+", help="a manifest (.json) or image files")
    p.add_argument("--out", required=True)
    _add_threshold_args(p)

    p = sub.add_parser("features", help="write per-image and per-region features")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    _add_threshold_args(p)

    p = sub.add_parser("train", help="train a classifier from features.csv")
    p.add_argument("features")
    p.add_argument("--model", required=True, help="output model JSON")
    _add_classifier_args(p, multi=False)

    p = sub.add_parser("evaluate", help="evaluate a saved model")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("--out", help="write the report JSON here")

    p = sub.add_parser("pipeline", help="enhance, extract, split, train and evaluate")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    _add_threshold_args(p)
    _add_classifier_args(p, multi=True)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    kw = {}
    if hasattr(args, "method"):
        kw["threshold"] = ThresholdParams(
            method=args.method, window=args.window, k=args.k, R=args.R, polarity=args.polarity,
            regularity_cutoff=args.regularity_cutoff, block=args.block,
        )
        kw["cleanup"] = CleanupConfig(
            remove_small=args.remove_small, min_area=args.min_area, connectivity=args.connectivity,
            close=args.close, open=args.open, se_size=args.se_size, se_shape=args.se_shape,
        )
        kw["enhanced_format"] = args.enhanced_format
    if hasattr(args, "knn_k"):
        classifiers = getattr(args, "classifiers", None) or [args.classifier]
        kw.update(classifiers=tuple(dict.fromkeys(classifiers)), knn_k=args.knn_k, C=args.C,
                  epochs=args.epochs, ratio=args.ratio, seed=args.seed)
    return PipelineConfig(**kw)


def _cmd_synth(args) -> int:
    manifest = generate_synthetic_corpus(args.out, n=args.n, seed=args.seed, size=args.size)
    print(f"wrote {len(manifest['entries'])} images to {args.out}")
    return EXIT_OK


def _cmd_enhance(args) -> int:
    config = config_from_args(args)
    failed = 0
    for item in args.inputs:
        if item.endswith(".json"):
            results, _, skipped = enhance_manifest(parse_manifest(item), config, args.out)
            for r in results:
                print(r.image_id, json.dumps(r.route, sort_keys=True))
            for s in skipped:
                print(f"skipped {s['image_id']}: {s['error']}", file=sys.stderr)
            failed += len(skipped)
            continue
        try:
            r = enhance_one(item, config, os.path.join(args.out, "enhanced"))
        except (InscribeError, OSError) as exc:
            print(f"skipped {item}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failed += 1
            continue
        print(r.image_id, json.dumps(r.route, sort_keys=True))
    return EXIT_OTHER if failed else EXIT_OK


def _cmd_features(args) -> int:
    config = config_from_args(args)
    os.makedirs(args.out, exist_ok=True)
    results, samples, skipped = enhance_manifest(parse_manifest(args.manifest), config, args.out)
    write_features_csv(samples, os.path.join(args.out, "features.csv"))
    write_regions_csv(results, os.path.join(args.out, "regions.csv"))
    write_histogram_csv(samples, os.path.join(args.out, "histogram.csv"))
    for s in skipped:
        print(f"skipped {s['image_id']}: {s['error']}", file=sys.stderr)
    print(f"processed {len(samples)}, skipped {len(skipped)}")
    return EXIT_OK


def _cmd_train(args) -> int:
    config = config_from_args(args)
    train, test = split_dataset(read_features_csv(args.features), config.ratio, config.seed)
    model = train_classifier(config.classifiers[0], train, config)
    doc = model_to_dict(model)
    doc["split"] = {"seed": config.seed, "ratio": config.ratio,
                    "train": [s.image_id for s in train], "test": [s.image_id for s in test]}
    write_json(doc, args.model)
    print(f"trained {doc['kind']} on {len(train)} samples; {len(test)} held out")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    with open(args.model) as fh:
        doc = json.load(fh)
    model = model_from_dict(doc)
    samples = read_features_csv(args.features)
    split = doc.get("split")
    if split:
        wanted = set(split["test"])
        test = [s for s in samples if s.image_id in wanted]
    else:
        test = samples
    report = evaluate(model, test, seed=split["seed"] if split else None).to_dict()
    if args.out:
        write_json(report, args.out)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    config = config_from_args(args)
    result = run_pipeline(parse_manifest(args.manifest), config, args.out)
    rep = result.report
    for name in config.classifiers:
        per = ", ".join(f"{m} {a:.3f}" for m, a in rep["per_material"][name].items())
        print(f"{name}: overall {rep['overall_accuracy'][name]:.3f} ({per})")
    c = rep["counts"]
    print(f"processed {c['processed']}/{c['manifest']}, skipped {c['skipped']}, train {c['train']}, test {c['test']}")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "enhance": _cmd_enhance,
    "features": _cmd_features,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.verb](args)
    except ManifestParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except StratumTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRATUM
    except (InscribeError, ValueError, OSError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
