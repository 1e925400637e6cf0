import json

import numpy as np
import pytest

from inscribe.cli import build_parser, config_from_args, main
from inscribe.raster import GrayRaster, save_gray


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out", str(root), "--n", "3", "--seed", "5", "--size", "80"]) == 0
    return root


def test_flags_reach_config():
    args = build_parser().parse_args([
        "pipeline", "m.json", "--out", "o", "--method", "local-niblack", "--window", "15", "--k", "-0.3",
        "--R", "100", "--polarity", "light-text", "--regularity-cutoff", "9", "--block", "8", "--min-area", "3",
        "--connectivity", "4", "--no-close", "--open", "--se-size", "5", "--se-shape", "cross",
        "--no-remove-small", "--classifiers", "svm", "--knn-k", "5", "--C", "2", "--epochs", "7",
        "--ratio", "0.7", "--seed", "9", "--enhanced-format", "pbm",
    ])
    cfg = config_from_args(args)
    t, c = cfg.threshold, cfg.cleanup
    assert (t.method, t.window, t.k, t.R, t.polarity, t.regularity_cutoff, t.block) == (
        "local-niblack", 15, -0.3, 100.0, "light-text", 9.0, 8)
    assert (c.min_area, c.connectivity, c.close, c.open, c.se_size, c.se_shape, c.remove_small) == (
        3, 4, False, True, 5, "cross", False)
    assert (cfg.classifiers, cfg.knn_k, cfg.C, cfg.epochs, cfg.ratio, cfg.seed, cfg.enhanced_format) == (
        ("svm",), 5, 2.0, 7, 0.7, 9, "pbm")


def test_even_window_rejected():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["enhance", "x.pgm", "--out", "o", "--window", "4"])


def test_pipeline(corpus, tmp_path, capsys):
    assert main(["pipeline", str(corpus / "manifest.json"), "--out", str(tmp_path), "--epochs", "20"]) == 0
    assert "knn: overall" in capsys.readouterr().out
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["config"]["epochs"] == 20


def test_features_train_evaluate(corpus, tmp_path, capsys):
    assert main(["features", str(corpus / "manifest.json"), "--out", str(tmp_path)]) == 0
    feats = str(tmp_path / "features.csv")
    model = str(tmp_path / "svm.json")
    assert main(["train", feats, "--model", model, "--classifier", "svm", "--epochs", "30", "--seed", "4"]) == 0
    doc = json.loads((tmp_path / "svm.json").read_text())
    assert doc["kind"] == "svm" and len(doc["split"]["test"]) == 6
    capsys.readouterr()
    assert main(["evaluate", model, feats, "--out", str(tmp_path / "rep.json")]) == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["counts"]["test"] == 6 and rep["seed"] == 4
    assert json.loads(capsys.readouterr().out) == rep


def test_enhance_files(tmp_path, capsys):
    a = np.full((40, 40), 210, dtype=np.uint8)
    a[10:30, 18:22] = 30
    save_gray(GrayRaster(a), tmp_path / "bar.pgm")
    save_gray(GrayRaster(np.full((8, 8), 255, dtype=np.uint8)), tmp_path / "blank.pgm")
    assert main(["enhance", str(tmp_path / "bar.pgm"), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "enhanced" / "bar.pgm").exists()
    assert main(["enhance", str(tmp_path / "blank.pgm"), "--out", str(tmp_path / "o")]) == 1
    assert "DegenerateHistogram" in capsys.readouterr().err


def test_enhance_manifest(corpus, tmp_path):
    assert main(["enhance", str(corpus / "manifest.json"), "--out", str(tmp_path)]) == 0
    assert len(list((tmp_path / "enhanced").iterdir())) == 18


def test_manifest_error_exit_code(tmp_path, capsys):
    (tmp_path / "m.json").write_text('{"entries": [{"path": "a", "image_id": "a", "material": "wood", '
                                     '"background": "regular"}]}')
    assert main(["pipeline", str(tmp_path / "m.json"), "--out", str(tmp_path / "o")]) == 2
    assert "material" in capsys.readouterr().err


def test_stratum_error_exit_code(corpus, tmp_path):
    doc = json.loads((corpus / "manifest.json").read_text())
    doc["entries"] = [e for e in doc["entries"] if e["image_id"] not in ("stone_regular_000", "stone_regular_001")]
    for e in doc["entries"]:
        e["path"] = str(corpus / e["path"])
    (tmp_path / "m.json").write_text(json.dumps(doc))
    assert main(["pipeline", str(tmp_path / "m.json"), "--out", str(tmp_path / "o")]) == 3


def test_other_error_exit_code(tmp_path):
    assert main(["evaluate", str(tmp_path / "missing.json"), str(tmp_path / "f.csv")]) == 1
