import json
import math
import statistics
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inscribe.classify import (
    REFERENCE_ACCURACY,
    LabeledSample,
    SvmModel,
    apply_scaler,
    evaluate,
    fit_scaler,
    knn_predict,
    knn_train,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    split_dataset,
    svm_objective,
    svm_predict,
    svm_train,
)
from inscribe.errors import SingleClassTrainingSet, StratumTooSmall
from inscribe.features import FeatureVector

MATS = ("stone", "metal", "document")


def sample(i, x, y, background="regular", material="stone"):
    return LabeledSample(f"s{i:04d}", material, background, FeatureVector(float(x), float(y)))


def random_set(rng, n, materials=MATS):
    out = []
    for i in range(n):
        bg = "irregular" if rng.random() < 0.5 else "regular"
        shift = 2.0 if bg == "irregular" else 0.0
        out.append(sample(i, 100 + 40 * (rng.normal() + shift), 30 + 10 * rng.normal(), bg,
                          materials[i % len(materials)]))
    return out


def knn_oracle(train, query, k):
    """Full scan with independently computed z-scores."""
    cols = list(zip(*[s.x for s in train]))
    mu, sd = [], []
    for c in cols:
        spread = statistics.pstdev(c)
        mu.append(statistics.fmean(c) if spread else 0.0)
        sd.append(spread or 1.0)

    def z(p):
        return [(p[d] - mu[d]) / sd[d] for d in range(2)]

    q = z(query)
    ranked = sorted(train, key=lambda s: (sum((a - b) ** 2 for a, b in zip(z(s.x), q)), s.image_id))[:k]
    votes = Counter(s.background for s in ranked)
    top = max(votes.values())
    winners = [lab for lab, c in votes.items() if c == top]
    return winners[0] if len(winners) == 1 else ranked[0].background


class TestSplit:
    def test_single_stratum(self):
        tr, te = split_dataset([sample(i, i, i) for i in range(10)], 0.8, seed=1)
        assert (len(tr), len(te)) == (8, 2)

    def test_table_counts(self):
        counts = {("stone", "regular"): 40, ("stone", "irregular"): 60, ("metal", "regular"): 20,
                  ("metal", "irregular"): 80, ("document", "regular"): 30, ("document", "irregular"): 20}
        data, i = [], 0
        for (m, b), n in counts.items():
            for _ in range(n):
                data.append(sample(i, i, i, b, m))
                i += 1
        tr, te = split_dataset(data, 0.8, seed=3)
        assert (len(tr), len(te)) == (200, 50)
        per = Counter((s.material, s.background) for s in tr)
        assert all(per[key] == math.floor(0.8 * n) for key, n in counts.items())

    def test_deterministic_and_disjoint(self, rng):
        data = random_set(rng, 60)
        a = split_dataset(data, 0.8, seed=11)
        b = split_dataset(list(reversed(data)), 0.8, seed=11)
        assert [s.image_id for s in a[0]] == [s.image_id for s in b[0]]
        ids_tr = {s.image_id for s in a[0]}
        ids_te = {s.image_id for s in a[1]}
        assert not ids_tr & ids_te and len(ids_tr | ids_te) == 60

    def test_seed_changes_split(self, rng):
        data = random_set(rng, 60)
        assert {s.image_id for s in split_dataset(data, 0.8, 1)[1]} != {s.image_id for s in split_dataset(data, 0.8, 2)[1]}

    def test_tiny_stratum(self):
        with pytest.raises(StratumTooSmall):
            split_dataset([sample(0, 1, 1), sample(1, 1, 1), sample(2, 1, 1, "irregular")])

    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            split_dataset([sample(0, 1, 1), sample(0, 2, 2)])

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(2, 30), min_size=1, max_size=6), st.floats(0.05, 0.95), st.integers(0, 10**6))
    def test_proportions(self, sizes, ratio, seed):
        keys = [(m, b) for m in MATS for b in ("regular", "irregular")]
        data, i = [], 0
        for (m, b), n in zip(keys, sizes):
            for _ in range(n):
                data.append(sample(i, 0, 0, b, m))
                i += 1
        tr, te = split_dataset(data, ratio, seed)
        per = Counter((s.material, s.background) for s in tr)
        for key, n in zip(keys, sizes):
            assert per[key] == math.floor(ratio * n + 1e-9)
        assert len(tr) + len(te) == len(data)


class TestScaler:
    def test_definition(self):
        train = [sample(0, 50, 10), sample(1, 150, 30)]
        sc = fit_scaler(train)
        assert sc.mean == (100.0, 20.0) and sc.std == (50.0, 10.0)
        assert apply_scaler(sc, FeatureVector(150, 30)).tolist() == [[1.0, 1.0]]

    def test_standardises_training_set(self, rng):
        train = random_set(rng, 40)
        Z = apply_scaler(fit_scaler(train), train)
        assert np.allclose(Z.mean(axis=0), 0, atol=1e-9) and np.allclose(Z.std(axis=0), 1, atol=1e-9)

    def test_constant_dimension_passes_through(self):
        train = [sample(i, i, 5.0) for i in range(4)]
        sc = fit_scaler(train)
        assert sc.mean[1] == 0.0 and sc.std[1] == 1.0
        assert apply_scaler(sc, FeatureVector(1.5, 5.0))[0, 1] == 5.0


class TestKnn:
    def test_k1_nearest(self):
        m = knn_train([sample(0, 0, 0, "regular"), sample(1, 10, 10, "irregular")], k=1)
        assert knn_predict(m, FeatureVector(1, 1)) == "regular"

    def test_majority(self):
        train = [sample(0, 0, 0, "regular"), sample(1, 5, 5, "irregular"), sample(2, 6, 6, "irregular"),
                 sample(3, 100, 100, "regular"), sample(4, 90, 95, "regular")]
        assert knn_predict(knn_train(train, 3), FeatureVector(4, 4)) == "irregular"

    def test_distance_tie_goes_to_smaller_id(self):
        train = [sample(2, -1, 0, "irregular"), sample(1, 1, 0, "regular"), sample(3, 0, 5, "irregular")]
        assert knn_predict(knn_train(train, 1), FeatureVector(0, 0)) == "regular"

    def test_self_prediction_k1(self, rng):
        train = random_set(rng, 50)
        m = knn_train(train, 1)
        assert knn_predict(m, train) == [s.background for s in train]

    def test_matches_oracle(self, rng):
        train = random_set(rng, 40)
        for k in (1, 3, 5):
            m = knn_train(train, k)
            for q in rng.normal(size=(60, 2)) * [60, 15] + [140, 30]:
                assert knn_predict(m, q) == knn_oracle(train, q, k)

    def test_scale_invariance(self, rng):
        train = random_set(rng, 30)
        queries = rng.normal(size=(50, 2)) * [60, 15] + [140, 30]
        base = knn_predict(knn_train(train, 3), queries)
        for c in (0.01, 3.0, 250.0):
            scaled = [LabeledSample(s.image_id, s.material, s.background,
                                    FeatureVector(s.features.mean * c, s.features.std * c)) for s in train]
            assert knn_predict(knn_train(scaled, 3), queries * c) == base

    @pytest.mark.parametrize("k", [0, 2, 7])
    def test_bad_k(self, k):
        with pytest.raises(ValueError):
            knn_train([sample(i, i, i) for i in range(5)], k)


def separable(n_per, seed):
    r = np.random.default_rng(seed)
    out = []
    for i in range(2 * n_per):
        bg = "irregular" if i % 2 else "regular"
        x = (1.5 if bg == "irregular" else -1.5) + r.uniform(-0.4, 0.4)
        out.append(sample(i, x, r.normal(), bg, MATS[i % 3]))
    return out


class TestSvm:
    def test_sign_rule(self):
        sc = fit_scaler([sample(0, -1, -1), sample(1, 1, 1)])
        m = SvmModel((1.0, 0.0), 0.0, sc)
        assert svm_predict(m, FeatureVector(3, 5)) == "irregular"
        assert svm_predict(m, FeatureVector(-3, 5)) == "regular"
        assert svm_predict(m, FeatureVector(0, 5)) == "irregular"

    def test_separable_training_accuracy(self):
        train = separable(50, 42)
        m = svm_train(train, epochs=200, seed=42)
        assert svm_predict(m, train) == [s.background for s in train]

    def test_deterministic(self):
        train = separable(20, 3)
        a = svm_train(train, epochs=50, seed=5)
        b = svm_train(train, epochs=50, seed=5)
        assert a.weights == b.weights and a.bias == b.bias

    def test_best_iterate(self):
        train = random_set(np.random.default_rng(9), 60)
        m = svm_train(train, epochs=40, seed=1)
        Z = m.scaler.transform([s.x for s in train])
        y = np.array([1.0 if s.background == "irregular" else -1.0 for s in train])
        final = svm_objective(m.weights, m.bias, Z, y, m.C)
        assert final == pytest.approx(min(m.objective_history))
        assert final <= m.objective_history[0]
        assert all(math.isfinite(v) for v in (*m.weights, m.bias))

    def test_single_class(self):
        with pytest.raises(SingleClassTrainingSet):
            svm_train([sample(i, i, i) for i in range(4)])

    @pytest.mark.parametrize("kw", [dict(C=0), dict(epochs=0)])
    def test_bad_hyperparams(self, kw):
        with pytest.raises(ValueError):
            svm_train(separable(3, 0), **kw)


class TestEvaluate:
    def test_perfect(self):
        train = separable(30, 1)
        rep = evaluate(knn_train(train, 3), train)
        assert rep.overall_accuracy == 1.0
        assert rep.confusion["regular"]["irregular"] == rep.confusion["irregular"]["regular"] == 0

    def test_all_flipped(self):
        train = separable(30, 1)
        flipped = [LabeledSample(s.image_id, s.material, "regular" if s.background == "irregular" else "irregular",
                                 s.features) for s in train]
        rep = evaluate(knn_train(train, 1), flipped)
        assert rep.overall_accuracy == 0.0

    def test_consistency(self, rng):
        data = random_set(rng, 90)
        tr, te = split_dataset(data, 0.8, 4)
        rep = evaluate(svm_train(tr, epochs=30), te, seed=4)
        total = sum(sum(row.values()) for row in rep.confusion.values())
        trace = sum(rep.confusion[b][b] for b in rep.confusion)
        assert total == len(te) and rep.overall_accuracy == trace / total
        for m in MATS:
            sub = [s for s in te if s.material == m]
            assert rep.per_material[m] == sum(rep.predictions[s.image_id] == s.background for s in sub) / len(sub)

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate(knn_train(separable(2, 0), 1), [])

    def test_reference_values_recorded(self):
        assert REFERENCE_ACCURACY["knn"]["document"] == 0.656
        assert REFERENCE_ACCURACY["svm"]["document"] == 0.678


@pytest.mark.parametrize("kind", ["knn", "svm"])
def test_model_round_trip(tmp_path, rng, kind):
    train = random_set(rng, 40)
    model = knn_train(train, 3) if kind == "knn" else svm_train(train, epochs=20, seed=2)
    save_model(model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    queries = rng.normal(size=(30, 2)) * [60, 15] + [140, 30]
    assert predict(back, queries) == predict(model, queries)
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["version"] == 1 and doc["kind"] == kind


def test_model_version_checked():
    doc = model_to_dict(knn_train(separable(2, 0), 1))
    doc["version"] = 99
    with pytest.raises(ValueError):
        model_from_dict(doc)
