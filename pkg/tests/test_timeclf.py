import json
import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikihoax.corpus import RATIOS
from wikihoax.timeclf import (
    MonthTokenDoc,
    SparseVec,
    TrainConfig,
    fit_tfidf,
    load_model,
    month_tokens,
    predict,
    run_timeline_experiment,
    save_model,
    train_and_evaluate,
    train_svm,
    transform,
)
from wikihoax.timeline import RevisionTimeline

UTC = timezone.utc


def tl(article_id, label, stamps):
    return RevisionTimeline(article_id=article_id, label=label,
                            timestamps=sorted(stamps))


def doc(article_id, *tokens):
    return MonthTokenDoc(article_id=article_id, tokens=list(tokens))


def dense_vec(*values):
    v = np.array(values, dtype=np.float64)
    return SparseVec(indices=np.arange(len(values), dtype=np.int64), values=v,
                     dim=len(values))


# --- month tokens ---------------------------------------------------------------

def test_month_tokens_hand_example():
    timeline = tl("a", 1, [
        datetime(2020, 1, 5, tzinfo=UTC),
        datetime(2020, 1, 20, tzinfo=UTC),
        datetime(2021, 3, 1, tzinfo=UTC),
    ])
    assert month_tokens(timeline).tokens == ["01-2020", "01-2020", "03-2021"]


def test_month_tokens_utc_boundary():
    timeline = tl("a", 1, [datetime(2019, 12, 31, 23, 59, 59, tzinfo=UTC)])
    assert month_tokens(timeline).tokens == ["12-2019"]


@given(st.lists(st.integers(min_value=0, max_value=5000), min_size=1, max_size=200))
@settings(max_examples=50)
def test_month_tokens_conserve_count(day_offsets):
    t0 = datetime(2010, 1, 1, tzinfo=UTC)
    timeline = tl("a", 0, [t0 + timedelta(days=d) for d in day_offsets])
    tok = month_tokens(timeline)
    assert len(tok.tokens) == len(day_offsets)
    assert all(len(t) == 7 and t[2] == "-" for t in tok.tokens)


# --- tf-idf ----------------------------------------------------------------------

def test_fit_tfidf_single_doc_idf_is_one():
    model = fit_tfidf([doc("d1", "01-2020", "02-2020")])
    assert np.allclose(model.idf, 1.0)


def test_fit_tfidf_hand_values():
    docs = [
        doc("d1", "01-2020", "01-2020", "02-2020"),
        doc("d2", "02-2020", "03-2020"),
        doc("d3", "01-2020"),
    ]
    model = fit_tfidf(docs)
    assert list(model.vocabulary) == ["01-2020", "02-2020", "03-2020"]
    assert model.idf[0] == pytest.approx(math.log(4 / 3) + 1, abs=1e-12)
    assert model.idf[1] == pytest.approx(math.log(4 / 3) + 1, abs=1e-12)
    assert model.idf[2] == pytest.approx(math.log(4 / 2) + 1, abs=1e-12)


def test_fit_tfidf_rejects_empty():
    with pytest.raises(ValueError, match="empty document list"):
        fit_tfidf([])
    with pytest.raises(ValueError, match="no tokens"):
        fit_tfidf([doc("d1")])


THREE_DOCS = [
    doc("d1", "01-2020", "01-2020", "02-2020"),
    doc("d2", "02-2020", "03-2020"),
    doc("d3", "01-2020"),
]


def test_transform_three_doc_fixture_hand_computed():
    model = fit_tfidf(THREE_DOCS)
    # d1: counts (2, 1) on columns 0 and 1, equal idf, so normalization
    # reduces to (2, 1)/sqrt(5).
    v1 = transform(model, THREE_DOCS[0])
    assert v1.indices.tolist() == [0, 1]
    assert v1.values[0] == pytest.approx(2 / math.sqrt(5), abs=1e-9)
    assert v1.values[1] == pytest.approx(1 / math.sqrt(5), abs=1e-9)
    # d2: one token each of idf ln(4/3)+1 and ln(2)+1.
    a, b = math.log(4 / 3) + 1, math.log(2) + 1
    norm = math.sqrt(a * a + b * b)
    v2 = transform(model, THREE_DOCS[1])
    assert v2.indices.tolist() == [1, 2]
    assert v2.values[0] == pytest.approx(a / norm, abs=1e-9)
    assert v2.values[1] == pytest.approx(b / norm, abs=1e-9)
    # d3: single in-vocabulary token gives a one-hot direction.
    v3 = transform(model, THREE_DOCS[2])
    assert v3.indices.tolist() == [0]
    assert v3.values[0] == pytest.approx(1.0, abs=1e-12)


def test_transform_unseen_tokens_zero_vector():
    model = fit_tfidf(THREE_DOCS)
    v = transform(model, doc("dx", "07-1999"))
    assert v.indices.shape[0] == 0
    assert v.dim == 3


@given(st.lists(st.sampled_from(["01-2020", "02-2020", "03-2020", "04-2021"]),
                min_size=0, max_size=30))
def test_transform_norm_is_zero_or_one(tokens):
    model = fit_tfidf(THREE_DOCS)
    v = transform(model, MonthTokenDoc(article_id="x", tokens=tokens))
    norm = float(np.linalg.norm(v.values))
    assert norm == pytest.approx(0.0, abs=1e-12) or norm == pytest.approx(1.0, abs=1e-9)


def test_fit_is_train_only():
    model = fit_tfidf(THREE_DOCS)
    before = (dict(model.vocabulary), model.idf.copy())
    transform(model, doc("test-doc", "09-2025", "01-2020"))
    assert model.vocabulary == before[0]
    assert np.array_equal(model.idf, before[1])


# --- svm ------------------------------------------------------------------------------

def blobs(n_per_class=100, seed=0, spread=0.5):
    rng = np.random.default_rng(seed)
    X, y = [], []
    for label, center in ((0, (-3.0, -3.0)), (1, (3.0, 3.0))):
        for _ in range(n_per_class):
            point = rng.normal(center, spread)
            X.append(dense_vec(*point))
            y.append(label)
    return X, y


def test_train_svm_separable_accuracy():
    X, y = blobs()
    model = train_svm(X, y, TrainConfig(seed=1))
    preds = [predict(model, x) for x in X]
    assert preds == y


def test_train_svm_objective_non_increasing_first_to_last():
    X, y = blobs(seed=3)
    model = train_svm(X, y, TrainConfig(seed=2, epochs=50))
    objs = model.epoch_objectives
    assert len(objs) == 50
    assert objs[-1] <= objs[0] + 1e-12


def test_train_svm_deterministic():
    X, y = blobs(seed=4)
    m1 = train_svm(X, y, TrainConfig(seed=9, epochs=30))
    m2 = train_svm(X, y, TrainConfig(seed=9, epochs=30))
    assert np.array_equal(m1.weights, m2.weights)
    assert m1.bias == m2.bias
    m3 = train_svm(X, y, TrainConfig(seed=10, epochs=30))
    assert not np.array_equal(m1.weights, m3.weights)


def test_train_svm_large_c_drives_hinge_down():
    X, y = blobs(seed=5)
    model = train_svm(X, y, TrainConfig(C=50.0, seed=1, epochs=200))
    y_signed = np.array([1.0 if v == 1 else -1.0 for v in y])
    hinge = 0.0
    for x, ys in zip(X, y_signed):
        score = float(model.weights[x.indices] @ x.values) + model.bias
        hinge += max(0.0, 1.0 - ys * score)
    assert hinge / len(X) <= 1e-3


def test_train_svm_class_weighting_config_echo():
    X, y = blobs(n_per_class=20)
    model = train_svm(X, y, TrainConfig(class_weighting=True, epochs=5))
    assert model.config["class_weighting"] is True


def test_train_svm_rejects_bad_inputs():
    X, y = blobs(n_per_class=5)
    with pytest.raises(ValueError, match="both classes"):
        train_svm(X[:5], y[:5], TrainConfig())
    bad = [dense_vec(float("inf"), 1.0)] + X[1:]
    with pytest.raises(ValueError, match="non-finite"):
        train_svm(bad, y, TrainConfig())
    with pytest.raises(ValueError, match="at least 2"):
        train_svm(X[:1], y[:1], TrainConfig())


def test_predict_sign_rule():
    model_pos = train_svm(*blobs(n_per_class=10), TrainConfig(epochs=5))
    # Hand-built model: w=(1,0), b=0.
    from wikihoax.timeclf import LinearModel

    m = LinearModel(weights=np.array([1.0, 0.0]), bias=0.0, config={})
    assert predict(m, dense_vec(2.0, 0.0)) == 1
    assert predict(m, dense_vec(0.0, 5.0)) == 0  # score exactly 0 -> negative class
    assert predict(m, dense_vec(-2.0, 1.0)) == 0
    with pytest.raises(ValueError, match="dimension"):
        predict(m, dense_vec(1.0, 2.0, 3.0))
    del model_pos


def test_predict_matches_dot_product_oracle():
    X, y = blobs(n_per_class=30, seed=8)
    model = train_svm(X, y, TrainConfig(seed=3, epochs=20))
    for x in X:
        dense = np.zeros(x.dim)
        dense[x.indices] = x.values
        score = float(np.dot(model.weights, dense)) + model.bias
        assert predict(model, x) == (1 if score > 0 else 0)


# --- persistence ------------------------------------------------------------------------

def test_model_roundtrip(tmp_path):
    docs = THREE_DOCS
    tfidf = fit_tfidf(docs)
    X = [transform(tfidf, d) for d in docs]
    y = [1, 0, 1]
    model = train_svm(X, y, TrainConfig(epochs=10))
    path = tmp_path / "model.json"
    save_model(model, tfidf, path)
    loaded_model, loaded_tfidf = load_model(path)
    assert np.allclose(loaded_model.weights, model.weights)
    assert loaded_model.bias == pytest.approx(model.bias)
    assert loaded_tfidf.vocabulary == tfidf.vocabulary
    doc_json = json.loads(path.read_text())
    assert doc_json["format_version"] == 1
    assert doc_json["config"]["epochs"] == 10


# --- end-to-end experiment ---------------------------------------------------------------

def synthetic_timelines(n_hoax=12, n_legit=24, seed=0):
    # Hoaxes revise only in the first and last months; legitimate
    # articles are spread uniformly. Perfectly separable by month tokens.
    rng = np.random.default_rng(seed)
    t0 = datetime(2018, 1, 1, tzinfo=UTC)
    out = []
    for i in range(n_hoax):
        stamps = [t0 + timedelta(days=float(rng.uniform(0, 20))) for _ in range(5)]
        stamps += [t0 + timedelta(days=700 + float(rng.uniform(0, 20))) for _ in range(5)]
        out.append(tl(f"h{i}", 1, stamps))
    for i in range(n_legit):
        stamps = [t0 + timedelta(days=float(rng.uniform(60, 630))) for _ in range(10)]
        out.append(tl(f"n{i}", 0, stamps))
    return out

def test_run_timeline_experiment_separable():
    report = run_timeline_experiment(synthetic_timelines(), RATIOS["1h2r"], seed=5)
    assert report.per_class[1]["f1"] == pytest.approx(1.0)


def test_run_timeline_experiment_deterministic():
    timelines = synthetic_timelines(seed=2)
    r1 = train_and_evaluate(timelines, RATIOS["1h2r"], seed=7)
    r2 = train_and_evaluate(timelines, RATIOS["1h2r"], seed=7)
    assert np.array_equal(r1.model.weights, r2.model.weights)
    assert r1.test_ids == r2.test_ids
    assert r1.report.macro_f1 == r2.report.macro_f1


def test_run_timeline_experiment_trims_negative_pool():
    timelines = synthetic_timelines(n_hoax=4, n_legit=20)
    result = train_and_evaluate(timelines, RATIOS["1h2r"], seed=1)
    used = {i for i in result.train_ids + result.test_ids if i.startswith("n")}
    assert len(used) == 8  # 2 negatives per hoax


def test_run_timeline_experiment_requires_both_labels():
    timelines = [t for t in synthetic_timelines() if t.label == 1]
    with pytest.raises(ValueError, match="both labels"):
        run_timeline_experiment(timelines, RATIOS["1h2r"], seed=1)
