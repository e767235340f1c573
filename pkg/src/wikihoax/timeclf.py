"""Month-token timeline classifier: TF-IDF features into a linear SVM.

Every revision contributes one "MM-YYYY" token; an article's timeline
becomes a bag of months. TF-IDF is fitted on training documents only,
and the margin classifier is trained by a deterministic epoch-based
subgradient method, so a (data, seed, config) triple always reproduces
the same model file byte for byte.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from wikihoax import accel, metrics
from wikihoax.corpus import FORMAT_VERSION, RatioSetting, split_ids

log = logging.getLogger(__name__)


@dataclass
class MonthTokenDoc:
    article_id: str
    tokens: list


@dataclass
class TfidfModel:
    vocabulary: dict  # token -> column index, dense in [0, |vocab|)
    idf: np.ndarray
    doc_count: int


@dataclass
class SparseVec:
    indices: np.ndarray
    values: np.ndarray
    dim: int


@dataclass
class TrainConfig:
    C: float = 1.0
    epochs: int = 200
    seed: int = 0
    class_weighting: bool = False


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    config: dict
    epoch_objectives: list = field(default_factory=list)


def month_tokens(timeline) -> MonthTokenDoc:
    """One zero-padded "MM-YYYY" token per revision, in timestamp order."""
    tokens = [f"{ts.month:02d}-{ts.year:04d}" for ts in timeline.timestamps]
    return MonthTokenDoc(article_id=timeline.article_id, tokens=tokens)


def fit_tfidf(docs: list[MonthTokenDoc]) -> TfidfModel:
    """Vocabulary over all training tokens with smoothed idf weights.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1. The vocabulary is sorted so
    fitting is order-independent and models serialize identically across
    runs.
    """
    if not docs:
        raise ValueError("cannot fit TF-IDF on an empty document list")
    df: dict[str, int] = {}
    for doc in docs:
        for token in set(doc.tokens):
            df[token] = df.get(token, 0) + 1
    if not df:
        raise ValueError("cannot fit TF-IDF: no tokens in any document")
    vocabulary = {token: i for i, token in enumerate(sorted(df))}
    n = len(docs)
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for token, i in vocabulary.items():
        idf[i] = math.log((1.0 + n) / (1.0 + df[token])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, doc_count=n)


def transform(model: TfidfModel, doc: MonthTokenDoc) -> SparseVec:
    """tf * idf, L2-normalized. Unseen tokens are ignored.

    A document whose tokens are all out of vocabulary becomes the zero
    vector; that is a valid (if uninformative) input downstream.
    """
    counts: dict[int, float] = {}
    for token in doc.tokens:
        col = model.vocabulary.get(token)
        if col is not None:
            counts[col] = counts.get(col, 0.0) + 1.0
    if not counts:
        log.info("document '%s' has no in-vocabulary tokens", doc.article_id)
        return SparseVec(
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0, dtype=np.float64),
            dim=len(model.vocabulary),
        )
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    values *= model.idf[indices]
    values /= np.linalg.norm(values)
    return SparseVec(indices=indices, values=values, dim=len(model.vocabulary))


def _to_csr(X: list[SparseVec]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr = np.zeros(len(X) + 1, dtype=np.int64)
    for i, x in enumerate(X):
        indptr[i + 1] = indptr[i] + x.indices.shape[0]
    indices = np.concatenate([x.indices for x in X]) if X else np.empty(0, np.int64)
    data = np.concatenate([x.values for x in X]) if X else np.empty(0, np.float64)
    return indptr, indices.astype(np.int64), data.astype(np.float64)


def train_svm(X: list[SparseVec], y: list, config: TrainConfig | None = None) -> LinearModel:
    """L2-regularized hinge-loss minimization by subgradient epochs.

    lambda = 1 / (C * n); learning rate 1/(lambda * t); the returned
    weights are the average of all iterates, whose end-of-epoch
    objective values are recorded on the model. With class_weighting
    on, each example's loss is scaled by n / (2 * n_class).
    """
    if config is None:
        config = TrainConfig()
    n = len(X)
    if n != len(y):
        raise ValueError(f"got {n} feature vectors but {len(y)} labels")
    if n < 2:
        raise ValueError("training needs at least 2 examples")
    classes = set(y)
    if classes != {0, 1}:
        raise ValueError(f"training data must contain both classes, got {sorted(classes)}")
    dim = X[0].dim
    for x in X:
        if x.dim != dim:
            raise ValueError("inconsistent feature dimensions")
        if not np.all(np.isfinite(x.values)):
            raise ValueError("non-finite feature value")
    if config.epochs < 1 or config.C <= 0:
        raise ValueError("epochs must be >= 1 and C > 0")

    indptr, indices, data = _to_csr(X)
    y_signed = np.array([1.0 if label == 1 else -1.0 for label in y], dtype=np.float64)
    if config.class_weighting:
        n_pos = sum(1 for label in y if label == 1)
        w_pos, w_neg = n / (2.0 * n_pos), n / (2.0 * (n - n_pos))
        cw = np.array([w_pos if label == 1 else w_neg for label in y], dtype=np.float64)
    else:
        cw = np.ones(n, dtype=np.float64)
    lam = 1.0 / (config.C * n)

    # Shuffle orders are drawn up front from one seeded generator, so
    # the compiled and fallback kernels see the identical sample stream.
    rng = np.random.default_rng(config.seed)
    order = np.empty((config.epochs, n), dtype=np.int64)
    for e in range(config.epochs):
        order[e] = rng.permutation(n)

    weights, bias, objectives = accel.svm_epochs(
        indptr, indices, data, y_signed, cw, order, lam, dim
    )
    return LinearModel(
        weights=weights,
        bias=float(bias),
        config={
            "C": config.C,
            "epochs": config.epochs,
            "seed": config.seed,
            "class_weighting": config.class_weighting,
        },
        epoch_objectives=[float(v) for v in objectives],
    )


def predict(model: LinearModel, x: SparseVec) -> int:
    """1 when the margin is strictly positive, else 0."""
    if x.dim != model.weights.shape[0]:
        raise ValueError(
            f"feature dimension {x.dim} does not match model dimension "
            f"{model.weights.shape[0]}"
        )
    score = float(model.weights[x.indices] @ x.values) + model.bias
    return 1 if score > 0.0 else 0


def save_model(model: LinearModel, tfidf: TfidfModel, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": "timeline-model",
        "vocabulary": model_vocab_list(tfidf),
        "idf": [float(v) for v in tfidf.idf],
        "weights": [float(v) for v in model.weights],
        "bias": model.bias,
        "config": model.config,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def model_vocab_list(tfidf: TfidfModel) -> list:
    ordered = [""] * len(tfidf.vocabulary)
    for token, i in tfidf.vocabulary.items():
        ordered[i] = token
    return ordered


def load_model(path) -> tuple[LinearModel, TfidfModel]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "timeline-model":
        raise ValueError(f"not a timeline model file: {path}")
    vocab = {token: i for i, token in enumerate(doc["vocabulary"])}
    tfidf = TfidfModel(
        vocabulary=vocab,
        idf=np.array(doc["idf"], dtype=np.float64),
        doc_count=0,
    )
    model = LinearModel(
        weights=np.array(doc["weights"], dtype=np.float64),
        bias=float(doc["bias"]),
        config=doc["config"],
    )
    return model, tfidf


@dataclass
class ExperimentResult:
    report: metrics.EvalReport
    model: LinearModel
    tfidf: TfidfModel
    train_ids: list
    test_ids: list


def train_and_evaluate(
    timelines: list,
    ratio: RatioSetting,
    seed: int,
    config: TrainConfig | None = None,
    test_fraction: float = 0.3,
) -> ExperimentResult:
    """Split, fit features on train only, train, and score on test.

    When more negatives are available than ratio.negatives_per_hoax per
    hoax, a deterministic seeded subsample trims the pool to size first.
    """
    if config is None:
        config = TrainConfig(seed=seed)
    by_id = {tl.article_id: tl for tl in timelines}
    hoax_ids = sorted(t.article_id for t in timelines if t.label == 1)
    neg_ids = sorted(t.article_id for t in timelines if t.label == 0)
    if not hoax_ids or not neg_ids:
        raise ValueError("timelines must contain both labels")
    budget = ratio.negatives_per_hoax * len(hoax_ids)
    if len(neg_ids) > budget:
        rng = np.random.default_rng(seed)
        keep = rng.permutation(len(neg_ids))[:budget]
        neg_ids = sorted(neg_ids[i] for i in keep)
    train_ids, test_ids = split_ids(hoax_ids, neg_ids, seed, test_fraction)

    train_docs = [month_tokens(by_id[i]) for i in train_ids]
    test_docs = [month_tokens(by_id[i]) for i in test_ids]
    tfidf = fit_tfidf(train_docs)
    X_train = [transform(tfidf, d) for d in train_docs]
    X_test = [transform(tfidf, d) for d in test_docs]
    y_train = [by_id[i].label for i in train_ids]
    y_test = [by_id[i].label for i in test_ids]

    model = train_svm(X_train, y_train, config)
    predictions = [predict(model, x) for x in X_test]
    report = metrics.evaluate(predictions, y_test, setting=f"{ratio.name}/seed={seed}")
    return ExperimentResult(
        report=report,
        model=model,
        tfidf=tfidf,
        train_ids=train_ids,
        test_ids=test_ids,
    )


def run_timeline_experiment(
    timelines: list,
    ratio: RatioSetting,
    seed: int,
    config: TrainConfig | None = None,
    test_fraction: float = 0.3,
) -> metrics.EvalReport:
    return train_and_evaluate(timelines, ratio, seed, config, test_fraction).report
