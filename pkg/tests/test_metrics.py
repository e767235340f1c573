import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wikihoax.metrics import ConfusionMatrix, confusion, evaluate, prf


def test_confusion_hand_count():
    m = confusion([1, 0, 1, 0], [1, 0, 0, 1])
    assert (m.tp, m.tn, m.fp, m.fn) == (1, 1, 1, 1)


def test_confusion_identity():
    m = confusion([1, 1, 0], [1, 1, 0])
    assert (m.fp, m.fn) == (0, 0)
    assert (m.tp, m.tn) == (2, 1)


def test_confusion_large_random_matches_tally_oracle():
    rng = np.random.default_rng(42)
    preds = rng.integers(0, 2, size=1000).tolist()
    gold = rng.integers(0, 2, size=1000).tolist()
    m = confusion(preds, gold)
    # Independent tally: count each of the four cells one pair at a time.
    cells = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    for p, g in zip(preds, gold):
        if p == 1 and g == 1:
            cells["tp"] += 1
        elif p == 1 and g == 0:
            cells["fp"] += 1
        elif p == 0 and g == 0:
            cells["tn"] += 1
        else:
            cells["fn"] += 1
    assert (m.tp, m.fp, m.tn, m.fn) == (
        cells["tp"], cells["fp"], cells["tn"], cells["fn"]
    )
    assert m.tp + m.fp + m.tn + m.fn == 1000


def test_confusion_rejects_mismatch_and_bad_labels():
    with pytest.raises(ValueError, match="length mismatch"):
        confusion([1], [1, 0])
    with pytest.raises(ValueError, match="labels must be 0 or 1"):
        confusion([2], [1])
    with pytest.raises(ValueError, match="zero examples"):
        confusion([], [])


def test_prf_balanced_errors():
    got = prf(ConfusionMatrix(tp=1, fp=1, fn=1, tn=0), positive=1)
    assert got == {"precision": 0.5, "recall": 0.5, "f1": 0.5}


def test_prf_zero_convention():
    got = prf(ConfusionMatrix(tp=0, fp=0, fn=5, tn=10), positive=1)
    assert got == {"precision": 0.0, "recall": 0.0, "f1": 0.0}


def test_prf_table_shape():
    got = prf(ConfusionMatrix(tp=86, fp=14, fn=9, tn=891), positive=1)
    assert got["precision"] == pytest.approx(0.86)
    assert got["recall"] == pytest.approx(86 / 95)
    expected_f1 = 2 * 0.86 * (86 / 95) / (0.86 + 86 / 95)
    assert got["f1"] == pytest.approx(expected_f1)
    assert 0.87 < got["f1"] < 0.89


@given(
    st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200)
)
def test_prf_class_swap_symmetry(pairs):
    preds = [p for p, _ in pairs]
    gold = [g for _, g in pairs]
    m = confusion(preds, gold)
    flipped = confusion([1 - p for p in preds], [1 - g for g in gold])
    assert prf(m, positive=1) == prf(flipped, positive=0)


@given(
    st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50)
)
def test_f1_between_precision_and_recall(tp, fp, tn, fn):
    got = prf(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn), positive=1)
    p, r, f1 = got["precision"], got["recall"], got["f1"]
    if p > 0 and r > 0:
        assert min(p, r) - 1e-12 <= f1 <= max(p, r) + 1e-12


@given(
    st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=100),
    st.randoms(),
)
def test_macro_f1_permutation_invariant(pairs, rnd):
    report = evaluate([p for p, _ in pairs], [g for _, g in pairs])
    shuffled = pairs[:]
    rnd.shuffle(shuffled)
    report2 = evaluate([p for p, _ in shuffled], [g for _, g in shuffled])
    assert report.macro_f1 == report2.macro_f1


def test_evaluate_report_fields():
    report = evaluate([1, 0, 1], [1, 0, 0], setting="demo")
    assert report.setting == "demo"
    assert report.macro_f1 == (report.per_class[0]["f1"] + report.per_class[1]["f1"]) / 2
    assert report.matrix.tp + report.matrix.fp + report.matrix.tn + report.matrix.fn == 3
