"""Classification metrics: confusion counts, P/R/F1, macro-F1.

Positive class is hoax (label 1) throughout. Degenerate 0/0 ratios are
scored as 0 so that a classifier collapsing to the majority label still
gets a meaningful (bad) hoax-class score.
"""

import json
from dataclasses import dataclass


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0


@dataclass
class EvalReport:
    per_class: dict
    macro_f1: float
    matrix: ConfusionMatrix
    setting: str = ""


def confusion(predictions, gold) -> ConfusionMatrix:
    if len(predictions) != len(gold):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold labels"
        )
    if len(gold) == 0:
        raise ValueError("cannot evaluate zero examples")
    m = ConfusionMatrix()
    for p, g in zip(predictions, gold):
        if p not in (0, 1) or g not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got ({p}, {g})")
        if g == 1:
            if p == 1:
                m.tp += 1
            else:
                m.fn += 1
        else:
            if p == 1:
                m.fp += 1
            else:
                m.tn += 1
    return m


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def prf(matrix: ConfusionMatrix, positive: int) -> dict:
    """Precision, recall, F1 for the chosen positive class."""
    if positive == 1:
        tp, fp, fn = matrix.tp, matrix.fp, matrix.fn
    elif positive == 0:
        tp, fp, fn = matrix.tn, matrix.fn, matrix.fp
    else:
        raise ValueError(f"positive class must be 0 or 1, got {positive}")
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def evaluate(predictions, gold, setting: str = "") -> EvalReport:
    matrix = confusion(predictions, gold)
    per_class = {0: prf(matrix, 0), 1: prf(matrix, 1)}
    macro = (per_class[0]["f1"] + per_class[1]["f1"]) / 2.0
    return EvalReport(per_class=per_class, macro_f1=macro, matrix=matrix,
                      setting=setting)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "setting": report.setting,
        "macro_f1": report.macro_f1,
        "per_class": {str(k): v for k, v in report.per_class.items()},
        "matrix": {
            "tp": report.matrix.tp,
            "fp": report.matrix.fp,
            "tn": report.matrix.tn,
            "fn": report.matrix.fn,
        },
    }


def write_report_json(report: EvalReport, path, config: dict | None = None) -> None:
    doc = {"format_version": 1, **report_to_dict(report)}
    if config is not None:
        doc["config"] = config
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_report_csv(reports: list[EvalReport], path) -> None:
    """One row per (setting, class), mirroring a results-table layout."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("setting,label,precision,recall,f1,macro_f1\n")
        for rep in reports:
            for label in (1, 0):
                row = rep.per_class[label]
                fh.write(
                    f"{rep.setting},{label},{row['precision']:.6f},"
                    f"{row['recall']:.6f},{row['f1']:.6f},{rep.macro_f1:.6f}\n"
                )
