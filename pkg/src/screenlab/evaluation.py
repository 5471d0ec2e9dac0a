"""Confusion-matrix statistics, ROC/AUC, stratified k-fold
cross-validation, and dataset summaries.

The metrics block mirrors the caret-style report: accuracy with an exact
95% interval, no-information rate with a one-sided exact binomial test,
Cohen's kappa, and the sensitivity/specificity family. Fields whose
denominator is zero are reported as None rather than poisoning the rest.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .betadist import binom_tail_geq, clopper_pearson
from .features import FeatureMatrix
from .records import ScreeningRecord, ValidationError

__all__ = [
    "ConfusionMatrix", "MetricsReport", "RocCurve", "CvResult", "EdaSummary",
    "confusion", "metrics", "clopper_pearson", "nir_test", "roc",
    "cross_validate", "fold_assignment", "eda_summary",
    "report_lines", "report_mapping",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int
    positive_class: str
    negative_class: str

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValidationError("confusion counts must be non-negative")
        if self.total == 0:
            raise ValidationError("confusion matrix is empty")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    ci95_low: float
    ci95_high: float
    nir: float
    p_value_acc_gt_nir: float
    kappa: float | None
    sensitivity: float | None
    specificity: float | None
    ppv: float | None
    npv: float | None
    prevalence: float
    detection_rate: float
    detection_prevalence: float
    balanced_accuracy: float | None
    positive_class: str
    cm: ConfusionMatrix


def confusion(labels, predictions, positive_class: str) -> ConfusionMatrix:
    """Standard 2x2 counting; anything other than the positive class is
    treated as the negative class."""
    labels = list(labels)
    predictions = list(predictions)
    if len(labels) != len(predictions):
        raise ValidationError(
            f"{len(labels)} labels but {len(predictions)} predictions"
        )
    if not labels:
        raise ValidationError("cannot build a confusion matrix from zero rows")
    negative = next(
        (lab for lab in list(labels) + list(predictions) if lab != positive_class),
        "No" if positive_class == "Yes" else "Yes",
    )
    tp = fn = fp = tn = 0
    for lab, pred in zip(labels, predictions):
        actual_pos = lab == positive_class
        predicted_pos = pred == positive_class
        if actual_pos and predicted_pos:
            tp += 1
        elif actual_pos:
            fn += 1
        elif predicted_pos:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fn=fn, fp=fp, tn=tn,
                           positive_class=positive_class, negative_class=negative)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def nir_test(successes: int, n: int, nir: float) -> float:
    """One-sided exact binomial tail P[X >= successes | p = nir]."""
    if not 0.0 < nir < 1.0:
        raise ValidationError("nir must be strictly between 0 and 1")
    return binom_tail_geq(successes, n, nir)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    total = cm.total
    correct = cm.tp + cm.tn
    accuracy = correct / total
    low, high = clopper_pearson(correct, total)
    actual_pos = cm.tp + cm.fn
    actual_neg = cm.fp + cm.tn
    pred_pos = cm.tp + cm.fp
    pred_neg = cm.fn + cm.tn
    nir = max(actual_pos, actual_neg) / total
    p_value = binom_tail_geq(correct, total, nir) if 0.0 < nir < 1.0 else 1.0
    pe = (actual_pos * pred_pos + actual_neg * pred_neg) / (total * total)
    kappa = (accuracy - pe) / (1.0 - pe) if pe < 1.0 else None
    sensitivity = _ratio(cm.tp, actual_pos)
    specificity = _ratio(cm.tn, actual_neg)
    balanced = None
    if sensitivity is not None and specificity is not None:
        balanced = (sensitivity + specificity) / 2.0
    return MetricsReport(
        accuracy=accuracy,
        ci95_low=low,
        ci95_high=high,
        nir=nir,
        p_value_acc_gt_nir=p_value,
        kappa=kappa,
        sensitivity=sensitivity,
        specificity=specificity,
        ppv=_ratio(cm.tp, pred_pos),
        npv=_ratio(cm.tn, pred_neg),
        prevalence=actual_pos / total,
        detection_rate=cm.tp / total,
        detection_prevalence=pred_pos / total,
        balanced_accuracy=balanced,
        positive_class=cm.positive_class,
        cm=cm,
    )


def _fmt(value: float | None) -> str:
    if value is None:
        return "NA"
    text = f"{value:.4f}".rstrip("0").rstrip(".")
    return text if text else "0"


def _fmt_p(p: float) -> str:
    if p < 1e-16:
        return "<2e-16"
    if p < 1e-4:
        return f"{p:.4e}"
    return _fmt(p)


def report_lines(report: MetricsReport) -> list[str]:
    """Fixed-order text block in the classical report layout: the count
    matrix (prediction rows by reference columns, classes alphabetical),
    then the statistics."""
    cm = report.cm
    classes = sorted([cm.positive_class, cm.negative_class])

    def cell(pred: str, ref: str) -> int:
        predicted_pos = pred == cm.positive_class
        actual_pos = ref == cm.positive_class
        if predicted_pos and actual_pos:
            return cm.tp
        if predicted_pos:
            return cm.fp
        if actual_pos:
            return cm.fn
        return cm.tn

    width = max(len(c) for c in classes) + 2
    lines = ["Confusion Matrix and Statistics", ""]
    lines.append(" " * width + "Reference")
    lines.append("Prediction" + "".join(f"{c:>{width}}" for c in classes))
    for pred in classes:
        row = f"{pred:<10}" + "".join(f"{cell(pred, ref):>{width}}" for ref in classes)
        lines.append(row)
    lines.append("")
    pairs = [
        ("Accuracy", _fmt(report.accuracy)),
        ("95% CI", f"({_fmt(report.ci95_low)}, {_fmt(report.ci95_high)})"),
        ("No Information Rate", _fmt(report.nir)),
        ("P-Value [Acc > NIR]", _fmt_p(report.p_value_acc_gt_nir)),
        ("Kappa", _fmt(report.kappa)),
        ("Sensitivity", _fmt(report.sensitivity)),
        ("Specificity", _fmt(report.specificity)),
        ("Pos Pred Value", _fmt(report.ppv)),
        ("Neg Pred Value", _fmt(report.npv)),
        ("Prevalence", _fmt(report.prevalence)),
        ("Detection Rate", _fmt(report.detection_rate)),
        ("Detection Prevalence", _fmt(report.detection_prevalence)),
        ("Balanced Accuracy", _fmt(report.balanced_accuracy)),
        ("'Positive' Class", report.positive_class),
    ]
    name_width = max(len(name) for name, _ in pairs) + 1
    for name, value in pairs:
        lines.append(f"{name:>{name_width}} : {value}")
    return lines


def report_mapping(report: MetricsReport) -> dict:
    """Machine-readable view of the same fields, in report order."""
    return {
        "accuracy": report.accuracy,
        "ci95_low": report.ci95_low,
        "ci95_high": report.ci95_high,
        "no_information_rate": report.nir,
        "p_value_acc_gt_nir": report.p_value_acc_gt_nir,
        "kappa": report.kappa,
        "sensitivity": report.sensitivity,
        "specificity": report.specificity,
        "pos_pred_value": report.ppv,
        "neg_pred_value": report.npv,
        "prevalence": report.prevalence,
        "detection_rate": report.detection_rate,
        "detection_prevalence": report.detection_prevalence,
        "balanced_accuracy": report.balanced_accuracy,
        "positive_class": report.positive_class,
        "tp": report.cm.tp,
        "fn": report.cm.fn,
        "fp": report.cm.fp,
        "tn": report.cm.tn,
    }


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), from (0,0) to (1,1)
    auc: float


def roc(labels, scores, positive_class: str) -> RocCurve:
    """Threshold sweep from high scores to low, equal scores grouped into
    one step; AUC by the trapezoid rule, which makes tied pairs count
    one half exactly."""
    labels = list(labels)
    scores = [float(s) for s in scores]
    if len(labels) != len(scores):
        raise ValidationError(f"{len(labels)} labels but {len(scores)} scores")
    if not all(math.isfinite(s) for s in scores):
        raise ValidationError("scores must be finite")
    n_pos = sum(1 for lab in labels if lab == positive_class)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("roc needs both classes present")
    by_score = defaultdict(lambda: [0, 0])  # score -> [positives, negatives]
    for lab, s in zip(labels, scores):
        by_score[s][0 if lab == positive_class else 1] += 1
    points = [(0.0, 0.0)]
    tp = fp = 0
    auc = 0.0
    for s in sorted(by_score, reverse=True):
        pos, neg = by_score[s]
        prev_fpr, prev_tpr = points[-1]
        tp += pos
        fp += neg
        fpr, tpr = fp / n_neg, tp / n_pos
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0
        points.append((fpr, tpr))
    return RocCurve(points=tuple(points), auc=auc)


@dataclass(frozen=True)
class CvResult:
    fold_accuracies: tuple[float, ...]
    mean: float
    sd: float
    seed: int
    k: int


def fold_assignment(labels, k: int, seed: int) -> np.ndarray:
    """Stratified fold indices in 0..k-1, one per row. Within each class
    rows are shuffled then dealt round-robin; the dealing position carries
    over between classes so total fold sizes differ by at most one."""
    labels = list(labels)
    n = len(labels)
    if k < 2:
        raise ValidationError("k must be at least 2")
    if n < k:
        raise ValidationError(f"cannot make {k} folds from {n} rows")
    rng = np.random.Generator(np.random.PCG64(seed))
    assignment = np.empty(n, dtype=int)
    position = 0
    for cls in sorted(set(labels)):
        rows = np.array([i for i, lab in enumerate(labels) if lab == cls])
        rows = rows[rng.permutation(rows.size)]
        for i, row in enumerate(rows):
            assignment[row] = (position + i) % k
        position += rows.size
    return assignment


def cross_validate(matrix: FeatureMatrix, trainer, k: int = 5, seed: int = 0) -> CvResult:
    """k rounds of fit-on-(k-1)-folds, score-on-the-held-out-fold.

    `trainer(train_matrix, test_matrix) -> predicted labels for the test
    rows`. Accuracy is per-fold; sd is the sample standard deviation.
    """
    assignment = fold_assignment(matrix.labels, k, seed)
    accuracies = []
    for fold in range(k):
        test_idx = np.nonzero(assignment == fold)[0]
        train_idx = np.nonzero(assignment != fold)[0]
        train = matrix.select(train_idx)
        test = matrix.select(test_idx)
        predicted = list(trainer(train, test))
        if len(predicted) != test.n:
            raise ValidationError(
                f"trainer returned {len(predicted)} predictions for {test.n} rows"
            )
        hits = sum(1 for p, lab in zip(predicted, test.labels) if p == lab)
        accuracies.append(hits / test.n)
    mean = float(np.mean(accuracies))
    sd = float(np.std(accuracies, ddof=1)) if k > 1 else 0.0
    return CvResult(fold_accuracies=tuple(accuracies), mean=mean, sd=sd, seed=seed, k=k)


@dataclass(frozen=True)
class EdaSummary:
    label_counts: dict
    sex_shares: dict  # label -> {sex: share}
    ethnicity_shares: dict  # label -> {ethnicity: share}


def eda_summary(records: list[ScreeningRecord]) -> EdaSummary:
    """Per-label demographic composition; shares within a label sum to 1."""
    if not records:
        raise ValidationError("eda_summary needs at least one record")
    label_counts = Counter(r.label for r in records)
    sex_shares = {}
    eth_shares = {}
    for label, n in sorted(label_counts.items()):
        member = [r for r in records if r.label == label]
        sex_counts = Counter(r.sex for r in member)
        eth_counts = Counter(r.ethnicity for r in member)
        sex_shares[label] = {s: c / n for s, c in sorted(sex_counts.items())}
        eth_shares[label] = {e: c / n for e, c in sorted(eth_counts.items())}
    return EdaSummary(
        label_counts=dict(sorted(label_counts.items())),
        sex_shares=sex_shares,
        ethnicity_shares=eth_shares,
    )
