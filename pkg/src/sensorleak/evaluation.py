"""Stratified k-fold cross-validation repeated over runs, and the metric report."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .core import canonical_order
from .features import Dataset
from .learn import ClassifierSpec, fit

__all__ = [
    "EvalError", "Metrics", "CvReport", "stratified_folds", "compute_metrics",
    "roc_auc_ovr", "cross_validate", "format_cv_table", "METRIC_NAMES",
]

METRIC_NAMES = ("accuracy", "precision", "recall", "f1_weighted", "f1_macro",
                "f1_micro", "roc_auc_ovr")


class EvalError(ValueError):
    pass


def stratified_folds(y: Sequence, k: int, seed: int) -> list:
    """Split row indices into ``k`` stratified folds.

    Each class is shuffled and dealt round-robin, continuing where the
    previous class stopped, so every fold receives ``floor`` or ``ceil`` of
    its proportional share of each class and fold sizes differ by at most one.
    """
    y = np.asarray(y, dtype=object)
    n = len(y)
    if k < 2:
        raise EvalError(f"need at least 2 folds, got {k}")
    if k > n:
        raise EvalError(f"cannot split {n} rows into {k} folds")
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    offset = 0
    for cls in canonical_order(y):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        for j, idx in enumerate(members):
            folds[(offset + j) % k].append(int(idx))
        offset = (offset + members.size) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1_weighted: float
    f1_macro: float
    f1_micro: float
    roc_auc_ovr: float

    def as_array(self) -> np.ndarray:
        return np.array(dataclasses.astuple(self))

    @classmethod
    def mean(cls, items: Sequence["Metrics"]) -> "Metrics":
        # nanmean: a fold can lack every AUC-computable class
        stacked = np.vstack([m.as_array() for m in items])
        with np.errstate(all="ignore"):
            means = [float(np.nanmean(col)) if np.any(np.isfinite(col)) else math.nan
                     for col in stacked.T]
        return cls(*means)


def _binary_auc(positive: np.ndarray, scores: np.ndarray) -> float:
    # Mann-Whitney U with mid-ranks, so tied scores count 1/2
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    ranks = rankdata(scores)
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_auc_ovr(y_true: Sequence, scores: np.ndarray, classes: Sequence) -> float:
    """Unweighted mean of one-vs-rest AUCs over classes that have both
    positives and negatives in ``y_true``; NaN when no class qualifies."""
    y_true = np.asarray(y_true, dtype=object)
    scores = np.asarray(scores, dtype=float)
    aucs = []
    for j, cls in enumerate(classes):
        pos = y_true == cls
        if 0 < pos.sum() < pos.size:
            aucs.append(_binary_auc(pos, scores[:, j]))
    return float(np.mean(aucs)) if aucs else math.nan


def compute_metrics(y_true: Sequence, y_pred: Sequence, scores: Optional[np.ndarray] = None,
                    classes: Optional[Sequence] = None) -> Metrics:
    """The seven summary metrics.

    Precision, recall and weighted F1 are support-weighted over the classes
    in ``y_true``; macro F1 averages over every class seen in either labels
    list. A class with no predicted rows has precision 0. Without ``scores``
    the AUC is NaN.
    """
    y_true = np.asarray(y_true, dtype=object)
    y_pred = np.asarray(y_pred, dtype=object)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise EvalError("truth and predictions must be non-empty and equally long")
    if classes is None:
        classes = canonical_order(list(y_true) + list(y_pred))
    classes = list(classes)
    stray = set(y_pred) - set(classes)
    if stray:
        raise EvalError(f"predicted labels {sorted(stray)} are not in the class list")

    labels = canonical_order(list(y_true) + list(y_pred))
    tp = np.array([np.sum((y_true == c) & (y_pred == c)) for c in labels], dtype=float)
    support = np.array([np.sum(y_true == c) for c in labels], dtype=float)
    predicted = np.array([np.sum(y_pred == c) for c in labels], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(predicted > 0, tp / predicted, 0.0)
        rec = np.where(support > 0, tp / support, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    weights = support / support.sum()
    accuracy = float(tp.sum() / y_true.size)
    auc = math.nan
    if scores is not None:
        scores = np.asarray(scores, dtype=float)
        if scores.shape != (y_true.size, len(classes)):
            raise EvalError(f"scores must have shape ({y_true.size}, {len(classes)})")
        auc = roc_auc_ovr(y_true, scores, classes)
    return Metrics(
        accuracy=accuracy,
        precision=float(weights @ prec),
        recall=float(weights @ rec),
        f1_weighted=float(weights @ f1),
        f1_macro=float(f1.mean()),
        # pooled counts: in single-label multiclass this equals accuracy
        f1_micro=accuracy,
        roc_auc_ovr=auc,
    )


@dataclass(frozen=True)
class CvReport:
    spec: ClassifierSpec
    folds: tuple         # runs x folds of Metrics
    runtimes: tuple      # runs x folds of fit seconds
    k: int
    runs: int
    models: tuple = ()   # runs x folds of Model, only when requested

    @property
    def run_means(self) -> tuple:
        return tuple(Metrics.mean(run) for run in self.folds)

    @property
    def grand_mean(self) -> Metrics:
        return Metrics.mean(self.run_means)

    @property
    def mean_runtime(self) -> float:
        return float(np.mean(self.runtimes))


def cross_validate(spec: ClassifierSpec, dataset: Dataset, k: int = 5, runs: int = 5,
                   seed: int = 42, keep_models: bool = False) -> CvReport:
    """Repeated stratified k-fold evaluation of ``spec`` on ``dataset``.

    Run ``r`` uses the ``r``-th child of ``seed`` for its fold plan and the
    per-fold fit seeds. Standardisation happens inside :func:`fit`, on the
    training rows of each fold only. Runtimes cover ``fit`` alone.
    """
    classes = dataset.classes
    if len(classes) < 2:
        raise EvalError("cross-validation needs at least two classes")
    for c in classes:
        count = int(np.sum(dataset.y == c))
        if count < k:
            raise EvalError(f"class {c!r} has {count} rows, fewer than the {k} folds")
    if runs < 1:
        raise EvalError("runs must be at least 1")

    all_metrics, all_times, all_models = [], [], []
    for run_seq in np.random.SeedSequence(seed).spawn(runs):
        fold_seed, fit_seq = run_seq.spawn(2)
        plan = stratified_folds(dataset.y, k, np.random.default_rng(fold_seed))
        fit_seeds = fit_seq.generate_state(k, dtype=np.uint64)
        run_metrics, run_times, run_models = [], [], []
        for f, test_idx in enumerate(plan):
            train_idx = np.setdiff1d(np.arange(len(dataset)), test_idx)
            train = dataset.subset(train_idx)
            t0 = time.perf_counter()
            model = fit(spec, train, int(fit_seeds[f]))
            run_times.append(time.perf_counter() - t0)
            if keep_models:
                run_models.append(model)
            X_test = dataset.X[test_idx]
            S = model.score(X_test)
            pred = model.predict(X_test)
            run_metrics.append(compute_metrics(dataset.y[test_idx], pred, S, model.classes))
        all_metrics.append(tuple(run_metrics))
        all_times.append(tuple(run_times))
        all_models.append(tuple(run_models))
    return CvReport(spec, tuple(all_metrics), tuple(all_times), k, runs,
                    tuple(all_models) if keep_models else ())


def format_cv_table(reports: Mapping[str, CvReport], header: Optional[str] = None,
                    timing: bool = True) -> str:
    """One row per classifier: grand-mean metrics plus mean training runtime.

    With ``timing=False`` the runtime column is left blank so the file is a
    pure function of the inputs.
    """
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algo", *METRIC_NAMES, "train_runtime_s"])
    for name, rep in reports.items():
        g = rep.grand_mean
        runtime = f"{rep.mean_runtime:.6f}" if timing else ""
        w.writerow([name, *(f"{v:.6f}" for v in g.as_array()), runtime])
    return buf.getvalue()
