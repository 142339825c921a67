"""Information-gain feature ranking and contingency tables.

Continuous features are discretised with the recursive entropy-minimisation
method of Fayyad and Irani, accepting a cut only when its gain beats the
minimum-description-length threshold. Entropies are in bits.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import canonical_order
from .features import Dataset

__all__ = [
    "entropy", "mdl_discretize", "information_gain", "IgEntry", "IgReport",
    "ContingencyTable", "contingency", "format_ig_csv", "format_contingency_csv",
]


def entropy(counts) -> float:
    """Shannon entropy in bits of a vector of class counts."""
    c = np.asarray(counts, dtype=float)
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    total = c.sum()
    if total <= 0:
        raise ValueError("entropy of all-zero counts is undefined")
    p = c[c > 0] / total
    return float(-(p * np.log2(p)).sum())


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    # entropy of each row of a (m, C) count matrix; rows must be non-empty
    tot = counts.sum(axis=1, keepdims=True)
    p = counts / tot
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return -terms.sum(axis=1)


def _mdl_accepts(total: np.ndarray, left: np.ndarray, right: np.ndarray) -> bool:
    n = total.sum()
    k = np.count_nonzero(total)
    k1, k2 = np.count_nonzero(left), np.count_nonzero(right)
    h, h1, h2 = entropy(total), entropy(left), entropy(right)
    n1, n2 = left.sum(), right.sum()
    gain = h - (n1 / n) * h1 - (n2 / n) * h2
    delta = math.log2(3 ** k - 2) - (k * h - k1 * h1 - k2 * h2)
    return gain > (math.log2(n - 1) + delta) / n


def _cut_points(values: np.ndarray, onehot: np.ndarray) -> list:
    """Accepted cuts for rows already sorted by value."""
    n = values.shape[0]
    if n < 2:
        return []
    cum = np.cumsum(onehot, axis=0)
    left = cum[:-1]
    total = cum[-1]
    right = total - left
    n_left = np.arange(1, n, dtype=float)
    boundary = values[:-1] < values[1:]
    if not boundary.any():
        return []
    weighted = (n_left * _entropy_rows(np.maximum(left, 0))
                + (n - n_left) * _entropy_rows(np.maximum(right, 0))) / n
    weighted = np.where(boundary, weighted, np.inf)
    i = int(np.argmin(weighted))  # first minimum: smallest cut on ties
    if not _mdl_accepts(total, left[i], right[i]):
        return []
    a, b = float(values[i]), float(values[i + 1])
    cut = 0.5 * (a + b)
    if cut >= b:
        cut = a
    return (_cut_points(values[: i + 1], onehot[: i + 1]) + [cut]
            + _cut_points(values[i + 1:], onehot[i + 1:]))


def mdl_discretize(values: Sequence[float], labels: Sequence) -> list:
    """Ascending cut points for one continuous feature.

    Returns an empty list for constant features or when the best boundary
    fails the MDL test. A value ``v`` falls in bin ``sum(v > cut)``.
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels, dtype=object)
    if values.shape[0] != labels.shape[0] or values.shape[0] < 2:
        raise ValueError("need at least two values with one label each")
    classes = canonical_order(labels)
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[v] for v in labels])
    order = np.argsort(values, kind="stable")
    onehot = np.eye(len(classes))[y[order]]
    return _cut_points(values[order], onehot)


def _bin_of(values: np.ndarray, cuts: Sequence[float]) -> np.ndarray:
    return np.searchsorted(np.asarray(cuts, dtype=float), values, side="left")


@dataclass(frozen=True)
class IgEntry:
    feature: str
    ig_bits: float
    cuts: tuple


@dataclass(frozen=True)
class IgReport:
    entries: tuple       # sorted by descending IG, then feature name
    class_entropy: float

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def ranking(self) -> list:
        return [e.feature for e in self.entries]

    def by_feature(self) -> dict:
        return {e.feature: e for e in self.entries}


def information_gain(dataset: Dataset) -> IgReport:
    """Rank every feature of ``dataset`` by its information gain on the targets.

    A single-class target has zero entropy; every feature then scores 0.
    """
    y = dataset.y
    classes = canonical_order(y)
    index = {c: i for i, c in enumerate(classes)}
    yi = np.array([index[v] for v in y])
    onehot = np.eye(len(classes))[yi]
    h_class = entropy(onehot.sum(axis=0))
    n = len(dataset)
    entries = []
    for j, name in enumerate(dataset.feature_names):
        col = dataset.X[:, j]
        cuts = mdl_discretize(col, y) if n >= 2 else []
        if cuts:
            bins = _bin_of(col, cuts)
            cond = 0.0
            for b in np.unique(bins):
                counts = onehot[bins == b].sum(axis=0)
                cond += counts.sum() / n * entropy(counts)
            ig = h_class - cond
        else:
            ig = 0.0
        entries.append(IgEntry(name, float(ig), tuple(cuts)))
    entries.sort(key=lambda e: (-e.ig_bits, e.feature))
    return IgReport(tuple(entries), h_class)


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    rows: tuple
    columns: tuple
    counts: np.ndarray

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def column_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def cell(self, row, column) -> int:
        return int(self.counts[self.rows.index(row), self.columns.index(column)])


def contingency(external: Sequence, predicted: Sequence,
                rows: Optional[Sequence] = None, columns: Optional[Sequence] = None) -> ContingencyTable:
    """Cross-tabulate two label assignments of the same items.

    Rows and columns default to the labels that occur, in canonical order;
    pass ``columns`` to force every class of a model to appear.
    """
    external = [str(v) for v in external]
    predicted = [str(v) for v in predicted]
    if len(external) != len(predicted):
        raise ValueError("label lists must have equal length")
    rows = tuple(rows) if rows is not None else tuple(canonical_order(external))
    columns = tuple(columns) if columns is not None else tuple(canonical_order(predicted))
    ri = {r: i for i, r in enumerate(rows)}
    ci = {c: i for i, c in enumerate(columns)}
    counts = np.zeros((len(rows), len(columns)), dtype=np.int64)
    for e, p in zip(external, predicted):
        counts[ri[e], ci[p]] += 1
    counts.setflags(write=False)
    return ContingencyTable(rows, columns, counts)


def format_ig_csv(report: IgReport, header: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "ig_bits", "cuts"])
    for e in report:
        w.writerow([e.feature, repr(e.ig_bits), ";".join(repr(c) for c in e.cuts)])
    return buf.getvalue()


def format_contingency_csv(table: ContingencyTable, row_title: str = "activity",
                           header: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([row_title, *table.columns, "Total"])
    for r, counts, tot in zip(table.rows, table.counts, table.row_totals):
        w.writerow([r, *(int(c) for c in counts), int(tot)])
    w.writerow(["Total", *(int(c) for c in table.column_totals), table.total])
    return buf.getvalue()
