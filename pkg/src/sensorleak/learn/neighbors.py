from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import ClassifierSpec, LearnError, register

__all__ = ["Knn"]

# weight of the nearest-neighbour tie-break term relative to one vote
_TIE_WEIGHT = 1e-6


@register
@dataclass(frozen=True)
class Knn(ClassifierSpec):
    """Brute-force k-nearest neighbours with Euclidean distance.

    Scores are vote shares. A vote tie goes to the tied class owning the
    nearest neighbour; that preference is folded into the scores as a
    tiny bonus so ``argmax(score)`` always equals the prediction.
    Neighbours at equal distance are ranked by training-row index.
    """

    k: int = 5
    metric: str = "euclidean"

    name = "knn"
    probabilistic = True

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise LearnError("k must be a positive integer")
        if self.metric != "euclidean":
            raise LearnError("only the euclidean metric is supported")

    def check(self, n_rows):
        if self.k > n_rows:
            raise LearnError(f"k={self.k} exceeds the {n_rows} training rows")

    def train(self, Z, y, n_classes, seed):
        return {"Z": Z.copy(), "y": y.copy(), "n_classes": n_classes}

    def neighbours(self, params, Z, chunk: int = 256):
        train = params["Z"]
        out = np.empty((Z.shape[0], self.k), dtype=np.int64)
        for start in range(0, Z.shape[0], chunk):
            block = Z[start:start + chunk]
            # explicit differences so equidistant rows compare exactly equal
            d2 = ((block[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
            # stable sort keeps training-row order among equal distances
            out[start:start + chunk] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def scores(self, params, Z):
        n_classes = params["n_classes"]
        nn_labels = params["y"][self.neighbours(params, Z)]
        votes = np.zeros((Z.shape[0], n_classes))
        bonus = np.zeros((Z.shape[0], n_classes))
        rows = np.arange(Z.shape[0])
        for rank in range(self.k - 1, -1, -1):
            c = nn_labels[:, rank]
            votes[rows, c] += 1.0
            bonus[rows, c] = 2.0 ** -rank  # ends holding the class's best rank
        S = votes + _TIE_WEIGHT * bonus
        return S / S.sum(axis=1, keepdims=True)
