"""Exact t-SNE for two-dimensional views of feature matrices."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = ["TsneParams", "Embedding", "tsne", "input_affinities", "zscore",
           "format_embedding_csv"]

_FLOOR = 1e-12


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch: int = 250
    init_std: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 250:
            raise ValueError("t-SNE needs at least 250 iterations")
        if not self.perplexity > 1:
            raise ValueError("perplexity must exceed 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")


@dataclass(frozen=True, eq=False)
class Embedding:
    coords: np.ndarray        # (n, 2)
    row_ids: tuple
    kl_divergence: float
    kl_history: np.ndarray    # one value per iteration


def zscore(X) -> np.ndarray:
    """Column-wise standardisation; constant columns are only centred."""
    X = np.asarray(X, dtype=float)
    # the min shift makes an exactly representable translation of the
    # input produce a bit-identical result
    X = X - X.min(axis=0)
    X = X - X.mean(axis=0)
    scale = X.std(axis=0)
    return X / np.where(scale > 0, scale, 1.0)


def _sq_distances(X: np.ndarray) -> np.ndarray:
    sq = np.sum(X * X, axis=1)
    D = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D, 0.0, out=D)
    np.fill_diagonal(D, 0.0)
    return D


def _student_kernel(Y: np.ndarray, num: np.ndarray) -> float:
    """Fill ``num`` with 1/(1+|yi-yj|^2), zero diagonal; return its sum."""
    sq = np.sum(Y * Y, axis=1)
    np.matmul(Y, Y.T, out=num)
    num *= -2.0
    num += sq[:, None]
    num += sq[None, :]
    num += 1.0
    np.reciprocal(num, out=num)
    np.fill_diagonal(num, 0.0)
    return float(num.sum())


def _kl(P, P_logP, P_total, num, Z, work) -> float:
    # KL(P||Q) with Q = num / Z, without forming Q
    np.log(num, out=work, where=num > 0)
    np.fill_diagonal(work, 0.0)
    return P_logP - float(np.sum(P * work)) + P_total * np.log(Z)


def input_affinities(D: np.ndarray, perplexity: float, tol: float = 1e-5,
                     max_steps: int = 50) -> np.ndarray:
    """Row-conditional Gaussian affinities matching ``perplexity``.

    Each row's precision is found by bisection on the entropy (nats) of its
    conditional distribution, all rows advancing together.
    """
    n = D.shape[0]
    target = np.log(perplexity)
    off = ~np.eye(n, dtype=bool)
    Dm = np.where(off, D, np.inf)
    # subtracting each row's nearest distance keeps exp() away from underflow
    Dm = Dm - Dm.min(axis=1, keepdims=True)
    beta = np.ones(n)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    active = np.ones(n, dtype=bool)
    P = np.zeros_like(D)
    for _ in range(max_steps):
        E = np.exp(-Dm * beta[:, None])
        sums = E.sum(axis=1)
        P_rows = E / sums[:, None]
        H = np.log(sums) + beta * np.sum(np.where(off, Dm, 0.0) * P_rows, axis=1)
        P[active] = P_rows[active]
        diff = H - target
        active &= np.abs(diff) > tol
        if not active.any():
            break
        up = active & (diff > 0)
        down = active & (diff <= 0)
        lo[up] = beta[up]
        beta[up] = np.where(np.isinf(hi[up]), beta[up] * 2.0, (beta[up] + hi[up]) / 2.0)
        hi[down] = beta[down]
        beta[down] = np.where(np.isinf(lo[down]), beta[down] / 2.0, (beta[down] + lo[down]) / 2.0)
    return P


def tsne(X, params: TsneParams = TsneParams(), row_ids: Optional[Sequence] = None) -> Embedding:
    """Embed the rows of ``X`` in two dimensions.

    Only pairwise distances of the rows matter, so scale features first
    (see :func:`zscore`) when columns have unrelated units. Optimisation
    follows the reference recipe: symmetrised affinities, early
    exaggeration, momentum switching and per-coordinate adaptive gains.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("feature matrix must be two-dimensional")
    n = X.shape[0]
    if n < 4:
        raise ValueError(f"t-SNE needs at least 4 rows, got {n}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains non-finite values")
    if params.perplexity >= n:
        raise ValueError(f"perplexity {params.perplexity} must be below the row count {n}")
    if row_ids is None:
        row_ids = [f"row{i}" for i in range(n)]

    # shifting by the column minimum keeps distances and makes exactly
    # representable translations of the input bit-identical
    P = input_affinities(_sq_distances(X - X.min(axis=0)), params.perplexity)
    P = (P + P.T) / (2.0 * n)
    P = np.maximum(P, _FLOOR)
    P_logP = float(np.sum(P * np.log(P)))

    P_total = float(P.sum())
    rng = np.random.default_rng(params.seed)
    Y = rng.normal(0.0, params.init_std, (n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    history = np.empty(params.iterations)
    # n x n work buffers reused across iterations
    num = np.empty((n, n))
    W = np.empty((n, n))
    for it in range(params.iterations):
        Z = _student_kernel(Y, num)
        history[it] = _kl(P, P_logP, P_total, num, Z, W)

        exag = params.exaggeration if it < params.exaggeration_iters else 1.0
        np.multiply(P, exag, out=W)
        W -= np.maximum(num / Z, _FLOOR)
        W *= num
        grad = 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)

        momentum = params.momentum if it < params.momentum_switch else params.final_momentum
        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        update = momentum * update - params.learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)

    if not np.all(np.isfinite(Y)):
        raise FloatingPointError("t-SNE diverged to non-finite coordinates")
    final = _kl(P, P_logP, P_total, num, _student_kernel(Y, num), W)
    return Embedding(Y, tuple(str(r) for r in row_ids), final, history)


def format_embedding_csv(embedding: Embedding, labels: Sequence, header: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row_id", "x", "y", "predicted_label"])
    for rid, (x, y), lab in zip(embedding.row_ids, embedding.coords, labels):
        w.writerow([rid, repr(float(x)), repr(float(y)), lab])
    return buf.getvalue()
