"""One-vs-rest linear classifiers: hinge-loss SVM and L2 logistic regression.

Both append a constant column to the features and regularise its weight
together with the rest, the way liblinear treats the intercept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log1p

from .base import ClassifierSpec, LearnError, register

__all__ = ["SvmLinear", "LogisticRegression", "svm_dual_solve", "logistic_newton"]


def _augment(Z: np.ndarray) -> np.ndarray:
    return np.hstack([Z, np.ones((Z.shape[0], 1))])


def svm_dual_solve(A: np.ndarray, s: np.ndarray, C: float, tol: float = 1e-10) -> np.ndarray:
    """Weights of the L1-loss (hinge) SVM from its box-constrained dual.

    minimises ``0.5 a'Qa - sum(a)`` with ``Q_ij = s_i s_j <A_i, A_j>`` over
    ``0 <= a <= C``; the primal weights are ``sum_i a_i s_i A_i``.
    """
    G = A * s[:, None]
    Q = G @ G.T

    def objective(a):
        Qa = Q @ a
        return 0.5 * a @ Qa - a.sum(), Qa - 1.0

    n = A.shape[0]
    res = minimize(objective, np.zeros(n), jac=True, method="L-BFGS-B",
                   bounds=[(0.0, C)] * n,
                   options={"maxiter": 15000, "ftol": 1e-15, "gtol": tol, "maxcor": 30})
    return G.T @ res.x


@register
@dataclass(frozen=True)
class SvmLinear(ClassifierSpec):
    C: float = 1.0

    name = "svm"
    probabilistic = False

    def __post_init__(self):
        if not self.C > 0:
            raise LearnError("SVM regularization C must be positive")

    def train(self, Z, y, n_classes, seed):
        A = _augment(Z)
        W = np.vstack([svm_dual_solve(A, np.where(y == c, 1.0, -1.0), self.C)
                       for c in range(n_classes)])
        return {"W": W}

    def scores(self, params, Z):
        return _augment(Z) @ params["W"].T


def _logistic_objective(w, A, s, C):
    m = s * (A @ w)
    # log(1 + exp(-m)) without overflow
    loss = np.where(m > 0, log1p(np.exp(-np.abs(m))), -m + log1p(np.exp(-np.abs(m))))
    return 0.5 * w @ w + C * loss.sum()


def logistic_newton(A: np.ndarray, s: np.ndarray, C: float, tol: float = 1e-8,
                    max_iter: int = 100) -> np.ndarray:
    """Newton's method with backtracking on the L2-regularised logistic loss.

    Stops once the gradient norm falls below ``tol``.
    """
    w = np.zeros(A.shape[1])
    for _ in range(max_iter):
        m = s * (A @ w)
        sig = expit(-m)
        grad = w - C * (A.T @ (s * sig))
        if np.linalg.norm(grad) <= tol:
            break
        D = sig * (1.0 - sig)
        H = np.eye(A.shape[1]) + C * (A.T * D) @ A
        step = np.linalg.solve(H, grad)
        f0 = _logistic_objective(w, A, s, C)
        t = 1.0
        while t > 1e-12:
            cand = w - t * step
            if _logistic_objective(cand, A, s, C) <= f0 - 1e-4 * t * (grad @ step):
                break
            t *= 0.5
        w = cand
    return w


@register
@dataclass(frozen=True)
class LogisticRegression(ClassifierSpec):
    C: float = 1.0

    name = "lr"
    probabilistic = True

    def __post_init__(self):
        if not self.C > 0:
            raise LearnError("logistic regression C must be positive")

    def train(self, Z, y, n_classes, seed):
        A = _augment(Z)
        W = np.vstack([logistic_newton(A, np.where(y == c, 1.0, -1.0), self.C)
                       for c in range(n_classes)])
        return {"W": W}

    def scores(self, params, Z):
        P = expit(_augment(Z) @ params["W"].T)
        return P / P.sum(axis=1, keepdims=True)
