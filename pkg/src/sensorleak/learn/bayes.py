from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .base import ClassifierSpec, LearnError, register

__all__ = ["GaussianNB"]


@register
@dataclass(frozen=True)
class GaussianNB(ClassifierSpec):
    """Gaussian naive Bayes with class-frequency priors.

    ``var_smoothing`` times the largest feature variance is added to every
    per-class variance so that constant columns do not divide by zero.
    """

    var_smoothing: float = 1e-9

    name = "nb"
    probabilistic = True

    def __post_init__(self):
        if not self.var_smoothing > 0:
            raise LearnError("var_smoothing must be positive")

    def train(self, Z, y, n_classes, seed):
        eps = self.var_smoothing * float(np.max(Z.var(axis=0)))
        theta = np.vstack([Z[y == c].mean(axis=0) for c in range(n_classes)])
        var = np.vstack([Z[y == c].var(axis=0) for c in range(n_classes)]) + eps
        counts = np.bincount(y, minlength=n_classes)
        return {"theta": theta, "var": var, "log_prior": np.log(counts / counts.sum())}

    def joint_log_likelihood(self, params, Z):
        theta, var = params["theta"], params["var"]
        norm = -0.5 * np.sum(np.log(2.0 * np.pi * var), axis=1)
        quad = -0.5 * (((Z[:, None, :] - theta[None]) ** 2) / var[None]).sum(axis=2)
        return params["log_prior"] + norm + quad

    def scores(self, params, Z):
        jll = self.joint_log_likelihood(params, Z)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))
