"""Single-hidden-layer perceptron with ReLU units and a softmax output."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .base import ClassifierSpec, LearnError, register

__all__ = ["Mlp", "init_params", "forward", "loss_and_gradient"]

BATCH_SIZE = 32
_ADAM_BETAS = (0.9, 0.999)
_ADAM_EPS = 1e-8
PARAM_NAMES = ("W1", "b1", "W2", "b2")


def init_params(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> dict:
    """Uniform weights in [-0.5, 0.5] / sqrt(fan_in); zero biases."""
    return {
        "W1": rng.uniform(-0.5, 0.5, (n_in, n_hidden)) / np.sqrt(n_in),
        "b1": np.zeros(n_hidden),
        "W2": rng.uniform(-0.5, 0.5, (n_hidden, n_out)) / np.sqrt(n_hidden),
        "b2": np.zeros(n_out),
    }


def forward(params: dict, X: np.ndarray):
    """Hidden pre-activations, hidden activations, and output logits."""
    pre = X @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    return pre, hidden, hidden @ params["W2"] + params["b2"]


def loss_and_gradient(params: dict, X: np.ndarray, Y: np.ndarray):
    """Mean cross-entropy of one-hot targets ``Y`` and its exact gradient."""
    n = X.shape[0]
    pre, hidden, logits = forward(params, X)
    log_p = logits - logsumexp(logits, axis=1, keepdims=True)
    loss = -np.sum(Y * log_p) / n
    d_logits = (np.exp(log_p) - Y) / n
    d_hidden = d_logits @ params["W2"].T
    d_pre = d_hidden * (pre > 0)
    grads = {
        "W2": hidden.T @ d_logits,
        "b2": d_logits.sum(axis=0),
        "W1": X.T @ d_pre,
        "b1": d_pre.sum(axis=0),
    }
    return loss, grads


@register
@dataclass(frozen=True)
class Mlp(ClassifierSpec):
    """Trained with Adam on shuffled mini-batches of 32 for a fixed number of epochs."""

    hidden_units: int = 10
    max_epochs: int = 200
    learning_rate: float = 1e-3
    activation: str = "relu"

    name = "mlp"
    probabilistic = True

    def __post_init__(self):
        if self.hidden_units < 1 or self.max_epochs < 1 or not self.learning_rate > 0:
            raise LearnError("MLP sizes, epochs and learning rate must be positive")
        if self.activation != "relu":
            raise LearnError("only the relu activation is supported")

    def train(self, Z, y, n_classes, seed):
        rng = np.random.default_rng(seed)
        params = init_params(Z.shape[1], self.hidden_units, n_classes, rng)
        Y = np.eye(n_classes)[y]
        b1, b2 = _ADAM_BETAS
        m = {k: np.zeros_like(v) for k, v in params.items()}
        v = {k: np.zeros_like(p) for k, p in params.items()}
        step = 0
        n = Z.shape[0]
        for _ in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, BATCH_SIZE):
                idx = order[start:start + BATCH_SIZE]
                _, grads = loss_and_gradient(params, Z[idx], Y[idx])
                step += 1
                lr_t = self.learning_rate * np.sqrt(1 - b2 ** step) / (1 - b1 ** step)
                for k in PARAM_NAMES:
                    m[k] = b1 * m[k] + (1 - b1) * grads[k]
                    v[k] = b2 * v[k] + (1 - b2) * grads[k] ** 2
                    params[k] = params[k] - lr_t * m[k] / (np.sqrt(v[k]) + _ADAM_EPS)
        return params

    def scores(self, params, Z):
        return softmax(forward(params, Z)[2], axis=1)
