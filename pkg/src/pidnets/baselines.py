"""Reference models the experiments are compared against.

* One-vs-all logistic regression on MNIST, trained with plain full-batch
  gradient descent (3000 iterations, learning rate 1, zero initialization),
  read out winner-take-all over the ten sigmoid scores.
* A classical auto-associative network with the outer-product Hebbian weight
  matrix W = (1/n) Σ_p ξ_p ξ_pᵀ (zero diagonal) and synchronous sign updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import sigmoid
from .datasets import MemoryPatternSet, MnistDataset

__all__ = ["LogRegModel", "train_logreg", "HopfieldNet", "hopfield_train", "hopfield_recall", "hopfield_energy"]


@dataclass
class LogRegModel:
    weights: np.ndarray  # (10, n_features)
    biases: np.ndarray  # (10,)

    def predict_theta(self, images: np.ndarray) -> np.ndarray:
        """Per-class sigmoid scores, one row per image."""
        return sigmoid(images @ self.weights.T + self.biases)


def train_logreg(dataset: MnistDataset, iters: int = 3000, eta: float = 1.0) -> LogRegModel:
    """Full-batch gradient descent on the mean one-vs-all cross-entropy.

    Weights start at zero, so the run is deterministic. Inputs are used as
    stored in the dataset (pixels in [-1, 1])."""
    x = dataset.train_images
    n, d = x.shape
    targets = (dataset.train_labels[:, None] == np.arange(10)[None, :]).astype(float)
    w = np.zeros((10, d))
    b = np.zeros(10)
    for _ in range(iters):
        p = sigmoid(x @ w.T + b)
        err = p - targets  # (n, 10)
        w -= eta * (err.T @ x) / n
        b -= eta * err.sum(axis=0) / n
    return LogRegModel(weights=w, biases=b)


@dataclass
class HopfieldNet:
    weights: np.ndarray  # (n, n), symmetric, zero diagonal

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight matrix must be square")
        if not np.allclose(w, w.T) or np.any(np.diag(w) != 0):
            raise ValueError("weight matrix must be symmetric with a zero diagonal")


def hopfield_train(patterns: MemoryPatternSet | np.ndarray) -> HopfieldNet:
    """Outer-product Hebbian storage: W = (1/n) Σ_p ξ_p ξ_pᵀ, diagonal zeroed."""
    mat = patterns.patterns if isinstance(patterns, MemoryPatternSet) else np.asarray(patterns, float)
    if mat.ndim != 2 or mat.shape[0] < 1:
        raise ValueError("need at least one pattern")
    n = mat.shape[1]
    w = (mat.T @ mat) / n
    np.fill_diagonal(w, 0.0)
    return HopfieldNet(weights=w)


def hopfield_recall(net: HopfieldNet, cue: np.ndarray, n_steps: int) -> np.ndarray:
    """Synchronous sign updates; sign(0) resolves to +1. Returns the state
    sequence including the cue as row 0, so row n_steps is the readout."""
    cue = np.asarray(cue, dtype=float)
    if cue.shape != (net.weights.shape[0],):
        raise ValueError("cue length must match the network size")
    states = np.empty((n_steps + 1, cue.size))
    states[0] = cue
    s = cue
    for t in range(1, n_steps + 1):
        h = net.weights @ s
        s = np.where(h >= 0, 1.0, -1.0)
        states[t] = s
    return states


def hopfield_energy(net: HopfieldNet, state: np.ndarray) -> float:
    """E = -1/2 sᵀ W s (non-increasing under asynchronous updates)."""
    state = np.asarray(state, dtype=float)
    return float(-0.5 * state @ net.weights @ state)
