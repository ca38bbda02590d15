"""Evaluation metrics for the three experiments.

Classification reads out winner-take-all over firing probabilities; memory
recall quality is the cosine similarity between the network state and the
noiseless pattern; the bars representation is scored by the plug-in mutual
information between the 256-valued stimulus and the 8-bit output word.
"""

from __future__ import annotations

import numpy as np

from .baselines import hopfield_train
from .datasets import MemoryPatternSet, generate_bars

__all__ = [
    "wta_accuracy",
    "cosine_similarity",
    "layer_mutual_information",
    "weight_symmetry",
    "hebbian_similarity",
    "capacity",
]


def wta_accuracy(theta_matrix: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax matches the label (ties -> lowest index)."""
    theta_matrix = np.asarray(theta_matrix)
    labels = np.asarray(labels)
    if theta_matrix.shape[0] != labels.shape[0]:
        raise ValueError("one label per score row required")
    return float(np.mean(np.argmax(theta_matrix, axis=1) == labels))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape or a.size == 0:
        raise ValueError("vectors must have equal nonzero length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(a @ b / (na * nb))


def layer_mutual_information(network, n_samples: int = 100_000, settle_steps: int = 8,
                             rng: np.random.Generator | None = None) -> float:
    """Plug-in Monte-Carlo estimate of I(stimulus : output word) in bits.

    Stimuli are drawn from the uniform 256-pattern bars distribution; each is
    presented for ``settle_steps`` steps in an independent rollout and the
    final 8-bit output word recorded. The estimate is the plug-in mutual
    information of the empirical 256x256 joint (no bias correction)."""
    gen = rng if rng is not None else np.random.default_rng()
    n_bars = network.n_neurons
    bars = generate_bars(gen, n_samples, n_bars=n_bars)
    powers = 1 << np.arange(n_bars)
    stim_ids = bars.bar_masks @ powers
    outs = network.rollout_outputs(bars.pixels, settle_steps, gen)
    word_ids = (outs > 0) @ powers

    joint = np.zeros((1 << n_bars, 1 << n_bars))
    np.add.at(joint, (stim_ids, word_ids), 1.0)
    joint /= joint.sum()
    ps = joint.sum(axis=1)
    po = joint.sum(axis=0)
    nz = joint > 0
    ratio = joint[nz] / (ps[:, None] * po[None, :])[nz]
    return float(np.sum(joint[nz] * np.log2(ratio)))


def weight_symmetry(w: np.ndarray) -> float:
    """Cosine similarity between a square matrix and its transpose."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("need a square matrix")
    return cosine_similarity(w.ravel(), w.T.ravel())


def hebbian_similarity(w_c: np.ndarray, patterns: MemoryPatternSet | np.ndarray) -> float:
    """Cosine similarity of the recurrent matrix with the outer-product
    Hebbian matrix for the same patterns, diagonals excluded on both sides
    (the recurrent net has no self-connections)."""
    w_c = np.asarray(w_c, dtype=float)
    hop = hopfield_train(patterns).weights
    if w_c.shape != hop.shape:
        raise ValueError("matrix size must match the pattern length")
    off = ~np.eye(w_c.shape[0], dtype=bool)
    return cosine_similarity(w_c[off], hop[off])


def capacity(accuracy_table: dict[int, float], threshold: float = 0.95) -> int:
    """Largest pattern count whose mean accuracy exceeds the threshold (0 if none)."""
    if not accuracy_table:
        raise ValueError("empty accuracy table")
    passing = [count for count, acc in accuracy_table.items() if acc > threshold]
    return max(passing) if passing else 0
