"""A stochastic binary neuron with separate receptive and contextual inputs.

The neuron integrates each input class with its own weights and bias,
r = w_r · x_r − b_r and c = w_c · x_c − b_c, fires Y ∈ {−1, +1} with
P(Y = +1) = σ(A(r, c)), and learns by batch gradient ascent on its
information goal. Per batch it:

1. integrates and bins every sample,
2. builds the binned joint model with θ evaluated at bin centers,
3. forms the per-bin factor f = ∂g/∂θ · θ(1−θ) (the sigmoid-derivative
   factor means nearly deterministic bins contribute almost nothing), and
4. averages f · ∂A/∂r · x_r (and the contextual analogue) over the batch.

Biases are trainable: they are weights on a constant input of −1 and receive
the matching gradient. The optional pullback λ shrinks the *receptive*
weights and bias multiplicatively each update, w ← w − 2λw + η∇w.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import sigmoid
from .binning import BinningSpec
from .pid import GoalParams, dg_dtheta_table, _build_joint_from_indices

__all__ = ["Neuron", "GradientPair", "activation_partials"]

from .activations import activation_partials  # re-export, part of this unit's API


@dataclass
class GradientPair:
    """Batch gradients for both weight classes (biases included)."""

    grad_w_r: np.ndarray
    grad_b_r: float
    grad_w_c: np.ndarray
    grad_b_c: float


@dataclass
class Neuron:
    """State of one unit: weights, biases, activation, binning and goal."""

    w_r: np.ndarray
    b_r: float
    w_c: np.ndarray
    b_c: float
    activation: object
    spec_r: BinningSpec
    spec_c: BinningSpec
    goal: GoalParams
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        self.w_r = np.asarray(self.w_r, dtype=float)
        self.w_c = np.asarray(self.w_c, dtype=float)

    def init_weights(self, b_init: float, rng: np.random.Generator | None = None):
        """Draw every weight and both biases i.i.d. uniform on [−b_init, b_init]."""
        if b_init <= 0:
            raise ValueError("initialization scale must be positive")
        gen = self.rng if rng is None else rng
        self.w_r = gen.uniform(-b_init, b_init, self.w_r.shape)
        self.b_r = float(gen.uniform(-b_init, b_init))
        self.w_c = gen.uniform(-b_init, b_init, self.w_c.shape)
        self.b_c = float(gen.uniform(-b_init, b_init))

    def integrate(self, x_r, x_c) -> tuple[float, float]:
        x_r = np.asarray(x_r, dtype=float)
        x_c = np.asarray(x_c, dtype=float)
        if x_r.shape != self.w_r.shape:
            raise ValueError(f"receptive input shape {x_r.shape} != weights {self.w_r.shape}")
        if x_c.shape != self.w_c.shape:
            raise ValueError(f"contextual input shape {x_c.shape} != weights {self.w_c.shape}")
        return float(self.w_r @ x_r - self.b_r), float(self.w_c @ x_c - self.b_c)

    def theta(self, r: float, c: float) -> float:
        return float(sigmoid(self.activation.value(r, c)))

    def fire(self, r: float, c: float, rng: np.random.Generator | None = None) -> int:
        """Sample Y ∈ {−1, +1} with P(+1) = σ(A(r, c))."""
        if not (np.isfinite(r) and np.isfinite(c)):
            raise ValueError("integrated inputs must be finite")
        gen = self.rng if rng is None else rng
        return 1 if gen.random() < self.theta(r, c) else -1

    def compute_gradients(self, batch) -> GradientPair:
        """Empirical goal gradient over a batch of (x_r, x_c) pairs.

        ``batch`` is either a pair of arrays (X_r of shape (N, d_r), X_c of
        shape (N, d_c)) or a sequence of (x_r, x_c) tuples.
        """
        x_r, x_c = _as_batch_arrays(batch)
        if x_r.shape[0] == 0:
            raise ValueError("empty batch")
        if x_r.shape[1] != self.w_r.size or x_c.shape[1] != self.w_c.size:
            raise ValueError("batch input dimensions do not match the weights")

        r = x_r @ self.w_r - self.b_r
        c = x_c @ self.w_c - self.b_c
        ir = self.spec_r.bin_values(r)
        ic = self.spec_c.bin_values(c)

        def theta_fn(rcen, ccen):
            return sigmoid(self.activation.value(rcen, ccen))

        model, positions = _build_joint_from_indices(ir, ic, theta_fn, self.spec_r, self.spec_c)
        dg = dg_dtheta_table(model, self.goal)
        f_bins = dg * model.theta * (1.0 - model.theta)

        rcen = self.spec_r.bin_centers(model.idx_r)
        ccen = self.spec_c.bin_centers(model.idx_c)
        _, da_dr, da_dc = self.activation.partials(rcen, ccen)

        n = x_r.shape[0]
        f_r = (f_bins * da_dr)[positions]
        f_c = (f_bins * da_dc)[positions]
        return GradientPair(
            grad_w_r=(x_r.T @ f_r) / n,
            grad_b_r=float(-f_r.sum() / n),
            grad_w_c=(x_c.T @ f_c) / n,
            grad_b_c=float(-f_c.sum() / n),
        )

    def apply_update(self, grads: GradientPair, eta: float, pullback: float = 0.0):
        """Gradient-ascent step; pullback shrinks the receptive side first."""
        if eta < 0:
            raise ValueError("learning rate must be nonnegative")
        if not 0.0 <= pullback < 0.5:
            raise ValueError("pullback must lie in [0, 0.5)")
        self.w_r = self.w_r - 2.0 * pullback * self.w_r + eta * grads.grad_w_r
        self.b_r = self.b_r - 2.0 * pullback * self.b_r + eta * grads.grad_b_r
        self.w_c = self.w_c + eta * grads.grad_w_c
        self.b_c = self.b_c + eta * grads.grad_b_c


def _as_batch_arrays(batch):
    if isinstance(batch, tuple) and len(batch) == 2 and hasattr(batch[0], "ndim"):
        x_r, x_c = batch
    else:
        pairs = list(batch)
        x_r = np.asarray([np.atleast_1d(p[0]) for p in pairs], dtype=float)
        x_c = np.asarray([np.atleast_1d(p[1]) for p in pairs], dtype=float)
    x_r = np.atleast_2d(np.asarray(x_r, dtype=float))
    x_c = np.atleast_2d(np.asarray(x_c, dtype=float))
    return x_r, x_c
