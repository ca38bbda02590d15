"""Activation functions A(r, c) with analytic partial derivatives.

The firing probability of a neuron is θ = σ(A(r, c)), so the choice of A
decides how strongly each input class drives the output versus merely
steering learning. Two shapes are provided:

* :class:`ModulatedContext` — A = r · (0.5 + σ(2rc)). Output probabilities
  follow the receptive drive; the context can at most double or nearly
  silence the slope. At c = 0 it reduces exactly to A = r.
* :class:`SaturatingSum` — A = s(r) + s(c) with the smooth, sign-preserving
  saturation s(x) = x / (1 + |x/scale|^p)^(1/p). Both input classes can drive
  the output outright; the saturation bounds each contribution to ±scale
  while keeping s'(x) > 0 everywhere so gradients never die completely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ModulatedContext", "SaturatingSum", "sigmoid", "activation_partials"]


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass(frozen=True)
class ModulatedContext:
    """A(r, c) = r · (0.5 + σ(2rc)); context modulates, receptive drives."""

    def value(self, r, c):
        r = np.asarray(r, dtype=float)
        c = np.asarray(c, dtype=float)
        return r * (0.5 + sigmoid(2.0 * r * c))

    def partials(self, r, c):
        r = np.asarray(r, dtype=float)
        c = np.asarray(c, dtype=float)
        s = sigmoid(2.0 * r * c)
        sp = s * (1.0 - s)
        a = r * (0.5 + s)
        da_dr = 0.5 + s + 2.0 * r * c * sp
        da_dc = 2.0 * r * r * sp
        return a, da_dr, da_dc


@dataclass(frozen=True)
class SaturatingSum:
    """A(r, c) = s(r) + s(c), s a smooth soft clip saturating at ±scale."""

    scale: float = 8.0
    exponent: float = 8.0

    def _soft_clip(self, x):
        # t**exponent overflows for astronomically large |x|; clip where the
        # result is already ±scale to machine precision.
        t = np.minimum(np.abs(x) / self.scale, 1e30)
        u = t**self.exponent
        s = x * (1.0 + u) ** (-1.0 / self.exponent)
        ds = (1.0 + u) ** (-(self.exponent + 1.0) / self.exponent)
        return s, ds

    def value(self, r, c):
        r = np.asarray(r, dtype=float)
        c = np.asarray(c, dtype=float)
        return self._soft_clip(r)[0] + self._soft_clip(c)[0]

    def partials(self, r, c):
        r = np.asarray(r, dtype=float)
        c = np.asarray(c, dtype=float)
        sr, dsr = self._soft_clip(r)
        sc, dsc = self._soft_clip(c)
        return sr + sc, dsr * np.ones_like(sc), dsc * np.ones_like(sr)


def activation_partials(kind, r, c):
    """(A, ∂A/∂r, ∂A/∂c) evaluated elementwise."""
    return kind.partials(r, c)
