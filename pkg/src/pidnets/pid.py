"""Binned joint models and partial information decomposition.

The central object is :class:`BinnedJointModel`: a sparse empirical joint
distribution p(r̃, c̃) over binned integrated inputs together with a table of
conditional firing probabilities θ(r̃, c̃) evaluated at bin centers. The binary
output never has to be sampled to measure information: p(y=+1, r̃, c̃) = θ·p
and p(y=-1, r̃, c̃) = (1-θ)·p.

From the model we compute

* classical quantities H(Y), I(Y:R̃), I(Y:C̃), I(Y:R̃,C̃), H(Y|R̃,C̃),
* the pointwise redundancy measure based on the union event r̃ ∪ c̃
  (probability of seeing *either* source realization), which is the single
  extra quantity needed to pin down all four decomposition atoms,
* the parametric goal G = Γ · (I_unq,R, I_unq,C, I_red, I_syn, H_res) and its
  exact partial derivative ∂g/∂θ at each occupied bin.

All information quantities are in bits (log base 2); the derivative uses the
same base so learning rates are interpreted in bit units.

A note on ``dg_dtheta``: the derivative of the goal with respect to a single
bin's θ is *not* local. Perturbing θ at one bin moves p(+1), the row/column
conditionals, and the union probability q = p(+1 | r̃ ∪ c̃) of every bin
sharing that row or column. The log-derivative contributions of the global
and conditional means cancel exactly, but the rational terms coming from q do
not: they sum over the perturbed bin's row and column. The expression here is
the exact gradient (it matches a finite-difference probe of the full goal to
float precision).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binning import BinningSpec

__all__ = [
    "EPS",
    "GoalParams",
    "PidAtoms",
    "BinnedJointModel",
    "estimate_joint",
    "reparameterize",
    "inverse_reparameterize",
    "marginal_theta",
    "union_probabilities",
    "i_sx_redundancy",
    "pid_decompose",
    "goal_value",
    "goal_value_gamma",
    "dg_dtheta",
    "dg_dtheta_table",
]

EPS = 1e-12
_LN2 = float(np.log(2.0))

# Goal weights live in two coordinate systems: atom space
# Γ = (Γ_unq,R, Γ_unq,C, Γ_red, Γ_syn, Γ_res) and classical-entropy space
# γ = (γ_Y, γ_Y|R, γ_Y|C, γ_Y|RC, γ_red). The two integer matrices below are
# exact mutual inverses.
CAPS_TO_CLASSICAL = np.array(
    [
        [1, 1, 0, -1, 0],
        [-1, 0, 0, 1, 0],
        [0, -1, 0, 1, 0],
        [0, 0, 0, -1, 1],
        [-1, -1, 1, 1, 0],
    ],
    dtype=float,
)
CLASSICAL_TO_CAPS = np.array(
    [
        [1, 0, 1, 0, 0],
        [1, 1, 0, 0, 0],
        [1, 0, 0, 0, 1],
        [1, 1, 1, 0, 0],
        [1, 1, 1, 1, 0],
    ],
    dtype=float,
)


def reparameterize(gamma_caps) -> np.ndarray:
    """Map atom-space goal weights Γ to classical-space weights γ."""
    gamma_caps = np.asarray(gamma_caps, dtype=float)
    if gamma_caps.shape != (5,):
        raise ValueError("expected a 5-vector of goal weights")
    return CAPS_TO_CLASSICAL @ gamma_caps


def inverse_reparameterize(gamma_small) -> np.ndarray:
    """Map classical-space weights γ back to atom-space weights Γ."""
    gamma_small = np.asarray(gamma_small, dtype=float)
    if gamma_small.shape != (5,):
        raise ValueError("expected a 5-vector of goal weights")
    return CLASSICAL_TO_CAPS @ gamma_small


@dataclass(frozen=True)
class GoalParams:
    """Goal weights Γ = (Γ_unq,R, Γ_unq,C, Γ_red, Γ_syn, Γ_res)."""

    gamma_caps: tuple[float, float, float, float, float]

    def __post_init__(self):
        caps = tuple(float(v) for v in self.gamma_caps)
        if len(caps) != 5 or not all(np.isfinite(caps)):
            raise ValueError("goal weights must be 5 finite numbers")
        object.__setattr__(self, "gamma_caps", caps)

    @property
    def gamma_small(self) -> np.ndarray:
        """Derived classical-space weights (γ_Y, γ_Y|R, γ_Y|C, γ_Y|RC, γ_red)."""
        return reparameterize(self.gamma_caps)

    def caps_array(self) -> np.ndarray:
        return np.asarray(self.gamma_caps, dtype=float)


@dataclass(frozen=True)
class PidAtoms:
    """Goal components (bits) plus the classical quantities they derive from."""

    i_unq_r: float
    i_unq_c: float
    i_red: float
    i_syn: float
    h_res: float
    h_y: float
    i_y_r: float
    i_y_c: float
    i_y_rc: float

    def as_array(self) -> np.ndarray:
        """The five goal components, in Γ order."""
        return np.array([self.i_unq_r, self.i_unq_c, self.i_red, self.i_syn, self.h_res])


def _clamp(x):
    return np.clip(x, EPS, 1.0 - EPS)


def _logit2(x):
    return np.log2(x) - np.log2(1.0 - x)


def _binary_entropy(q):
    q = _clamp(q)
    return -(q * np.log2(q) + (1.0 - q) * np.log2(1.0 - q))


class BinnedJointModel:
    """Sparse joint p(r̃, c̃) plus firing table θ(r̃, c̃) at bin centers.

    Immutable after construction; all derived aggregates (marginals, row and
    column sums of θ·p) are precomputed once. Occupied bins are stored sorted
    by (r̃, c̃) so identical inputs produce identical layouts.
    """

    def __init__(self, spec_r: BinningSpec, spec_c: BinningSpec, idx_r, idx_c, prob, theta):
        idx_r = np.asarray(idx_r, dtype=np.int64)
        idx_c = np.asarray(idx_c, dtype=np.int64)
        prob = np.asarray(prob, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if not (idx_r.shape == idx_c.shape == prob.shape == theta.shape) or idx_r.ndim != 1:
            raise ValueError("bin indices, masses and theta must be equal-length 1-d arrays")
        if idx_r.size == 0:
            raise ValueError("model needs at least one occupied bin")
        if np.any(idx_r < 0) or np.any(idx_r > spec_r.n_interior + 1):
            raise ValueError("receptive bin index out of range")
        if np.any(idx_c < 0) or np.any(idx_c > spec_c.n_interior + 1):
            raise ValueError("contextual bin index out of range")
        if np.any(prob < 0) or not np.isfinite(prob).all():
            raise ValueError("probability masses must be finite and nonnegative")
        if abs(prob.sum() - 1.0) > 1e-12:
            raise ValueError(f"probability masses sum to {prob.sum()!r}, not 1")
        if not np.isfinite(theta).all():
            raise ValueError("theta values must be finite")

        key = idx_r * (spec_c.n_interior + 2) + idx_c
        order = np.argsort(key, kind="stable")
        key = key[order]
        if np.any(np.diff(key) == 0):
            raise ValueError("duplicate occupied bin")

        self.spec_r = spec_r
        self.spec_c = spec_c
        self.idx_r = idx_r[order]
        self.idx_c = idx_c[order]
        self.prob = prob[order]
        self.theta = _clamp(theta[order])
        self._key = key

        # Row/column compression and the aggregates every quantity reuses.
        self._rows, self._row_inv = np.unique(self.idx_r, return_inverse=True)
        self._cols, self._col_inv = np.unique(self.idx_c, return_inverse=True)
        tp = self.theta * self.prob
        self._p_row = np.bincount(self._row_inv, weights=self.prob)
        self._p_col = np.bincount(self._col_inv, weights=self.prob)
        self._s_row = np.bincount(self._row_inv, weights=tp)
        self._s_col = np.bincount(self._col_inv, weights=tp)
        self.p_plus = float(tp.sum())

        for arr in (self.idx_r, self.idx_c, self.prob, self.theta, self._key,
                    self._rows, self._cols, self._row_inv, self._col_inv,
                    self._p_row, self._p_col, self._s_row, self._s_col):
            arr.flags.writeable = False

    @property
    def n_occupied(self) -> int:
        return self.idx_r.size

    @classmethod
    def from_tables(cls, spec_r: BinningSpec, spec_c: BinningSpec, weights: dict, theta: dict):
        """Build a model from explicit {(r̃, c̃): mass} and {(r̃, c̃): θ} maps."""
        if set(weights) != set(theta):
            raise ValueError("every occupied bin needs a theta entry and vice versa")
        items = sorted(weights)
        idx_r = np.array([k[0] for k in items], dtype=np.int64)
        idx_c = np.array([k[1] for k in items], dtype=np.int64)
        prob = np.array([weights[k] for k in items], dtype=float)
        th = np.array([theta[k] for k in items], dtype=float)
        return cls(spec_r, spec_c, idx_r, idx_c, prob, th)

    def to_tables(self) -> tuple[dict, dict]:
        """Inverse of :meth:`from_tables` (θ values are the clamped ones)."""
        keys = list(zip(self.idx_r.tolist(), self.idx_c.tolist()))
        return dict(zip(keys, self.prob.tolist())), dict(zip(keys, self.theta.tolist()))

    def position(self, r_idx: int, c_idx: int) -> int:
        """Index of an occupied bin in the internal arrays; KeyError if empty."""
        key = r_idx * (self.spec_c.n_interior + 2) + c_idx
        pos = int(np.searchsorted(self._key, key))
        if pos == self._key.size or self._key[pos] != key:
            raise KeyError(f"bin ({r_idx}, {c_idx}) is not occupied")
        return pos

    def replace_theta_at(self, r_idx: int, c_idx: int, new_theta: float) -> "BinnedJointModel":
        """New model with θ overridden at one occupied bin (for derivative probes)."""
        pos = self.position(r_idx, c_idx)
        th = self.theta.copy()
        th[pos] = new_theta
        return BinnedJointModel(self.spec_r, self.spec_c, self.idx_r, self.idx_c, self.prob, th)

    # Union-event machinery shared by the redundancy measure and the gradient:
    # v = p(r̃ ∪ c̃), u = p(+1, r̃ ∪ c̃), q = p(+1 | r̃ ∪ c̃), per occupied bin.
    def _union_arrays(self):
        v = self._p_row[self._row_inv] + self._p_col[self._col_inv] - self.prob
        u = self._s_row[self._row_inv] + self._s_col[self._col_inv] - self.theta * self.prob
        v = np.maximum(v, EPS)
        u = np.maximum(u, EPS)
        q = _clamp(u / v)
        return v, u, q


def estimate_joint(samples, theta_fn, spec_r: BinningSpec, spec_c: BinningSpec) -> BinnedJointModel:
    """Histogram (r, c) samples and attach θ evaluated at the bin centers.

    ``samples`` is a sequence of (r, c) pairs or an (N, 2) array. ``theta_fn``
    receives bin-center coordinates (arrays) and must return firing
    probabilities; values are clamped to (0, 1) before use.
    """
    model, _ = _estimate_joint_with_positions(samples, theta_fn, spec_r, spec_c)
    return model


def _estimate_joint_with_positions(samples, theta_fn, spec_r, spec_c):
    """As :func:`estimate_joint`, also returning each sample's occupied-bin index."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2 or samples.shape[0] == 0:
        raise ValueError("need a non-empty sequence of (r, c) samples")
    ir = spec_r.bin_values(samples[:, 0])
    ic = spec_c.bin_values(samples[:, 1])
    return _build_joint_from_indices(ir, ic, theta_fn, spec_r, spec_c)


def _build_joint_from_indices(ir, ic, theta_fn, spec_r, spec_c):
    n = ir.size
    key = ir * np.int64(spec_c.n_interior + 2) + ic
    uniq, positions, counts = np.unique(key, return_inverse=True, return_counts=True)
    u_ir = uniq // (spec_c.n_interior + 2)
    u_ic = uniq % (spec_c.n_interior + 2)
    prob = counts / float(n)
    rcen = spec_r.bin_centers(u_ir)
    ccen = spec_c.bin_centers(u_ic)
    theta = np.broadcast_to(np.asarray(theta_fn(rcen, ccen), dtype=float), rcen.shape)
    model = BinnedJointModel(spec_r, spec_c, u_ir, u_ic, prob, theta)
    # np.unique returns keys sorted, matching the model's internal order.
    return model, positions


def marginal_theta(model: BinnedJointModel):
    """Global mean firing probability and the per-row / per-column conditionals.

    Returns (p_plus, {r̃: p(+1|r̃)}, {c̃: p(+1|c̃)}), all clamped to (0, 1).
    """
    p_plus = float(_clamp(model.p_plus))
    by_r = dict(zip(model._rows.tolist(), _clamp(model._s_row / model._p_row).tolist()))
    by_c = dict(zip(model._cols.tolist(), _clamp(model._s_col / model._p_col).tolist()))
    return p_plus, by_r, by_c


def union_probabilities(model: BinnedJointModel, r_idx: int, c_idx: int):
    """p(r̃ ∪ c̃) and p(+1, r̃ ∪ c̃) for an occupied bin (clamped below)."""
    pos = model.position(r_idx, c_idx)
    v, u, _ = model._union_arrays()
    return float(v[pos]), float(u[pos])


def i_sx_redundancy(model: BinnedJointModel) -> float:
    """Redundant information (bits): E_{y,r̃,c̃} log2 p(y | r̃ ∪ c̃) / p(y)."""
    _, _, q = model._union_arrays()
    t = _clamp(model.p_plus)
    th = model.theta
    terms = th * (np.log2(q) - np.log2(t)) + (1.0 - th) * (np.log2(1.0 - q) - np.log2(1.0 - t))
    return float(np.dot(model.prob, terms))


def pid_decompose(model: BinnedJointModel) -> PidAtoms:
    """All five goal components, anchored by the union-event redundancy.

    The classical quantities leave one degree of freedom among the four
    information atoms; fixing I_red determines the rest through the
    consistency equations.
    """
    t = _clamp(model.p_plus)
    h_y = float(_binary_entropy(t))
    cond_r = model._s_row / model._p_row
    cond_c = model._s_col / model._p_col
    h_y_given_r = float(np.dot(model._p_row, _binary_entropy(cond_r)))
    h_y_given_c = float(np.dot(model._p_col, _binary_entropy(cond_c)))
    h_res = float(np.dot(model.prob, _binary_entropy(model.theta)))
    i_y_r = h_y - h_y_given_r
    i_y_c = h_y - h_y_given_c
    i_y_rc = h_y - h_res
    i_red = i_sx_redundancy(model)
    return PidAtoms(
        i_unq_r=i_y_r - i_red,
        i_unq_c=i_y_c - i_red,
        i_red=i_red,
        i_syn=i_y_rc - i_y_r - i_y_c + i_red,
        h_res=h_res,
        h_y=h_y,
        i_y_r=i_y_r,
        i_y_c=i_y_c,
        i_y_rc=i_y_rc,
    )


def goal_value(atoms: PidAtoms, params: GoalParams) -> float:
    """G = Γ · (I_unq,R, I_unq,C, I_red, I_syn, H_res)."""
    return float(np.dot(params.caps_array(), atoms.as_array()))


def goal_value_gamma(model: BinnedJointModel, params: GoalParams) -> float:
    """The same goal evaluated in classical coordinates:
    γ_Y H(Y) + γ_Y|R H(Y|R̃) + γ_Y|C H(Y|C̃) + γ_Y|RC H(Y|R̃,C̃) + γ_red I_red."""
    a = pid_decompose(model)
    classical = np.array([
        a.h_y,
        a.h_y - a.i_y_r,
        a.h_y - a.i_y_c,
        a.h_res,
        a.i_red,
    ])
    return float(np.dot(params.gamma_small, classical))


def dg_dtheta_table(model: BinnedJointModel, params: GoalParams) -> np.ndarray:
    """Exact ∂g/∂θ at every occupied bin (bits per unit θ).

    ∂G/∂θ(r̃,c̃) = p(r̃,c̃) · ∂g/∂θ(r̃,c̃). See the module docstring for why the
    union term sums over the bin's whole row and column.
    """
    g_y, g_yr, g_yc, g_yrc, g_red = params.gamma_small
    t = _clamp(model.p_plus)
    cond_r = _clamp(model._s_row / model._p_row)
    cond_c = _clamp(model._s_col / model._p_col)
    v, _, q = model._union_arrays()

    th = model.theta
    w = model.prob * (th / q - (1.0 - th) / (1.0 - q)) / v
    w_row = np.bincount(model._row_inv, weights=w)
    w_col = np.bincount(model._col_inv, weights=w)
    coupling = (w_row[model._row_inv] + w_col[model._col_inv] - w) / _LN2

    out = np.full(model.n_occupied, -(g_y + g_red) * _logit2(t))
    out -= g_yr * _logit2(cond_r)[model._row_inv]
    out -= g_yc * _logit2(cond_c)[model._col_inv]
    out -= g_yrc * _logit2(th)
    out += g_red * (_logit2(q) + coupling)
    return out


def dg_dtheta(model: BinnedJointModel, r_idx: int, c_idx: int, params: GoalParams) -> float:
    """∂g/∂θ at one occupied bin."""
    pos = model.position(r_idx, c_idx)
    return float(dg_dtheta_table(model, params)[pos])
