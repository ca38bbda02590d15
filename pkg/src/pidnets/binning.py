"""Fixed-interval binning with two unbounded overflow bins.

Integrated inputs are discretized on a closed interval [lower, upper] split
into ``n_interior`` equal-width bins. Everything below the interval falls
into overflow bin 0, everything above into overflow bin ``n_interior + 1``,
so a spec with n interior bins indexes n + 2 bins in total. Overflow bins
have no natural midpoint; they are assigned the center a regular bin would
have if the grid continued one bin past each end (lower - width/2 and
upper + width/2), which keeps functions evaluated at bin centers finite and
continuous with the interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["BinningSpec", "bin_value", "bin_center"]


@dataclass(frozen=True)
class BinningSpec:
    """Equal-width binning of [lower, upper] plus two overflow bins."""

    lower: float
    upper: float
    n_interior: int

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("binning interval must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if self.n_interior < 1:
            raise ValueError(f"need at least one interior bin, got {self.n_interior}")

    @property
    def width(self) -> float:
        return (self.upper - self.lower) / self.n_interior

    @property
    def n_total(self) -> int:
        return self.n_interior + 2

    def bin_values(self, x) -> np.ndarray:
        """Vectorized bin lookup. Values exactly at ``upper`` map to the last
        interior bin; values beyond either end map to the overflow bins."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("cannot bin non-finite values")
        idx = np.floor((x - self.lower) / self.width).astype(np.int64) + 1
        np.clip(idx, 1, self.n_interior, out=idx)
        idx[x < self.lower] = 0
        idx[x > self.upper] = self.n_interior + 1
        return idx

    def bin_centers(self, idx) -> np.ndarray:
        """Centers for any bin index, overflow bins included (see module doc)."""
        idx = np.asarray(idx)
        if np.any(idx < 0) or np.any(idx > self.n_interior + 1):
            raise ValueError("bin index out of range")
        return self.lower + (idx - 0.5) * self.width


def bin_value(x: float, spec: BinningSpec) -> int:
    """Bin a single value. Raises on non-finite input."""
    return int(spec.bin_values(np.asarray([x]))[0])


def bin_center(idx: int, spec: BinningSpec) -> float:
    """Center of bin ``idx`` (0 and n_interior+1 are the overflow bins)."""
    return float(spec.bin_centers(np.asarray([idx]))[0])
