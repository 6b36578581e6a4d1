"""Mid-riser uniform quantization and per-sample consistency boxes.

A w-bit mid-riser quantizer on the nominal range [-1, 1) has step
2^(1-w) and reproduction levels step*(i + 1/2); zero is a decision
boundary, not a level.  A sample lying exactly on a boundary maps to the
upper cell (floor convention).  Every observation induces a box of
signals that quantize back to it; saturated cells are clamped to the
signal range [-1, 1] so the box stays compact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import samples_of, _rewrap

__all__ = ["Quantizer", "ConsistencySet", "quantize", "consistency_set", "project"]

GRID_TOL = 1e-12  # absorbs storage round-trip error when validating observations


@dataclass(frozen=True)
class Quantizer:
    """Uniform mid-riser quantizer with ``bits`` bits per sample."""

    bits: int

    def __post_init__(self):
        bits = int(self.bits)
        if not 1 <= bits <= 32:
            raise ValueError(f"bits must lie in [1, 32], got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def step(self) -> float:
        return 2.0 ** (1 - self.bits)

    @property
    def top_level(self) -> float:
        return 1.0 - self.step / 2

    @property
    def bottom_level(self) -> float:
        return -1.0 + self.step / 2


@dataclass(frozen=True, eq=False)
class ConsistencySet:
    """Per-sample interval bounds; the set of signals matching an observation."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("interval bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("every lower bound must be <= its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __len__(self) -> int:
        return self.lower.size

    def violation(self, x) -> np.ndarray:
        """Per-sample distance outside the box (0 where feasible)."""
        arr = samples_of(x)
        return np.maximum(0.0, np.maximum(self.lower - arr, arr - self.upper))

    def max_violation(self, x) -> float:
        return float(self.violation(x).max())

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.max_violation(x) <= tol


def quantize(x, q: Quantizer):
    """Map each sample to its mid-riser reproduction level, with saturation."""
    arr = samples_of(x)
    step = q.step
    levels = step * (np.floor(arr / step) + 0.5)
    return _rewrap(x, np.clip(levels, q.bottom_level, q.top_level))


def consistency_set(y, q: Quantizer) -> ConsistencySet:
    """Box of signals that quantize to the observation ``y``.

    Each sample of ``y`` must sit on the quantizer's level grid (within
    GRID_TOL).  Interior cells span one step around the level; the two
    saturated cells extend to the range edges -1 and 1.
    """
    arr = samples_of(y)
    step = q.step
    idx = np.round(arr / step - 0.5)
    levels = step * (idx + 0.5)
    off_grid = np.abs(arr - levels) > GRID_TOL
    top_idx = 2 ** (q.bits - 1) - 1
    bottom_idx = -(2 ** (q.bits - 1))
    invalid = off_grid | (idx > top_idx) | (idx < bottom_idx)
    if np.any(invalid):
        i = int(np.argmax(invalid))
        raise ValueError(
            f"observation sample {arr[i]!r} at position {i} is not a "
            f"{q.bits}-bit reproduction level"
        )
    lower = levels - step / 2
    upper = levels + step / 2
    upper[idx == top_idx] = 1.0
    lower[idx == bottom_idx] = -1.0
    return ConsistencySet(lower, upper)


def project(cs: ConsistencySet, x):
    """Euclidean projection onto the box: per-sample clamp."""
    arr = samples_of(x)
    if arr.size != len(cs):
        raise ValueError(
            f"signal length {arr.size} does not match box length {len(cs)}"
        )
    return _rewrap(x, np.minimum(np.maximum(arr, cs.lower), cs.upper))
