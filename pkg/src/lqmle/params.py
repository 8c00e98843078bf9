"""Parameter blocks with names and box bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ParamVector", "as_array"]


@dataclass(frozen=True)
class ParamVector:
    """An ordered, named parameter point together with its box bounds.

    Stored as tuples so instances are immutable and hashable; use
    ``array`` for numeric work.  Construction validates that the box is
    well formed and that the point lies inside it (up to a small slack
    for points produced by clipping).
    """

    values: tuple[float, ...]
    names: tuple[str, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        n = len(self.values)
        if not (len(self.names) == len(self.lower) == len(self.upper) == n):
            raise ValueError("values, names and bounds must have equal length")
        lo, hi, v = (np.asarray(t, dtype=float) for t in (self.lower, self.upper, self.values))
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(np.isnan(v)):
            raise ValueError("parameter values must not be NaN")
        slack = 1e-9 * np.maximum(1.0, np.abs(v))
        if np.any(v < lo - slack) or np.any(v > hi + slack):
            bad = [self.names[i] for i in np.nonzero((v < lo - slack) | (v > hi + slack))[0]]
            raise ValueError(f"parameters outside box bounds: {bad}")

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def with_values(self, values) -> "ParamVector":
        vals = tuple(float(v) for v in np.asarray(values, dtype=float).ravel())
        return ParamVector(vals, self.names, self.lower, self.upper)

    def clipped(self) -> "ParamVector":
        v = np.clip(self.array, np.asarray(self.lower), np.asarray(self.upper))
        return self.with_values(v)

    def boundary_active(self, tol: float = 1e-8) -> tuple[bool, ...]:
        """Which components sit on (or numerically at) a box face."""
        v, lo, hi = self.array, np.asarray(self.lower), np.asarray(self.upper)
        at = (v - lo <= tol * np.maximum(1.0, np.abs(lo))) | (hi - v <= tol * np.maximum(1.0, np.abs(hi)))
        return tuple(bool(b) for b in at)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


def as_array(theta) -> np.ndarray:
    """Accept a ParamVector or any array-like and return a 1-d float array."""
    if isinstance(theta, ParamVector):
        return theta.array
    return np.asarray(theta, dtype=float).ravel()
