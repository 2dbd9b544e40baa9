"""Axis-aligned hyper-rectangles.

Boxes are half-open, ``lower[k] <= x_k < upper[k]``, which is what lets a
dyadic bisection partition a box without overlap or gaps.  Infinite
endpoints are allowed; operations that need a bounded box say so.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class HyperRectangle:
    """Product of half-open intervals ``[lower_k, upper_k)``."""

    lower: NDArray[np.float64]
    upper: NDArray[np.float64]

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lower and upper must be matching 1-D vectors")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box endpoints must not be NaN")
        if np.any(lo > hi):
            raise ValueError("need lower <= upper in every coordinate")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def side_lengths(self) -> NDArray[np.float64]:
        return self.upper - self.lower

    @property
    def center(self) -> NDArray[np.float64]:
        return 0.5 * (self.lower + self.upper)

    def volume(self) -> float:
        """Product of side lengths; inf for unbounded, 0 for degenerate."""
        sides = self.side_lengths
        if np.any(sides == 0.0) and np.any(np.isinf(sides)):
            raise ValueError("box mixes zero-length and infinite sides")
        return float(np.prod(sides))

    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def contains(self, points) -> NDArray[np.bool_]:
        """Half-open membership test for one point or a batch."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValueError("point dimension mismatch")
        return np.all((pts >= self.lower) & (pts < self.upper), axis=1)

    def split_largest_side(self) -> tuple["HyperRectangle", "HyperRectangle", int]:
        """Bisect along the longest side (lowest index on ties).

        Returns the two halves and the split axis.  The midpoint is the
        floating-point average of the endpoints, so repeated splits of a
        dyadic box stay exact.
        """
        if not self.is_bounded():
            raise ValueError("cannot split an unbounded box")
        sides = self.side_lengths
        axis = int(np.argmax(sides))
        mid = 0.5 * (self.lower[axis] + self.upper[axis])
        lo2 = self.lower.copy()
        hi1 = self.upper.copy()
        hi1[axis] = mid
        lo2[axis] = mid
        return (
            HyperRectangle(self.lower.copy(), hi1),
            HyperRectangle(lo2, self.upper.copy()),
            axis,
        )

    def double_size(self) -> "HyperRectangle":
        """Double every side length about the center."""
        if not self.is_bounded():
            raise ValueError("cannot double an unbounded box")
        c = self.center
        half = self.side_lengths  # new half-width = old full width
        return HyperRectangle(c - half, c + half)

    @classmethod
    def bounding_box(cls, points) -> "HyperRectangle":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        return cls(pts.min(axis=0), pts.max(axis=0))

    @classmethod
    def whole_space(cls, dim: int) -> "HyperRectangle":
        return cls(np.full(dim, -np.inf), np.full(dim, np.inf))
