"""Uniform grids and grid-sampled functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with nodes origin + i*step for i = 0..count-1."""

    origin: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError(f"step must be > 0, got {self.step}")
        if self.count < 2:
            raise DomainError(f"count must be >= 2, got {self.count}")

    @classmethod
    def from_span(cls, origin: float, end: float, count: int) -> "Grid1D":
        if count < 2:
            raise DomainError(f"count must be >= 2, got {count}")
        return cls(origin, (end - origin) / (count - 1), count)

    @property
    def nodes(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.count)

    @property
    def end(self) -> float:
        return self.origin + self.step * (self.count - 1)


@dataclass(eq=False)
class SampledFunction:
    """A function represented by its values on a uniform grid.

    ``derivative_values`` may carry analytic first-derivative samples;
    operators that need f' prefer them over numerical differentiation.
    Membership of the underlying function in L^1 / AC^1 is the caller's
    responsibility and is not checked.
    """

    grid: Grid1D
    values: np.ndarray
    derivative_values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.count,):
            raise ValueError(
                f"values must have length {self.grid.count}, "
                f"got shape {self.values.shape}"
            )
        if self.derivative_values is not None:
            self.derivative_values = np.asarray(self.derivative_values, dtype=float)
            if self.derivative_values.shape != (self.grid.count,):
                raise ValueError(
                    f"derivative_values must have length {self.grid.count}, "
                    f"got shape {self.derivative_values.shape}"
                )

    @classmethod
    def from_callable(
        cls,
        grid: Grid1D,
        fn: Callable[[np.ndarray], np.ndarray],
        dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "SampledFunction":
        x = grid.nodes
        dv = None if dfn is None else np.asarray(dfn(x), dtype=float) + 0.0 * x
        return cls(grid, np.asarray(fn(x), dtype=float) + 0.0 * x, dv)
