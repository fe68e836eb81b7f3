"""Parameter tuples shared by the kernels, operators and transforms."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PrabhakarParams:
    """The parameter tuple (k, alpha, mu, gamma, omega).

    ``k`` is the deformation parameter, ``alpha`` the inner order, ``mu``
    the outer order, ``gamma`` the upper index and ``omega`` the kernel
    frequency.  All operators and closed-form transforms in this package
    are parameterized by one such tuple.
    """

    k: float
    alpha: float
    mu: float
    gamma: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"k must be > 0, got {self.k}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be > 0, got {self.alpha}")
        if not self.mu > 0:
            raise DomainError(f"mu must be > 0, got {self.mu}")

    def replace(self, **changes) -> "PrabhakarParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class HilferParams:
    """PrabhakarParams plus the interpolation weight ``nu`` in [0, 1].

    The base tuple must have ``mu`` strictly inside (0, k) so that the
    two-stage composition of the interpolated derivative is first order
    (m = 1) on both sides of the split.
    """

    base: PrabhakarParams
    nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0:
            raise DomainError(f"nu must be in [0, 1], got {self.nu}")
        if not self.base.mu < self.base.k:
            raise DomainError(
                f"mu must be in (0, k) for the interpolated derivative, "
                f"got mu={self.base.mu}, k={self.base.k}"
            )


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for every infinite series in the package."""

    rel_tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise DomainError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()
