"""Scalar special functions.

The building blocks everything else is assembled from: the k-gamma
function, the k-Pochhammer symbol, the three-index k-Mittag-Leffler
series and the singular convolution kernel built from it.

All evaluations are over the reals.  The series are summed with
compensated accumulation because terms alternate in sign for negative
``omega`` or ``gamma`` and plain summation loses digits to cancellation.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.special import gamma as _gamma, gammaln as _gammaln

from .errors import DomainError, TruncationError
from .params import DEFAULT_CONTROL, PrabhakarParams, SeriesControl

__all__ = ["k_gamma", "k_pochhammer", "ml_k", "ml_k_grid", "prabhakar_kernel"]


def k_gamma(z: float, k: float) -> float:
    """k-gamma function Gamma_k(z) = k^(z/k - 1) * Gamma(z/k).

    Satisfies Gamma_k(z + k) = z * Gamma_k(z) and reduces to the ordinary
    gamma function at k = 1.
    """
    if not z > 0:
        raise DomainError(f"k_gamma requires z > 0, got {z}")
    if not k > 0:
        raise DomainError(f"k_gamma requires k > 0, got {k}")
    return k ** (z / k - 1.0) * _gamma(z / k)


def k_pochhammer(g: float, n: int, k: float) -> float:
    """Rising k-factorial (g)_{n,k} = g (g+k) (g+2k) ... (g+(n-1)k).

    The empty product (n = 0) is 1.
    """
    if n < 0:
        raise DomainError(f"k_pochhammer requires n >= 0, got {n}")
    out = 1.0
    for i in range(n):
        out *= g + i * k
    return out


def _kgamma_step(n: int, p: PrabhakarParams) -> float:
    """Ratio Gamma_k(alpha(n+1)+mu) / Gamma_k(alpha n + mu), via log-gamma."""
    a, mu, k = p.alpha, p.mu, p.k
    return k ** (a / k) * math.exp(
        _gammaln((a * (n + 1) + mu) / k) - _gammaln((a * n + mu) / k)
    )


def ml_k(z: float, p: PrabhakarParams, ctrl: Optional[SeriesControl] = None) -> float:
    """Three-index k-Mittag-Leffler function E^gamma_{k,alpha,mu}(z).

    Sums  sum_{n>=0} (gamma)_{n,k} z^n / (Gamma_k(alpha n + mu) n!)  by the
    term recurrence

        term_{n+1} = term_n * (gamma + n k) * z
                     / ((n+1) * Gamma_k(alpha(n+1)+mu)/Gamma_k(alpha n+mu))

    which avoids forming large gammas and factorials.  Truncation stops
    once the newest term is below rel_tol times the partial sum *and* the
    terms have started decreasing, so the stop cannot fire before the
    series hump for large |z|.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    term = 1.0 / k_gamma(p.mu, p.k)
    total = term
    comp = 0.0  # compensated-summation carry
    prev_mag = abs(term)
    for n in range(ctrl.max_terms):
        term = term * (p.gamma + n * p.k) * z / ((n + 1) * _kgamma_step(n, p))
        if term == 0.0:
            return total
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        mag = abs(term)
        if mag <= ctrl.rel_tol * abs(total) and mag <= prev_mag:
            return total
        prev_mag = mag
    raise TruncationError(
        f"k-Mittag-Leffler series did not converge within {ctrl.max_terms} "
        f"terms at z={z} (last term {abs(term):.3e})",
        partial_sum=total,
        last_term=abs(term),
    )


def ml_k_grid(
    z: np.ndarray, p: PrabhakarParams, ctrl: Optional[SeriesControl] = None
) -> np.ndarray:
    """Vectorized E^gamma_{k,alpha,mu} over an array of real arguments.

    Same recurrence and stopping rule as :func:`ml_k`, with the stop taken
    uniformly: iteration ends when the max-norm of the newest term array is
    certified small relative to the max-norm of the partial sums.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    z = np.asarray(z, dtype=float)
    term = np.full(z.shape, 1.0 / k_gamma(p.mu, p.k))
    total = term.copy()
    comp = np.zeros_like(term)
    prev_mag = float(np.max(np.abs(term)))
    for n in range(ctrl.max_terms):
        with np.errstate(over="ignore"):
            term = term * ((p.gamma + n * p.k) / ((n + 1) * _kgamma_step(n, p))) * z
        mag = float(np.max(np.abs(term)))
        if mag == 0.0:
            return total
        if not math.isfinite(mag):
            raise TruncationError(
                f"k-Mittag-Leffler term overflowed at order {n + 1} on grid",
                partial_sum=total,
                last_term=mag,
            )
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if mag <= ctrl.rel_tol * float(np.max(np.abs(total))) and mag <= prev_mag:
            return total
        prev_mag = mag
    raise TruncationError(
        f"k-Mittag-Leffler series did not converge within {ctrl.max_terms} "
        f"terms on grid (last term max {mag:.3e})",
        partial_sum=total,
        last_term=mag,
    )


def prabhakar_kernel(
    t: float, p: PrabhakarParams, ctrl: Optional[SeriesControl] = None
) -> float:
    """Singular convolution kernel of the k-Prabhakar integral.

    Returns (t^(mu/k - 1) / k) * E^gamma_{k,alpha,mu}(omega t^(alpha/k))
    for t > 0 and 0 for t <= 0.  The singularity at t -> 0+ (mu < k) is
    integrable.
    """
    if t <= 0.0:
        return 0.0
    return (
        t ** (p.mu / p.k - 1.0) / p.k * ml_k(p.omega * t ** (p.alpha / p.k), p, ctrl)
    )
