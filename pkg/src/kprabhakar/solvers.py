"""Series solutions of the two fractional Cauchy problems.

``solve_relaxation`` evaluates the transform-derived double series for
the relaxation-type problem

    D^(gamma,mu,nu) y = lambda * P^delta y + f,   [P^(-gamma(1-nu)) y](0+) = K,

where D is the interpolated (Hilfer-type) derivative and P the kernel
convolution integral.  ``solve_diffusion`` evaluates the Fourier-mode
series for the diffusion problem with the regularized derivative in time.
Each solver has a residual companion that feeds the computed solution
back through the grid operators of :mod:`kprabhakar.operators` and
reports the worst pointwise defect; this is the acceptance oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import DivergenceError, DomainError
from .grids import Grid1D, SampledFunction
from .operators import (
    hilfer_prabhakar_derivative,
    prabhakar_integral,
    regularized_hilfer_prabhakar_derivative,
)
from .params import DEFAULT_CONTROL, HilferParams, PrabhakarParams, SeriesControl
from .special import ml_k, ml_k_grid

__all__ = [
    "RelaxationProblem",
    "DiffusionProblem",
    "SeriesSolution",
    "solve_relaxation",
    "relaxation_residual",
    "frozen_initial_datum",
    "solve_diffusion",
    "diffusion_residual",
    "residual_window",
    "default_mode_grid",
]

_GROWTH_LIMIT = 3  # consecutive growing terms before declaring divergence

#: Largest tolerable term magnitude in the alternating diffusion mode
#: series: beyond this the O(1) sum loses more than ~3 digits to
#: cancellation in double precision.
_HUMP_LIMIT = 1e13


@dataclass(frozen=True)
class RelaxationProblem:
    """Relaxation-type Cauchy problem data.

    ``lam`` is the coupling constant, ``delta`` the upper index of the
    integral on the right-hand side, ``K_init`` the frozen initial datum
    (the t -> 0+ limit of the complementary integral of y), ``forcing``
    the inhomogeneity (None means zero).
    """

    hp: HilferParams
    lam: float
    delta: float
    K_init: float
    forcing: Optional[SampledFunction] = None

    def __post_init__(self):
        if self.delta < 0:
            raise DomainError(f"delta must be >= 0, got {self.delta}")
        if self.hp.base.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.hp.base.gamma}")
        if self.K_init < 0:
            raise DomainError(f"K_init must be >= 0, got {self.K_init}")


@dataclass(frozen=True)
class DiffusionProblem:
    """Diffusion Cauchy problem data on a truncated spatial line.

    The initial profile must decay toward the grid edges (|g| at the two
    edge nodes at most 1e-8 of its peak); the Fourier quadrature treats it
    as compactly supported.
    """

    hp: HilferParams
    K_diff: float
    initial_profile: SampledFunction
    time_points: Sequence[float]

    def __post_init__(self):
        if not self.K_diff > 0:
            raise DomainError(f"K_diff must be > 0, got {self.K_diff}")
        object.__setattr__(self, "time_points", tuple(self.time_points))
        if any(t <= 0 for t in self.time_points):
            raise DomainError("time points must be > 0")
        g = self.initial_profile.values
        peak = float(np.max(np.abs(g)))
        edge = max(abs(g[0]), abs(g[-1]))
        if peak > 0 and edge > 1e-8 * peak:
            raise DomainError(
                f"initial profile does not decay at the grid edges "
                f"(edge/peak = {edge / peak:.3e} > 1e-8)"
            )


@dataclass
class SeriesSolution:
    """A truncated series solution with its truncation diagnostics."""

    values: SampledFunction
    terms_used: int
    tail_estimate: float


def _check_divergence(mags: List[float], what: str):
    if len(mags) > _GROWTH_LIMIT and all(
        mags[-i] > mags[-i - 1] for i in range(1, _GROWTH_LIMIT + 1)
    ):
        raise DivergenceError(
            f"{what}: term norms grew for {_GROWTH_LIMIT} consecutive orders "
            f"(last {mags[-1]:.3e}); series numerically divergent"
        )


def solve_relaxation(
    prob: RelaxationProblem,
    grid: Grid1D,
    ctrl: Optional[SeriesControl] = None,
) -> SeriesSolution:
    """Evaluate the double series solution of the relaxation problem.

    Each sum is truncated when the newest term's max-norm over the grid
    drops below rel_tol times the running max-norm of the partial sum.
    The node-0 value is stored as the cell-average surrogate
    2/h * int_0^h y - y(h): the leading series term can be singular at
    the origin, and this choice makes the first-cell trapezoid of y exact,
    which is what the downstream convolution quadrature consumes.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    if grid.origin != 0.0:
        raise DomainError(f"grid origin must be 0, got {grid.origin}")
    p = prob.hp.base
    nu = prob.hp.nu
    k, alpha, mu, gamma, omega = p.k, p.alpha, p.mu, p.gamma, p.omega
    x = grid.nodes
    xi = x[1:]
    h = grid.step
    zi = omega * xi ** (alpha / k)

    total = np.zeros(grid.count)
    cell0 = 0.0  # exact integral of y over the first cell [0, h]
    terms_used = 0
    tail = 0.0

    if prob.K_init != 0.0:
        running = 0.0
        mags: List[float] = []
        for n in range(ctrl.max_terms):
            c_n = nu * (k - mu) + mu * (1 + 2 * n)
            g_n = n * (prob.delta + gamma) + gamma * (1.0 - nu)
            pn = PrabhakarParams(k=k, alpha=alpha, mu=c_n, gamma=g_n, omega=omega)
            coeff = prob.K_init * prob.lam**n
            term = coeff * xi ** (c_n / k - 1.0) * ml_k_grid(zi, pn, ctrl)
            total[1:] += term
            # first-cell integral of this term has the closed form
            # coeff * k * h^(c_n/k) * E^(g_n)_{k,alpha,c_n+k}(omega h^(alpha/k))
            pn_up = pn.replace(mu=c_n + k)
            cell0 += (
                coeff * k * h ** (c_n / k) * ml_k(omega * h ** (alpha / k), pn_up, ctrl)
            )
            terms_used = max(terms_used, n + 1)
            mag = float(np.max(np.abs(term)))
            mags.append(mag)
            running = max(running, float(np.max(np.abs(total[1:]))))
            if prob.lam == 0.0 or mag <= ctrl.rel_tol * running:
                tail = max(tail, mag)
                break
            _check_divergence(mags, "relaxation homogeneous series")
        else:
            raise DivergenceError(
                f"relaxation homogeneous series not converged in "
                f"{ctrl.max_terms} terms"
            )

    if prob.forcing is not None:
        if prob.forcing.grid != grid:
            raise DomainError("forcing must be sampled on the solution grid")
        running = 0.0
        mags = []
        forcing_sum = np.zeros(grid.count)
        for n in range(ctrl.max_terms):
            pn = PrabhakarParams(
                k=k,
                alpha=alpha,
                mu=mu * (1 + 2 * n),
                gamma=gamma + n * (prob.delta + gamma),
                omega=omega,
            )
            term = prob.lam**n * prabhakar_integral(prob.forcing, pn, ctrl).values
            forcing_sum += term
            terms_used = max(terms_used, n + 1)
            mag = float(np.max(np.abs(term)))
            mags.append(mag)
            running = max(running, float(np.max(np.abs(forcing_sum))))
            if prob.lam == 0.0 or mag <= ctrl.rel_tol * max(running, 1e-300):
                tail = max(tail, mag)
                break
            _check_divergence(mags, "relaxation forcing series")
        else:
            raise DivergenceError(
                f"relaxation forcing series not converged in {ctrl.max_terms} terms"
            )
        total += forcing_sum
        cell0 += 0.5 * h * (forcing_sum[0] + forcing_sum[1])

    total[0] = 2.0 * cell0 / h - total[1]
    return SeriesSolution(
        values=SampledFunction(grid, total),
        terms_used=terms_used,
        tail_estimate=tail,
    )


def residual_window(grid: Grid1D, skip_fraction: float = 0.05) -> slice:
    """Interior node window used by the residual norms.

    Skips the initial layer (quadrature of the singular solution and the
    one-sided derivative stencils are boundary-quality there) and the last
    two nodes (one-sided stencils).
    """
    lo = max(2, int(np.ceil(skip_fraction * (grid.count - 1))))
    return slice(lo, grid.count - 2)


def relaxation_residual(
    prob: RelaxationProblem,
    y: SeriesSolution,
    ctrl: Optional[SeriesControl] = None,
) -> float:
    """Max interior defect of the relaxation equation for a computed y.

    Feeds y through the interpolated derivative and the right-hand-side
    integral from the operators module (independent of the series path
    that produced y) and returns max |D y - lam * P y - f| over the
    interior window.

    The problem data pin down two facts the grid operators cannot infer
    from samples alone and that the quadrature needs for convergence when
    K != 0: the origin cusp exponent of y (from the leading series term)
    and the frozen t -> 0+ datum of the inner integral (K itself).
    """
    ctrl = ctrl or DEFAULT_CONTROL
    p = prob.hp.base
    nu = prob.hp.nu
    if prob.K_init != 0.0:
        cusp = (nu * (p.k - p.mu) + p.mu) / p.k - 1.0
    else:
        cusp = None  # forcing-only solution: bounded, no origin cusp
    lhs = hilfer_prabhakar_derivative(
        y.values, prob.hp, ctrl, origin_exponent=cusp, inner_limit=prob.K_init
    ).values
    p_rhs = PrabhakarParams(
        k=p.k, alpha=p.alpha, mu=p.mu, gamma=prob.delta, omega=p.omega
    )
    rhs = prob.lam * prabhakar_integral(
        y.values, p_rhs, ctrl, origin_exponent=cusp
    ).values
    if prob.forcing is not None:
        rhs = rhs + prob.forcing.values
    win = residual_window(y.values.grid)
    return float(np.max(np.abs(lhs[win] - rhs[win])))


def frozen_initial_datum(
    prob: RelaxationProblem,
    y: SeriesSolution,
    ctrl: Optional[SeriesControl] = None,
) -> float:
    """Recover the frozen datum [complementary integral of y](0+) from y.

    Applies the inner integral of the interpolated derivative to the
    computed solution and extrapolates its first interior nodes to the
    origin.  For a correct solution this reproduces K_init.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    p = prob.hp.base
    nu = prob.hp.nu
    inner_order = (1.0 - nu) * (p.k - p.mu)
    if inner_order == 0.0:
        vals = y.values.values
    else:
        q_in = PrabhakarParams(
            k=p.k,
            alpha=p.alpha,
            mu=inner_order,
            gamma=-p.gamma * (1.0 - nu),
            omega=p.omega,
        )
        cusp = None
        if prob.K_init != 0.0:
            cusp = (nu * (p.k - p.mu) + p.mu) / p.k - 1.0
        vals = prabhakar_integral(y.values, q_in, ctrl, origin_exponent=cusp).values
    return float(3.0 * vals[1] - 3.0 * vals[2] + vals[3])


def _fourier_modes(g: SampledFunction, p_grid: Grid1D) -> np.ndarray:
    """Trapezoid Fourier transform of the initial profile on the mode grid."""
    x = g.grid.nodes
    pvals = p_grid.nodes
    phase = np.exp(-1j * np.outer(pvals, x))
    wx = np.full(g.grid.count, g.grid.step)
    wx[0] = wx[-1] = 0.5 * g.grid.step
    return phase @ (g.values * wx)


def _mode_multiplier(
    pvals: np.ndarray,
    t: float,
    prob: DiffusionProblem,
    ctrl: SeriesControl,
) -> tuple:
    """Per-mode decay factor sum_n (-K)^n p^(2n) t^(n mu/k) E^(n gamma)(...).

    Returns (values, terms_used, tail_estimate).
    """
    p = prob.hp.base
    k, alpha, mu, gamma, omega = p.k, p.alpha, p.mu, p.gamma, p.omega
    z = omega * t ** (alpha / k)
    out = np.zeros(len(pvals))
    p2 = pvals**2
    pmax2 = float(np.max(p2))
    hump = 1.0
    prev_mag = np.inf
    for n in range(ctrl.max_terms):
        if n == 0:
            # E^0_{k,alpha,k}(z) = 1 / Gamma_k(k) = 1: initial datum preserved
            scalar = 1.0
            term = np.ones(len(pvals))
        else:
            pn = PrabhakarParams(
                k=k, alpha=alpha, mu=n * mu + k, gamma=n * gamma, omega=omega
            )
            scalar = (-prob.K_diff) ** n * t ** (n * mu / k) * ml_k(z, pn, ctrl)
            term = scalar * p2**n
        out += term
        mag = abs(scalar) * pmax2**n
        hump = max(hump, mag)
        # The series is entire, so terms may grow through a hump before the
        # k-gamma decay wins; divergence here means the hump is too tall to
        # cancel within double precision.
        if hump > _HUMP_LIMIT:
            raise DivergenceError(
                f"diffusion mode series cancellation beyond double precision "
                f"(term magnitude {hump:.3e} at worst mode "
                f"|p| = {np.sqrt(pmax2):.4g}, t = {t}; shrink the mode range)"
            )
        if mag <= ctrl.rel_tol * max(float(np.max(np.abs(out))), 1e-300) and (
            mag <= prev_mag
        ):
            return out, n + 1, mag
        prev_mag = mag
    raise DivergenceError(
        f"diffusion mode series not converged in {ctrl.max_terms} terms at t={t}"
    )


def _mode_multiplier_dt(
    pvals: np.ndarray,
    t: float,
    prob: DiffusionProblem,
    ctrl: SeriesControl,
) -> np.ndarray:
    """Termwise time derivative of the mode multiplier (n = 0 term is flat)."""
    p = prob.hp.base
    k, alpha, mu, gamma, omega = p.k, p.alpha, p.mu, p.gamma, p.omega
    z = omega * t ** (alpha / k)
    out = np.zeros(len(pvals))
    p2 = pvals**2
    pmax2 = float(np.max(p2))
    running = 0.0
    prev_mag = np.inf
    for n in range(1, ctrl.max_terms):
        pn = PrabhakarParams(k=k, alpha=alpha, mu=n * mu, gamma=n * gamma, omega=omega)
        scalar = (
            (-prob.K_diff) ** n / k * t ** (n * mu / k - 1.0) * ml_k(z, pn, ctrl)
        )
        out += scalar * p2**n
        mag = abs(scalar) * pmax2**n
        if mag > _HUMP_LIMIT:
            raise DivergenceError(
                f"diffusion mode derivative series cancellation beyond double "
                f"precision (term magnitude {mag:.3e} at worst mode "
                f"|p| = {np.sqrt(pmax2):.4g}, t = {t}; shrink the mode range)"
            )
        running = max(running, float(np.max(np.abs(out))))
        if mag <= ctrl.rel_tol * max(running, 1e-300) and mag <= prev_mag:
            return out
        prev_mag = mag
    raise DivergenceError(
        f"diffusion mode derivative series not converged in "
        f"{ctrl.max_terms} terms at t={t}"
    )


def _synthesize(
    ghat_m: np.ndarray, p_grid: Grid1D, x: np.ndarray
) -> np.ndarray:
    pvals = p_grid.nodes
    wp = np.full(p_grid.count, p_grid.step)
    wp[0] = wp[-1] = 0.5 * p_grid.step
    phase = np.exp(1j * np.outer(x, pvals))
    return (phase @ (ghat_m * wp)).real / (2.0 * np.pi)


def solve_diffusion(
    prob: DiffusionProblem,
    p_grid: Grid1D,
    ctrl: Optional[SeriesControl] = None,
) -> List[SeriesSolution]:
    """Fourier synthesis of the diffusion solution at each time point.

    Forward transform of the initial profile by trapezoid quadrature,
    per-mode multiplication by the truncated decay series, inverse
    synthesis by trapezoid quadrature on the mode grid.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    g = prob.initial_profile
    ghat = _fourier_modes(g, p_grid)
    x = g.grid.nodes
    out: List[SeriesSolution] = []
    for t in prob.time_points:
        mult, n_used, tail = _mode_multiplier(p_grid.nodes, t, prob, ctrl)
        u = _synthesize(ghat * mult, p_grid, x)
        out.append(
            SeriesSolution(
                values=SampledFunction(g.grid, u),
                terms_used=n_used,
                tail_estimate=tail,
            )
        )
    return out


def diffusion_residual(
    prob: DiffusionProblem,
    solutions: Sequence[SeriesSolution],
    ctrl: Optional[SeriesControl] = None,
    p_grid: Optional[Grid1D] = None,
    time_count: int = 257,
) -> float:
    """Max defect |D_t u - K u_xx| over interior space-time samples.

    The time derivative of u is synthesized termwise from the analytic
    mode series; the regularized interpolated derivative is then applied
    numerically, per spatial node, through the operators module, and the
    spatial Laplacian comes from centered differences.  The residual is
    taken over interior spatial nodes and times in the interior window of
    [0, max(time_points)].
    """
    ctrl = ctrl or DEFAULT_CONTROL
    g = prob.initial_profile
    x = g.grid.nodes
    hx = g.grid.step
    t_max = max(prob.time_points)
    t_grid = Grid1D.from_span(0.0, t_max, time_count)
    tn = t_grid.nodes
    p_grid = p_grid or default_mode_grid(prob)
    ghat = _fourier_modes(g, p_grid)

    # u(x, t) and du/dt(x, t) on the space-time lattice
    u = np.empty((len(x), len(tn)))
    dudt = np.empty_like(u)
    u[:, 0] = g.values
    dudt[:, 0] = 0.0  # replaced by the first-cell surrogate below
    for j, t in enumerate(tn):
        if j == 0:
            continue
        mult, _, _ = _mode_multiplier(p_grid.nodes, t, prob, ctrl)
        dmult = _mode_multiplier_dt(p_grid.nodes, t, prob, ctrl)
        u[:, j] = _synthesize(ghat * mult, p_grid, x)
        dudt[:, j] = _synthesize(ghat * dmult, p_grid, x)
    # du/dt is singular at t = 0+; store the cell-average surrogate
    # 2/h (u(h) - u(0)) - du/dt(h), which integrates exactly over the
    # first cell of the downstream convolution quadrature.
    ht = t_grid.step
    dudt[:, 0] = 2.0 * (u[:, 1] - u[:, 0]) / ht - dudt[:, 1]

    uxx = np.empty_like(u)
    uxx[1:-1, :] = (u[2:, :] - 2.0 * u[1:-1, :] + u[:-2, :]) / hx**2
    uxx[0, :] = uxx[1, :]
    uxx[-1, :] = uxx[-2, :]

    t_win = residual_window(t_grid)
    worst = 0.0
    for i in range(1, len(x) - 1):
        profile = SampledFunction(t_grid, u[i, :], derivative_values=dudt[i, :])
        lhs = regularized_hilfer_prabhakar_derivative(profile, prob.hp, ctrl).values
        rhs = prob.K_diff * uxx[i, :]
        worst = max(worst, float(np.max(np.abs(lhs[t_win] - rhs[t_win]))))
    return worst


def default_mode_grid(prob: DiffusionProblem, p_max: float = 3.5) -> Grid1D:
    """Symmetric mode grid commensurate with the spatial period.

    Modes are placed at integer multiples of pi/L (L the spatial
    half-span), which makes the synthesis an exact Fourier series of the
    2L-periodized profile: every nonzero mode then integrates to zero over
    the spatial grid and the zero-mode mass is conserved to rounding.

    The half-width bound balances spectral truncation against the
    cancellation hump of the mode series, which grows rapidly with
    K p^2 t^(mu/k); callers with broad spectra and short horizons can
    widen it, subject to the hump guard.
    """
    x = prob.initial_profile.grid
    half_span = 0.5 * (x.end - x.origin)
    dp = np.pi / half_span
    m = max(1, int(np.floor(p_max / dp)))
    return Grid1D.from_span(-m * dp, m * dp, 2 * m + 1)
