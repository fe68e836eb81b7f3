import numpy as np
import pytest

from kprabhakar import (
    DivergenceError,
    Grid1D,
    HilferParams,
    PrabhakarParams,
    SampledFunction,
    ml_k,
)
from kprabhakar.solvers import (
    DiffusionProblem,
    RelaxationProblem,
    default_mode_grid,
    diffusion_residual,
    frozen_initial_datum,
    relaxation_residual,
    solve_diffusion,
    solve_relaxation,
)


def _relax_prob(lam=-0.5, K=1.0):
    base = PrabhakarParams(k=1.3, alpha=1.0, mu=0.6, gamma=0.2, omega=-0.5)
    return RelaxationProblem(
        hp=HilferParams(base=base, nu=0.4), lam=lam, delta=0.1, K_init=K
    )


def _diff_prob(times=(0.2, 0.5)):
    base = PrabhakarParams(k=2.0, alpha=1.5, mu=1.2, gamma=0.3, omega=-0.2)
    x = Grid1D.from_span(-12.0, 12.0, 481)
    g = SampledFunction(x, np.exp(-x.nodes**2 / 4.0))
    return DiffusionProblem(
        hp=HilferParams(base=base, nu=0.5),
        K_diff=1.0,
        initial_profile=g,
        time_points=tuple(times),
    )


def test_relaxation_lambda_zero_is_first_series_term():
    # lam = 0 keeps only the n = 0 term, a pure kernel-shaped profile
    prob = _relax_prob(lam=0.0)
    grid = Grid1D.from_span(0.0, 2.0, 513)
    sol = solve_relaxation(prob, grid)
    p = prob.hp.base
    nu, k, mu = prob.hp.nu, p.k, p.mu
    expo = (nu * (k - mu) + mu) / k - 1.0
    t = grid.nodes[1:]
    comp = PrabhakarParams(
        k=k, alpha=p.alpha, mu=nu * (k - mu) + mu, gamma=p.gamma * (1.0 - nu), omega=0.0
    )
    expect = prob.K_init * t**expo * np.array(
        [ml_k(p.omega * ti ** (p.alpha / k), comp) for ti in t]
    )
    assert np.max(np.abs(sol.values.values[1:] - expect)) <= 1e-10 * np.max(
        np.abs(expect)
    )


def test_relaxation_residual_small_and_refining():
    prob = _relax_prob()
    rels = []
    for n in (512, 1024):
        grid = Grid1D.from_span(0.0, 2.0, n + 1)
        sol = solve_relaxation(prob, grid)
        rels.append(relaxation_residual(prob, sol))
    assert rels[0] <= 1e-2
    assert rels[1] < rels[0]


def test_frozen_initial_datum_recovery():
    prob = _relax_prob()
    grid = Grid1D.from_span(0.0, 2.0, 1025)
    sol = solve_relaxation(prob, grid)
    assert frozen_initial_datum(prob, sol) == pytest.approx(prob.K_init, rel=1e-2)


def test_relaxation_series_diagnostics():
    prob = _relax_prob()
    grid = Grid1D.from_span(0.0, 2.0, 257)
    sol = solve_relaxation(prob, grid)
    assert sol.terms_used >= 2
    assert sol.tail_estimate < 1e-10 * np.max(np.abs(sol.values.values))


def test_diffusion_initial_condition_recovery():
    prob = _diff_prob(times=(1e-6,))
    sols = solve_diffusion(prob, default_mode_grid(prob))
    g = prob.initial_profile.values
    err = np.max(np.abs(sols[0].values.values - g))
    assert err <= 1e-4 * np.max(np.abs(g))


def test_diffusion_mass_conserved():
    prob = _diff_prob(times=(0.1, 0.3, 0.5))
    sols = solve_diffusion(prob, default_mode_grid(prob))
    h = prob.initial_profile.grid.step
    # trapezoid quadrature: the mode grid is commensurate with the span,
    # so every nonzero mode integrates to zero and only the mass survives
    masses = [
        h * (np.sum(s.values.values) - 0.5 * (s.values.values[0] + s.values.values[-1]))
        for s in sols
    ]
    spread = max(masses) - min(masses)
    assert spread <= 1e-10 * abs(masses[0])


def test_diffusion_classical_mode_multiplier():
    # k=1, gamma=0, nu irrelevant: each mode decays as E_mu(-K p^2 t^mu)
    from kprabhakar.solvers import _mode_multiplier
    from kprabhakar.params import DEFAULT_CONTROL

    base = PrabhakarParams(k=1.0, alpha=0.9, mu=0.8, gamma=0.0, omega=-0.3)
    x = Grid1D.from_span(-10.0, 10.0, 201)
    prob = DiffusionProblem(
        hp=HilferParams(base=base, nu=0.5),
        K_diff=0.7,
        initial_profile=SampledFunction(x, np.exp(-x.nodes**2)),
        time_points=(0.4,),
    )
    p = np.array([0.5, 1.0, 2.0])
    got = _mode_multiplier(p, 0.4, prob, DEFAULT_CONTROL)[0]
    comp = PrabhakarParams(k=1.0, alpha=0.8, mu=1.0, gamma=1.0, omega=0.0)
    expect = np.array(
        [ml_k(-0.7 * pi**2 * 0.4**0.8, comp) for pi in p]
    )
    assert np.max(np.abs(got - expect)) <= 1e-10


def test_diffusion_residual_small():
    prob = _diff_prob(times=(0.2, 0.5))
    p_grid = default_mode_grid(prob)
    sols = solve_diffusion(prob, p_grid)
    rel = diffusion_residual(prob, sols, p_grid=p_grid, time_count=65)
    assert rel <= 1e-2


def test_diffusion_hump_guard():
    # wide mode range at long horizon: cancellation exceeds double precision
    prob = _diff_prob(times=(2.0,))
    wide = Grid1D.from_span(-8.0, 8.0, 33)
    with pytest.raises(DivergenceError):
        solve_diffusion(prob, wide)


def test_diffusion_profile_must_decay():
    base = PrabhakarParams(k=2.0, alpha=1.5, mu=1.2, gamma=0.3, omega=-0.2)
    x = Grid1D.from_span(-2.0, 2.0, 41)
    from kprabhakar.errors import DomainError

    with pytest.raises(DomainError):
        DiffusionProblem(
            hp=HilferParams(base=base, nu=0.5),
            K_diff=1.0,
            initial_profile=SampledFunction(x, np.exp(-x.nodes**2 / 4.0)),
            time_points=(0.1,),
        )
