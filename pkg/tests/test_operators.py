import math

import numpy as np
import pytest

from kprabhakar import (
    DomainError,
    Grid1D,
    HilferParams,
    PrabhakarParams,
    SampledFunction,
    k_gamma,
    ml_k_grid,
)
from kprabhakar.operators import (
    hilfer_prabhakar_derivative,
    k_rl_integral,
    prabhakar_derivative,
    prabhakar_integral,
    regularized_hilfer_prabhakar_derivative,
    regularized_prabhakar_derivative,
)


def _ones(grid):
    return SampledFunction(
        grid, np.ones(grid.count), derivative_values=np.zeros(grid.count)
    )


def _interior(grid):
    # skip the first few nodes (boundary-quality values) and the one-sided end
    return slice(max(2, grid.count // 20), grid.count - 2)


def test_integral_of_one_closed_form():
    # gamma=0: P f = x^(mu/k) / Gamma_k(mu + k) for f == 1
    grid = Grid1D.from_span(0.0, 2.0, 2049)
    for k, mu in [(1.0, 0.5), (2.0, 1.3), (1.4, 2.2)]:
        p = PrabhakarParams(k=k, alpha=1.0, mu=mu, gamma=0.0, omega=0.7)
        out = prabhakar_integral(_ones(grid), p)
        x = grid.nodes
        exact = x ** (mu / k) / k_gamma(mu + k, k)
        sl = _interior(grid)
        assert np.max(np.abs(out.values[sl] - exact[sl])) <= 5e-5 * np.max(exact)
        assert out.values[0] == 0.0


def test_integral_constant_kernel_case():
    # k=2, mu=2, gamma=0 makes the kernel the constant 1/k, so P f = x/2
    grid = Grid1D.from_span(0.0, 2.0, 513)
    p = PrabhakarParams(k=2.0, alpha=1.0, mu=2.0, gamma=0.0, omega=0.3)
    out = prabhakar_integral(_ones(grid), p)
    assert np.allclose(out.values, grid.nodes / 2.0, atol=1e-12)


def test_rl_integral_polynomials():
    grid = Grid1D.from_span(0.0, 2.0, 1025)
    x = grid.nodes
    out = k_rl_integral(_ones(grid), 1.0, 1.0)
    assert np.max(np.abs(out.values - x)) <= 1e-10
    f = SampledFunction(grid, x.copy(), derivative_values=np.ones(grid.count))
    out = k_rl_integral(f, 1.0, 1.0)
    assert np.max(np.abs(out.values - x**2 / 2.0)) <= 1e-10
    out = k_rl_integral(_ones(grid), 3.0, 2.0)
    exact = x**1.5 / k_gamma(5.0, 2.0)
    sl = _interior(grid)
    assert np.max(np.abs(out.values[sl] - exact[sl])) <= 1e-5


def test_integral_gamma0_equals_rl():
    grid = Grid1D.from_span(0.0, 2.0, 513)
    f = SampledFunction(grid, np.sin(grid.nodes))
    p = PrabhakarParams(k=1.3, alpha=1.1, mu=0.8, gamma=0.0, omega=-0.4)
    a = prabhakar_integral(f, p).values
    b = k_rl_integral(f, 0.8, 1.3).values
    assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, np.max(np.abs(b)))


def test_integral_linearity():
    grid = Grid1D.from_span(0.0, 2.0, 257)
    x = grid.nodes
    p = PrabhakarParams(k=1.2, alpha=1.3, mu=0.9, gamma=0.5, omega=-0.6)
    f = SampledFunction(grid, np.sin(x))
    g = SampledFunction(grid, np.exp(-x))
    combo = SampledFunction(grid, 2.0 * np.sin(x) - 3.0 * np.exp(-x))
    lhs = prabhakar_integral(combo, p).values
    rhs = 2.0 * prabhakar_integral(f, p).values - 3.0 * prabhakar_integral(g, p).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_quadrature_convergence_order():
    # halving h shrinks the f==1 defect at x=1 by at least 3.5x
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.6, gamma=0.8, omega=-0.5)

    def err(n):
        grid = Grid1D.from_span(0.0, 1.0, n + 1)
        out = prabhakar_integral(_ones(grid), p)
        x = 1.0
        exact = x**0.6 * float(
            ml_k_grid(
                np.array([p.omega * x**p.alpha]),
                PrabhakarParams(k=1.0, alpha=1.0, mu=1.6, gamma=0.8, omega=0.0),
            )[0]
        )
        return abs(out.values[-1] - exact)

    e1, e2 = err(256), err(512)
    assert e2 <= e1 / 3.5


def test_derivative_of_one_classical():
    # gamma=0, k=1, mu=1/2: RL derivative of 1 is x^(-1/2)/Gamma(1/2)
    grid = Grid1D.from_span(0.0, 2.0, 4097)
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.5, gamma=0.0, omega=0.2)
    out = prabhakar_derivative(_ones(grid), p)
    x = grid.nodes
    sl = slice(grid.count // 8, grid.count - 2)
    exact = x[sl] ** -0.5 / math.gamma(0.5)
    assert np.max(np.abs(out.values[sl] - exact) / exact) <= 2e-3


def test_derivative_of_t_classical():
    grid = Grid1D.from_span(0.0, 2.0, 4097)
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.5, gamma=0.0, omega=0.0)
    f = SampledFunction(grid, grid.nodes.copy())
    out = prabhakar_derivative(f, p)
    x = grid.nodes
    sl = slice(grid.count // 8, grid.count - 2)
    exact = x[sl] ** 0.5 / math.gamma(1.5)
    assert np.max(np.abs(out.values[sl] - exact) / exact) <= 2e-3


def test_derivative_left_inverse_of_integral():
    grid = Grid1D.from_span(0.0, 2.0, 4097)
    p = PrabhakarParams(k=1.2, alpha=1.1, mu=0.7, gamma=0.4, omega=-0.3)
    f = SampledFunction(grid, np.cos(grid.nodes))
    recovered = prabhakar_derivative(prabhakar_integral(f, p), p)
    sl = slice(grid.count // 8, grid.count - 4)
    assert np.max(np.abs(recovered.values[sl] - f.values[sl])) <= 5e-3


def test_regularized_derivative_kills_constants():
    grid = Grid1D.from_span(0.0, 2.0, 513)
    p = PrabhakarParams(k=1.2, alpha=1.1, mu=0.7, gamma=0.4, omega=-0.3)
    out = regularized_prabhakar_derivative(_ones(grid), p)
    assert np.max(np.abs(out.values)) <= 1e-12


def test_regularized_derivative_of_t_closed_form():
    # f(t)=t: result is k t^((k-mu)/k) E^(-gamma)_{k,alpha,2k-mu}(omega t^(alpha/k))
    grid = Grid1D.from_span(0.0, 2.0, 2049)
    p = PrabhakarParams(k=1.3, alpha=1.1, mu=0.8, gamma=0.6, omega=-0.4)
    f = SampledFunction(grid, grid.nodes.copy(), derivative_values=np.ones(grid.count))
    out = regularized_prabhakar_derivative(f, p)
    x = grid.nodes
    comp = PrabhakarParams(
        k=p.k, alpha=p.alpha, mu=2 * p.k - p.mu, gamma=-p.gamma, omega=0.0
    )
    exact = p.k * x ** ((p.k - p.mu) / p.k) * ml_k_grid(p.omega * x ** (p.alpha / p.k), comp)
    sl = _interior(grid)
    scale = np.max(np.abs(exact))
    assert np.max(np.abs(out.values[sl] - exact[sl])) <= 2e-4 * scale


def test_hilfer_reduces_at_nu_endpoints():
    grid = Grid1D.from_span(0.0, 2.0, 2049)
    p = PrabhakarParams(k=1.3, alpha=1.1, mu=0.8, gamma=0.6, omega=-0.4)
    x = grid.nodes
    f = SampledFunction(grid, np.sin(x), derivative_values=np.cos(x))
    sl = _interior(grid)
    d0 = hilfer_prabhakar_derivative(f, HilferParams(base=p, nu=0.0)).values
    plain = prabhakar_derivative(f, p).values
    scale = np.max(np.abs(plain[sl]))
    assert np.max(np.abs(d0[sl] - plain[sl])) <= 2e-3 * scale
    d1 = hilfer_prabhakar_derivative(f, HilferParams(base=p, nu=1.0)).values
    reg = regularized_prabhakar_derivative(f, p).values
    assert np.max(np.abs(d1[sl] - reg[sl])) <= 2e-3 * scale


def test_regularized_hilfer_is_nu_independent():
    grid = Grid1D.from_span(0.0, 2.0, 513)
    p = PrabhakarParams(k=1.3, alpha=1.1, mu=0.8, gamma=0.6, omega=-0.4)
    x = grid.nodes
    f = SampledFunction(grid, np.exp(-x), derivative_values=-np.exp(-x))
    a = regularized_hilfer_prabhakar_derivative(f, HilferParams(base=p, nu=0.2))
    b = regularized_hilfer_prabhakar_derivative(f, HilferParams(base=p, nu=0.8))
    assert np.array_equal(a.values, b.values)


def test_regularized_hilfer_of_constant_is_zero():
    grid = Grid1D.from_span(0.0, 2.0, 257)
    p = PrabhakarParams(k=1.3, alpha=1.1, mu=0.8, gamma=0.6, omega=-0.4)
    out = regularized_hilfer_prabhakar_derivative(_ones(grid), HilferParams(base=p, nu=0.5))
    assert np.max(np.abs(out.values)) <= 1e-12


def test_composition_semigroup():
    # P^g1_{mu1} (P^g2_{mu2} f) = P^(g1+g2)_{mu1+mu2} f
    grid = Grid1D.from_span(0.0, 2.0, 4097)
    x = grid.nodes
    p1 = PrabhakarParams(k=1.2, alpha=1.1, mu=0.8, gamma=0.3, omega=-0.15)
    p2 = PrabhakarParams(k=1.2, alpha=1.1, mu=0.6, gamma=0.5, omega=-0.15)
    merged = PrabhakarParams(k=1.2, alpha=1.1, mu=1.4, gamma=0.8, omega=-0.15)
    for values in (np.ones(grid.count), x.copy(), np.sin(x)):
        f = SampledFunction(grid, values)
        inner = prabhakar_integral(f, p2)
        nested = prabhakar_integral(
            inner, p1, origin_exponent=p2.mu / p2.k
        ).values
        direct = prabhakar_integral(f, merged).values
        scale = np.max(np.abs(direct))
        assert np.max(np.abs(nested - direct)) <= 5e-4 * scale


def test_grid_origin_must_be_zero():
    grid = Grid1D.from_span(1.0, 2.0, 65)
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.5, gamma=0.0, omega=0.0)
    with pytest.raises(DomainError):
        prabhakar_integral(SampledFunction(grid, np.ones(65)), p)


def test_too_coarse_grid_rejected():
    grid = Grid1D.from_span(0.0, 1.0, 3)
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.5, gamma=0.0, omega=0.0)
    with pytest.raises(DomainError):
        prabhakar_derivative(SampledFunction(grid, np.ones(3)), p)


def test_hilfer_params_validation():
    p = PrabhakarParams(k=1.0, alpha=1.0, mu=0.5, gamma=0.0, omega=0.0)
    with pytest.raises(DomainError):
        HilferParams(base=p, nu=1.5)
    with pytest.raises(DomainError):
        HilferParams(
            base=PrabhakarParams(k=1.0, alpha=1.0, mu=1.5, gamma=0.0, omega=0.0),
            nu=0.5,
        )
