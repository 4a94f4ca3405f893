import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spheroidal.diagnostics import (GridFunction, apply_H, interior_residual, operator_norm_estimate,
                                    polynomial_bump, second_derivative_weights)
from spheroidal.grid import QuadratureGrid, eigenfunction_on_grid, mapped_gauss_legendre
from spheroidal.integrator import Problem
from spheroidal.potential import ModeParams, PotentialCoefficients
from spheroidal.spectrum import real_spectrum


def uniform(n=401, margin=0.15):
    u = np.linspace(margin, np.pi - margin, n)
    w = np.full(n, u[1] - u[0])
    return u, w


def test_identity_and_rank_one_norms():
    g = mapped_gauss_legendre(60)
    assert operator_norm_estimate(np.eye(60), g.w) == pytest.approx(1.0, abs=1e-8)
    v = np.exp(1j * g.u) * np.sin(g.u)
    v = v / g.norm(v)
    P = np.outer(v, np.conj(v) * g.w)  # f -> <v, f> v
    assert operator_norm_estimate(P, g.w) == pytest.approx(1.0, abs=1e-8)


def test_norm_matches_dense_svd(rng):
    M = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
    assert operator_norm_estimate(M) == pytest.approx(np.linalg.norm(M, 2), rel=1e-6)


def test_weights_differentiate_quartics_exactly(rng):
    u = np.sort(rng.uniform(0, 3, 40))
    D = second_derivative_weights(u)
    f = 1 + u - 2 * u ** 2 + 0.5 * u ** 3 + 0.25 * u ** 4
    d2 = np.array([D[i] @ f[i:i + 5] for i in range(len(D))])
    exact = -4 + 3 * u + 3 * u ** 2
    assert np.allclose(d2, exact[2:-2], rtol=1e-7, atol=1e-7)


def test_sine_with_zero_potential():
    u, w = uniform()
    f = GridFunction(u, w, np.sin(u))
    r = apply_H(PotentialCoefficients.constant(0.0), 1.0, f)
    h = u[1] - u[0]
    assert r.norm() < 10 * h ** 4 * f.norm()


@given(arrays(np.float64, 41, elements=st.floats(-1, 1)), arrays(np.float64, 41, elements=st.floats(-1, 1)),
       st.complex_numbers(max_magnitude=5))
@settings(max_examples=30, deadline=None)
def test_apply_H_is_linear(a, b, c):
    u, w = uniform(41)
    p = ModeParams(1, 0, 2 + 0.5j)
    fa, fb = GridFunction(u, w, a), GridFunction(u, w, b)
    lhs = apply_H(p, 3.0, fa + c * fb).values
    rhs = apply_H(p, 3.0, fa).values + c * apply_H(p, 3.0, fb).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(lhs)))


def test_eigenfunction_residual_on_the_interior():
    p = ModeParams(1, 1, 2.0)
    lam = real_spectrum(p, 4)[4].lam.real
    u, w = uniform()
    f = GridFunction(u, w, eigenfunction_on_grid(Problem.from_params(p), lam, QuadratureGrid(u, w)))
    assert interior_residual(apply_H(p, lam, f), f) < 1e-5


def test_symmetric_for_real_potentials():
    p = ModeParams(0, 1, 1.5)
    u, w = uniform()
    f = GridFunction(u, w, polynomial_bump(u, 1.2, 0.8))
    g = GridFunction(u, w, polynomial_bump(u, 1.6, 0.9) * np.cos(2 * u))
    Hf, Hg = apply_H(p, 0.0, f), apply_H(p, 0.0, g)
    fi, gi = f.restrict(slice(2, -2)), g.restrict(slice(2, -2))
    a, b = fi.inner(Hg), Hf.inner(gi)
    assert abs(a - b) < 1e-6 * abs(a)


def test_grid_function_validation():
    u, w = uniform(10)
    with pytest.raises(ValueError):
        GridFunction(u, -w, np.ones(10))
    with pytest.raises(ValueError):
        GridFunction(u, w, np.full(10, np.nan))
    with pytest.raises(ValueError):
        GridFunction(u, w[:-1], np.ones(10))


def test_bump_second_derivative():
    u = np.linspace(0.5, 2.1, 2001)
    f = polynomial_bump(u, 1.3, 0.7)
    d2 = np.gradient(np.gradient(f, u), u)
    assert np.max(np.abs(d2 - polynomial_bump(u, 1.3, 0.7, derivative=2))[5:-5]) < 1e-3 * np.max(np.abs(d2))
