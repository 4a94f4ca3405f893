import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheroidal import _dop853
from spheroidal.errors import DomainError
from spheroidal.integrator import (Problem, build_dirichlet_pair, continue_phiDL_right, integrate_sl,
                                   propagate_lambda_derivative, regular_solution, wronskian,
                                   y_lambda_from_variation)
from spheroidal.potential import ModeParams, PotentialCoefficients


@given(st.floats(0.5, 40.0))
@settings(max_examples=25, deadline=None)
def test_constant_potential_gives_trigonometric_solutions(lam):
    # W = 0: phi = sin(sqrt(lam) (u - u0))
    prob = Problem.synthetic(PotentialCoefficients.constant(0.0))
    k = np.sqrt(lam)
    u = np.linspace(0.3, 3.0, 12)
    st_ = integrate_sl(prob, lam, (0.2, 0.0, k), u_eval=u)
    assert np.allclose(st_.true_phi(), np.sin(k * (u - 0.2)), atol=1e-8)


def test_exponential_growth_is_rescaled():
    # W = 1e4, lambda = 0: phi grows like exp(100 u) and must be carried in log form
    prob = Problem.synthetic(PotentialCoefficients.constant(1e4))
    st_ = integrate_sl(prob, 0.0, (0.1, 1.0, 100.0), u_eval=[3.0])
    log_true = np.log(abs(st_.phi[-1])) + st_.logscale[-1]
    assert log_true == pytest.approx(100 * 2.9, rel=1e-9)


def test_points_outside_the_interval_are_rejected():
    prob = Problem.from_params(ModeParams(0, 0, 1))
    with pytest.raises(DomainError):
        integrate_sl(prob, 1.0, (0.5, 1.0, 0.0), u_eval=[3.2])


@pytest.mark.parametrize("params,lam", [
    (ModeParams(0, 0, 0), 5.0), (ModeParams(2, 2, 4 + 0.4j), 30 + 2j), (ModeParams(1, 0, 3 - 0.2j), 11.0 + 0.3j)])
def test_wronskian_of_the_dirichlet_pair_is_constant(params, lam):
    _, _, rep = build_dirichlet_pair(params, lam)
    assert rep.drift < 1e-7


def test_wronskian_vanishes_at_legendre_eigenvalue():
    _, _, rep = build_dirichlet_pair(ModeParams(0, 0, 0), 6.0)
    assert abs(rep.normalized) < 1e-8
    _, _, rep = build_dirichlet_pair(ModeParams(0, 0, 0), 5.0)
    assert abs(rep.normalized) > 1e-2


def test_three_routes_to_y_lambda_agree():
    p = ModeParams(1, 1, 2 + 0.3j)
    prob = Problem.from_params(p)
    lam = 8.0 + 0.5j
    u = np.linspace(0.6, 1.6, 801)
    st_ = regular_solution(prob, lam, "left", u)
    analytic = st_.y_lambda
    closed = propagate_lambda_derivative(st_, analytic[0], "closed")
    ode = propagate_lambda_derivative(st_, analytic[0], "ode")
    var, _ = y_lambda_from_variation(prob, lam, (u[0], st_.true_phi()[0], st_.true_dphi()[0]), analytic[0], u[1:])
    assert np.max(np.abs(closed - analytic)) < 1e-7 * np.max(np.abs(analytic))
    assert np.max(np.abs(ode - analytic)) < 1e-4 * np.max(np.abs(analytic))
    assert np.max(np.abs(var - analytic[1:])) < 1e-7 * np.max(np.abs(analytic))


def test_ode_route_converges_at_fourth_order():
    prob = Problem.from_params(ModeParams(1, 1, 2 + 0.3j))
    errs = []
    for n in (401, 801, 1601):
        st_ = regular_solution(prob, 8.0 + 0.5j, "left", np.linspace(0.6, 1.6, n))
        errs.append(np.max(np.abs(propagate_lambda_derivative(st_, st_.y_lambda[0], "ode") - st_.y_lambda)))
    assert errs[0] / errs[1] > 10 and errs[1] / errs[2] > 10


def test_phiD_left_continued_through_the_right_basis():
    p = ModeParams(1, 0, 2 + 0.2j)
    prob = Problem.from_params(p)
    lam = 7.0 + 0.4j
    u = np.linspace(1.6, 2.8, 5)
    _, cont = continue_phiDL_right(prob, lam, 1.5, u)
    L, _, _ = build_dirichlet_pair(p, lam, npts=401)
    direct = np.interp(u, L.grid, L.true_phi().real) + 1j * np.interp(u, L.grid, L.true_phi().imag)
    # interpolation on the 401-point grid limits the comparison
    assert np.max(np.abs(cont - direct)) < 1e-4 * np.max(np.abs(direct))


def test_dop853_tableau_solves_a_linear_system():
    coef = PotentialCoefficients.constant(-1.0).as_array(0.0)
    y0 = np.zeros(_dop853.NVAR, dtype=np.complex128)
    y0[0], y0[1] = 0.0, 1.0
    Y, L, status, _ = _dop853.integrate(coef, 0.1, y0, np.array([1.0, 2.0]), 1e-12, 1e-14, False, False, 100000)
    assert status == 0
    assert np.allclose(Y[:, 0] * np.exp(L), np.sin(np.array([0.9, 1.9])), atol=1e-10)


def test_wronskian_derivative_matches_differences():
    prob = Problem.from_params(ModeParams(2, 2, 4 + 0.4j))
    lam, h = 25.0 + 1.0j, 1e-5
    w0, wp, wm = wronskian(prob, lam), wronskian(prob, lam + h), wronskian(prob, lam - h)
    fd = (wp.w * np.exp(wp.logscale - w0.logscale) - wm.w * np.exp(wm.logscale - w0.logscale)) / (2 * h)
    assert abs(fd - w0.dw) < 1e-6 * abs(w0.dw)
