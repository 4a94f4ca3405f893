import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheroidal.errors import DomainError, ParameterError
from spheroidal.oracle import reference_potential
from spheroidal.potential import (ModeParams, PotentialCoefficients, classify_regions, eval_potential,
                                  homotopy_potential, pole_expansion)

spins = st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0])
offsets = st.integers(-3, 3)
omegas = st.complex_numbers(max_magnitude=8, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z.imag) < 0.9)
us = st.floats(0.01, np.pi - 0.01)


def params_from(s, dk, om):
    return ModeParams(s, s + dk, om)


@given(spins, offsets, omegas, us, st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_two_evaluations_of_v_agree(s, dk, om, u, lam):
    p = params_from(s, dk, om)
    v = eval_potential(p, lam, u).v
    ref = reference_potential(p, lam, u)
    assert abs(v - ref) <= 1e-11 * (1 + abs(ref))


@given(spins, offsets, omegas, us)
@settings(max_examples=100, deadline=None)
def test_flip_reflects_the_potential(s, dk, om, u):
    # (Omega, k) -> (-Omega, -k) maps V(u) to V(pi - u), not to V(u)
    p = params_from(s, dk, om)
    a = eval_potential(p, 3.0, u).v
    b = eval_potential(p.flipped(), 3.0, np.pi - u).v
    assert abs(a - b) <= 1e-10 * (1 + abs(a))


@given(spins, offsets, omegas, us)
@settings(max_examples=100, deadline=None)
def test_conjugation(s, dk, om, u):
    p = params_from(s, dk, om)
    lam = 4.0 - 1.5j
    assert abs(np.conj(eval_potential(p, lam, u).v) - eval_potential(p.conjugate(), np.conj(lam), u).v) < 1e-10 * (
        1 + abs(eval_potential(p, lam, u).v))


def test_derivatives_match_differences():
    p = ModeParams(1, 2, 3 + 0.5j)
    u, h = 1.1, 1e-4
    pv = eval_potential(p, 2.0, u)
    vp, vm = eval_potential(p, 2.0, u + h).v, eval_potential(p, 2.0, u - h).v
    assert abs((vp - vm) / (2 * h) - pv.dv) < 1e-6 * abs(pv.dv)
    assert abs((vp - 2 * pv.v + vm) / h ** 2 - pv.d2v) < 1e-4 * abs(pv.d2v)


def test_domain_and_parameter_errors():
    p = ModeParams(0, 0, 1)
    with pytest.raises(DomainError):
        eval_potential(p, 0.0, 0.0)
    with pytest.raises(DomainError):
        eval_potential(p, 0.0, np.array([1.0, np.pi]))
    with pytest.raises(ParameterError):
        ModeParams(0.3, 0, 1)
    with pytest.raises(ParameterError):
        ModeParams(1, 0.5, 1)
    with pytest.raises(ParameterError):
        ModeParams(0, 0, 1 + 2j, strip_c=1.0)


def test_spherical_case_reduces_to_laplacian_potential():
    p = ModeParams(0, 0, 0)
    u = np.linspace(0.1, 3.0, 9)
    assert np.allclose(eval_potential(p, 0.0, u).w, -0.25 - 0.25 / np.sin(u) ** 2)


def test_homotopy_potential_endpoints():
    p = ModeParams(2, 1, 3 + 0.4j)
    u = np.linspace(0.2, 2.9, 7)
    v = eval_potential(p, 5.0 + 1j, u).v
    assert np.allclose(homotopy_potential(p, 5.0 + 1j, 1.0, u), v)
    assert np.allclose(homotopy_potential(p, 5.0 + 1j, 0.0, u), v.real)
    with pytest.raises(ValueError):
        homotopy_potential(p, 1.0, 1.5, u)


def test_deformed_coefficients_at_zero_are_real():
    c = PotentialCoefficients.from_params(ModeParams(2, 2, 4 + 0.4j), tau=0.0)
    assert c.is_real


def test_pole_expansion_orders():
    p = ModeParams(2, 1, 1.0)
    assert pole_expansion(p, 0.0, "left").leading == pytest.approx(1 - 0.25)
    assert pole_expansion(p, 0.0, "right").leading == pytest.approx(9 - 0.25)
    assert p.a_left == 1 and p.a_right == 3


def test_region_layout_for_large_omega():
    lay = classify_regions(ModeParams(0, 0, 6), 20.0)
    assert not lay.degenerate
    assert 0 < lay.u_ell < lay.u_r <= lay.u_max < np.pi
    p = ModeParams(0, 0, 6)
    h = 1e-6
    dv = (eval_potential(p, 20.0, lay.u_max + h).v - eval_potential(p, 20.0, lay.u_max - h).v).real / (2 * h)
    assert abs(dv) < 1e-6
    assert classify_regions(ModeParams(0, 0, 0), 6.0).degenerate
