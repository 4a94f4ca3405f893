import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lpmv

from spheroidal.boundary import endpoint_basis, indicial_exponents
from spheroidal.potential import ModeParams


def test_regular_branch_is_the_legendre_function():
    # s = k = 0, Omega = 0, lambda = 6: phi = sqrt(sin u) P_2(cos u) up to a constant
    p = ModeParams(0, 0, 0)
    b = endpoint_basis(p, 6.0, "left", eps=0.3)
    t = np.linspace(0.01, 0.3, 7)
    reg = b.evaluate(t)[0]
    ref = np.sqrt(np.sin(t)) * 0.5 * (3 * np.cos(t) ** 2 - 1)
    ratio = reg / ref
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


def test_associated_legendre_at_order_one():
    p = ModeParams(0, 1, 0)
    b = endpoint_basis(p, 12.0, "left", eps=0.3)
    t = np.linspace(0.02, 0.3, 6)
    ref = np.sqrt(np.sin(t)) * lpmv(1, 3, np.cos(t))
    ratio = b.evaluate(t)[0] / ref
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


@given(st.sampled_from([(0, 0), (1, 1), (2, 0), (2, 2), (1.5, 0.5), (0.5, -0.5)]),
       st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False),
       st.sampled_from(["left", "right"]))
@settings(max_examples=60, deadline=None)
def test_wronskian_of_the_two_branches_is_constant(sk, lam, side):
    p = ModeParams(sk[0], sk[1], 2 + 0.3j)
    b = endpoint_basis(p, lam, side)
    t = np.linspace(0.2, 1.0, 5) * b.matching_radius
    r, dr, g, dg = b.evaluate(t)[:4]
    w = dr * g - r * dg
    assert np.allclose(w, b.wronskian_reg_gen, rtol=1e-9, atol=1e-9)


def test_lambda_derivative_of_the_series():
    p = ModeParams(1, 0, 3 + 0.2j)
    lam, h = 7.0 + 0.5j, 1e-5
    t = np.array([0.02, 0.04])
    b0 = endpoint_basis(p, lam, "left", eps=0.05)
    bp = endpoint_basis(p, lam + h, "left", eps=0.05)
    bm = endpoint_basis(p, lam - h, "left", eps=0.05)
    fd = (bp.evaluate(t)[0] - bm.evaluate(t)[0]) / (2 * h)
    assert np.allclose(fd, b0.evaluate(t)[4], rtol=1e-6)


def test_indicial_exponents():
    assert indicial_exponents(ModeParams(1, 0, 0), "left") == (1.5, -0.5, False)
    assert indicial_exponents(ModeParams(1, 1, 0), "left") == (0.5, 0.5, True)
    with pytest.raises(ValueError):
        indicial_exponents(ModeParams(1, 1, 0), "middle")
