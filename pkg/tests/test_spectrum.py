import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheroidal.errors import BoundaryZero, ParameterError, PhaseJump
from spheroidal.integrator import Problem, wronskian
from spheroidal.oracle import legendre_eigenvalues
from spheroidal.potential import ModeParams, PotentialCoefficients
from spheroidal.spectrum import (bohr_sommerfeld_seeds, complex_refine, count_zeros, newton,
                                 real_spectrum, sort_points)


def test_spherical_case_is_legendre():
    lams = [p.lam.real for p in real_spectrum(ModeParams(0, 0, 0), 6)]
    assert np.allclose(lams, legendre_eigenvalues(7), atol=1e-8)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_associated_legendre(k):
    lams = [p.lam.real for p in real_spectrum(ModeParams(0, k, 0), 4)]
    assert np.allclose(lams, legendre_eigenvalues(5, k), atol=1e-8)


def test_seeds_for_zero_potential_are_squares():
    seeds = bohr_sommerfeld_seeds(PotentialCoefficients.constant(0.0), range(6))
    assert np.allclose([s.lambda_guess for s in seeds], np.arange(6) ** 2, atol=1e-9)


def test_seeds_exact_for_spherical_case():
    seeds = bohr_sommerfeld_seeds(ModeParams(0, 0, 0), range(8))
    assert np.allclose([s.lambda_guess for s in seeds], legendre_eigenvalues(8), atol=1e-8)


def test_boundary_series_rejects_inconsistent_synthetic_pole():
    with pytest.raises(ParameterError):
        real_spectrum(Problem.synthetic(PotentialCoefficients.constant(0.0)), 2)


@given(st.complex_numbers(max_magnitude=3.0), st.floats(0.5, 2.0))
@settings(max_examples=30, deadline=None)
def test_count_zeros_of_a_linear_function(z0, half):
    box = (-half, half, -half, half)
    inside = abs(z0.real) < half - 1e-3 and abs(z0.imag) < half - 1e-3
    outside = abs(z0.real) > half + 1e-3 or abs(z0.imag) > half + 1e-3
    if not (inside or outside):
        return
    assert count_zeros(lambda z: (z - z0) * (z - z0 - 10), box) == int(inside)


def test_count_zeros_of_a_double_root():
    assert count_zeros(lambda z: (z - 0.3j) ** 2, (-1, 1, -1, 1)) == 2


def test_box_through_a_zero_is_refused():
    with pytest.raises(BoundaryZero):
        count_zeros(lambda z: z - 1.0, (1.0, 2.0, -1, 1))
    with pytest.raises((PhaseJump, BoundaryZero)):
        count_zeros(lambda z: z - (1.0 + 0.3711j), (1.0, 2.0, -1, 1), max_depth=4)


def test_wronskian_zero_on_the_contour_is_refused():
    with pytest.raises(BoundaryZero):
        count_zeros(ModeParams(0, 0, 0), (1.0, 2.0, -1, 1), tau=0.0)


def test_box_without_spectrum_counts_zero():
    assert count_zeros(ModeParams(0, 0, 0), (2.5, 5.5, -1, 1)) == 0
    assert count_zeros(ModeParams(2, 2, 4 + 0.4j), (-30, -20, -3, 3)) == 0


def test_count_is_additive_under_partition(p424):
    whole = count_zeros(p424, (-5, 40, -3, 3))
    left = count_zeros(p424, (-5, 17.3, -3, 3))
    right = count_zeros(p424, (17.3, 40, -3, 3))
    assert whole == left + right and whole > 0


def test_real_eigenvalue_is_a_newton_fixed_point():
    p = ModeParams(1, 0, 2.5)
    lam = real_spectrum(p, 3)[3].lam
    out, step, _ = newton(Problem.from_params(p, 0.0), lam)
    assert abs(out - lam) < 1e-9 and step < 1e-9


def test_wronskian_residual_reported_small():
    for pt in real_spectrum(ModeParams(2, 1, 1.5), 5):
        assert pt.wronskian_residual < 1e-8


def test_complex_refine_certifies_a_simple_root(p424):
    seed = 30.0 + 1.0j
    pt = complex_refine(p424, seed)
    assert pt.multiplicity == 1
    assert pt.extra["dw_check"] < 1e-4
    assert abs(wronskian(Problem.from_params(p424), pt.lam).normalized) < 1e-8


def test_conjugate_parameters_give_conjugate_eigenvalues(p424):
    a = complex_refine(p424, 12 + 1j).lam
    b = complex_refine(p424.conjugate(), np.conj(a) + 0.05).lam
    assert abs(np.conj(a) - b) < 1e-9


def test_sort_points_orders_and_labels():
    from spheroidal.spectrum import SpectralPoint

    pts = sort_points([SpectralPoint(3 + 1j, 0), SpectralPoint(1 - 1j, 1), SpectralPoint(1 + 1j, 2)])
    assert [p.index for p in pts] == [1, 2, 0]
    assert [p.sorted_index for p in pts] == [0, 1, 2]


@pytest.mark.parametrize("omega", [10.0, 14.0])
@pytest.mark.parametrize("s,k", [(0, 0), (1, 0), (2, 2)])
def test_real_spectrum_with_tunnelling_doublets(omega, s, k):
    from spheroidal.oracle import reference_spectrum

    p = ModeParams(s, k, omega)
    lams = np.array([x.lam.real for x in real_spectrum(p, 7)])
    assert np.all(np.diff(lams) >= 0)
    assert np.allclose(lams, reference_spectrum(p, 8).real, atol=1e-8)


def test_close_doublet_members_certify_separately():
    p = ModeParams(0, 0, 10 + 0.9j)
    a, b = 18.97234443926273 + 1.8028022015289267j, 18.972344204722983 + 1.8027962308505088j
    sep = abs(a - b)
    pa = complex_refine(p, a, neighbour_sep=sep)
    pb = complex_refine(p, b, neighbour_sep=sep)
    assert pa.multiplicity == pb.multiplicity == 1
    assert abs(pa.lam - pb.lam) > 0.5 * sep
    assert pa.extra["dw_check"] < 1e-4 and pb.extra["dw_check"] < 1e-4
