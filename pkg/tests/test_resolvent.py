import numpy as np
import pytest

from spheroidal.diagnostics import polynomial_bump
from spheroidal.errors import ContourThroughSpectrum, NearSpectrum
from spheroidal.grid import eigenfunction_on_grid, mapped_gauss_legendre
from spheroidal.integrator import Problem
from spheroidal.potential import ModeParams
from spheroidal.resolvent import (Contour, contour_around, greens_kernel, kernel_to_text, loads_matrix_bundle,
                                  project, projector_family, projector_to_text, resolvent_residual,
                                  truncated_circle_check, with_jordan)

SPH = ModeParams(0, 0, 0)


def test_kernel_is_symmetric(p424):
    gk = greens_kernel(p424, 7.0 + 2.0j)
    assert gk.symmetry_defect() < 1e-10 * np.max(np.abs(gk.kernel))


@pytest.mark.parametrize("lam", [3.0 + 1.0j, 17.5 - 0.5j, -4.0])
def test_resolvent_recovers_a_bump(p424, lam):
    assert resolvent_residual(p424, lam) < 1e-5


def test_resolvent_refuses_an_eigenvalue():
    with pytest.raises(NearSpectrum):
        greens_kernel(SPH, 6.0)


def test_norm_bound_away_from_a_selfadjoint_spectrum():
    # real potential: ||(H - lambda)^-1|| = 1 / dist(lambda, spectrum)
    lam = 10.0 - 20.0j
    assert greens_kernel(SPH, lam, pointwise=False).norm() <= (1 / 20.0) * 1.001


def test_empty_contour_gives_zero():
    P = project(SPH, Contour.circle(4.0, 1.0))
    assert P.norm() < 1e-8 and P.rank_estimate == 0 and P.winding_count == 0


def test_contour_through_an_eigenvalue_is_refused():
    with pytest.raises((ContourThroughSpectrum, NearSpectrum)):
        project(SPH, Contour.circle(5.0, 1.0))


def test_real_projector_is_the_orthogonal_rank_one_map():
    p = ModeParams(1, 0, 2.0)
    from spheroidal.spectrum import real_spectrum

    lam = real_spectrum(p, 2)[2].lam.real
    P = with_jordan(project(p, Contour.circle(lam, 2.0), enclosed=[lam]))
    assert P.rank_estimate == 1 and P.winding_count == 1 and P.jordan_length == 1
    g = P.grid
    phi = eigenfunction_on_grid(Problem.from_params(p), lam, g)
    phi = phi / g.norm(phi)
    f = polynomial_bump(g.u, 1.1, 0.9)
    expect = phi * np.sum(g.w * np.conj(phi) * f)
    assert g.norm(P.apply(f) - expect) < 1e-6 * g.norm(f)
    assert P.idempotence_defect() < 1e-6


def test_disjoint_projectors_annihilate_each_other(p424):
    from spheroidal.homotopy import track_spectrum

    lams = track_spectrum(p424, 4).finals
    fam = projector_family(p424, lams[:3], others=lams[3:])
    for i in range(3):
        for j in range(3):
            if i != j:
                assert fam[i].product_norm(fam[j]) < 1e-6
        assert fam[i].rank_estimate == 1


def test_pair_contour_has_rank_two_and_trivial_jordan_blocks():
    # an ellipse around two simple eigenvalues; the moment with (lambda - 2)(lambda - 6) vanishes
    c = contour_around([2.0, 6.0], [0.0, 12.0, 20.0])
    P = with_jordan(project(SPH, c, enclosed=[2.0, 6.0]))
    assert P.rank_estimate == 2 and P.winding_count == 2
    assert P.jordan_length == 1


def test_serialisation_round_trip(p424):
    gk = greens_kernel(p424, 5.0 + 1.0j, grid_spec=mapped_gauss_legendre(40))
    head, blocks = loads_matrix_bundle(kernel_to_text(gk))
    assert np.array_equal(blocks["kernel"], gk.kernel)
    assert head["lambda"]["im"] == 1.0
    P = project(SPH, Contour.circle(2.0, 1.5), grid_spec=40, enclosed=[2.0])
    head, blocks = loads_matrix_bundle(projector_to_text(P))
    assert np.array_equal(blocks["matrix"], P.matrix) and head["rank_estimate"] == 1


def test_truncated_circles_converge():
    g = mapped_gauss_legendre(400)
    f = polynomial_bump(g.u)
    res = truncated_circle_check(SPH, [4.0, 15.0, 40.0, 100.0], f)
    assert np.all(np.diff(res) < 0) and res[-1] < 1e-2
