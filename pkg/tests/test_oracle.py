import numpy as np
import pytest

from spheroidal.oracle import discretize, legendre_eigenvalues, oracle_spectrum, reference_spectrum
from spheroidal.potential import ModeParams


def _max_off_band(M, band):
    i, j = np.indices(M.shape)
    return float(np.max(np.abs(M[np.abs(i - j) > band]))) if M.shape[0] > band + 1 else 0.0


@pytest.mark.parametrize("dim", [32, 64])
def test_matrix_is_banded(dim):
    # only neighbouring spherical modes couple: bandwidth 2 from the x and x^2 terms
    M = discretize(ModeParams(2, 1, 3 + 0.5j), dim).matrix
    assert _max_off_band(M, 2) < 1e-12 * np.max(np.abs(M))


def test_matrix_is_complex_symmetric():
    M = discretize(ModeParams(2, 2, 4 + 0.4j), 48).matrix
    assert np.max(np.abs(M - M.T)) < 1e-12 * np.max(np.abs(M))


@pytest.mark.parametrize("k", [0, 1, 3])
def test_spherical_values_are_exact(k):
    assert np.allclose(reference_spectrum(ModeParams(0, k, 0), 8), legendre_eigenvalues(8, k), atol=1e-10)


def test_doubling_the_dimension_changes_nothing(p424):
    a = reference_spectrum(p424, 12, dimension=48)
    b = reference_spectrum(p424, 12, dimension=96)
    assert np.max(np.abs(a - b)) < 1e-10


def test_values_report_their_own_convergence(p424):
    vals = oracle_spectrum(discretize(p424, 64), 10)
    assert len(vals) == 10
    assert all(v.converged and v.drift < 1e-7 for v in vals)


def test_dimension_floor():
    with pytest.raises(ValueError):
        discretize(ModeParams(0, 0, 1), 8)
