"""Spectra, projectors and eigenvalue tracks of the spin-weighted spheroidal operator."""
from .config import DEFAULT, SolverConfig
from .errors import SpectralError
from .grid import QuadratureGrid, mapped_gauss_legendre
from .homotopy import TrackRecord, detect_pairs, track_spectrum
from .integrator import Problem, build_dirichlet_pair, integrate_sl, wronskian
from .oracle import discretize, oracle_spectrum, reference_spectrum
from .osculating import complex_solution, frame_along, node_count, node_integral
from .potential import ModeParams, PotentialCoefficients, classify_regions, eval_potential, homotopy_potential
from .resolvent import (Contour, GreensKernel, Projector, completeness_check, greens_kernel, jordan_length,
                        block_projector, project, projector_family)
from .spectrum import (SpectralPoint, bohr_sommerfeld_seeds, complex_refine, complex_spectrum, count_zeros,
                       real_spectrum)

__all__ = [
    "DEFAULT", "SolverConfig", "SpectralError", "QuadratureGrid", "mapped_gauss_legendre", "TrackRecord",
    "detect_pairs", "track_spectrum", "Problem", "build_dirichlet_pair", "integrate_sl", "wronskian",
    "discretize", "oracle_spectrum", "reference_spectrum", "complex_solution", "frame_along", "node_count",
    "node_integral", "ModeParams", "PotentialCoefficients", "classify_regions", "eval_potential",
    "homotopy_potential", "Contour", "GreensKernel", "Projector", "completeness_check", "greens_kernel",
    "jordan_length", "project", "projector_family", "block_projector", "SpectralPoint", "bohr_sommerfeld_seeds", "complex_refine",
    "complex_spectrum", "count_zeros", "real_spectrum",
]
