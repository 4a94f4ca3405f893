"""Shooting vs dense Galerkin eigenvalues over a small parameter matrix."""
import argparse
import itertools
import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from spheroidal import ModeParams
from spheroidal.oracle import reference_spectrum
from spheroidal.spectrum import complex_spectrum, real_spectrum

SPINS = [(0, 0), (1, 0), (1, 1), (2, 2), (2, -1)]
OMEGAS = [0.0, 3.0, 2 + 0.3j, 4 + 0.4j, 6 - 0.6j, 10 + 0.9j]


def compare(p: ModeParams, n: int):
    pts = real_spectrum(p, n) if p.omega.imag == 0 else complex_spectrum(p, n)
    a = np.array([q.lam for q in pts])
    b = reference_spectrum(p, n + 5)
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=9, help="highest index")
    n = ap.parse_args().n
    print(f"{'s':>3} {'k':>3} {'omega':>12} {'max err':>10} {'sec':>6}")
    for (s, k), om in itertools.product(SPINS, OMEGAS):
        t = time.perf_counter()
        err = compare(ModeParams(s, k, om), n)
        print(f"{s:3d} {k:3d} {complex(om)!s:>12} {err:10.2e} {time.perf_counter() - t:6.1f}")
