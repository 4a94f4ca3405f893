"""Acceptance criteria 1-10; each test records one PASS/FAIL line (see conftest)."""
import os
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from scipy.special import eval_legendre

from conftest import record
from spheroidal.config import DEFAULT
from spheroidal.errors import AprioriViolation
from spheroidal.diagnostics import polynomial_bump
from spheroidal.grid import mapped_gauss_legendre
from spheroidal.homotopy import gamma0_count, track_spectrum
from spheroidal.oracle import legendre_eigenvalues, reference_spectrum
from spheroidal.potential import ModeParams
from spheroidal.resolvent import block_projector, completeness_check, flatness_series, projector_family
from spheroidal.spectrum import check_apriori, complex_spectrum, real_spectrum
from spheroidal.suites import gradient_suite, imv_suite, node_integral_suite, symmetry_suite, weyl_suite

WORKERS = os.cpu_count() or 1
OMEGAS_C4 = (2 + 0.3j, 4 + 0.4j, 6 + 0.6j)


def matched_error(a, b):
    C = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


@pytest.fixture(scope="module")
def complex_runs(track424):
    """Accepted eigenvalues n <= 9 (n <= 15 at 4+0.4i, from the shared track)."""
    out = {}
    for om in OMEGAS_C4:
        p = ModeParams(2, 2, om)
        out[om] = [r.final for r in track424.records] if om == 4 + 0.4j else complex_spectrum(p, 9)
    return out


def test_criterion_01_legendre_baseline():
    t = time.perf_counter()
    shoot = np.array([p.lam.real for p in real_spectrum(ModeParams(0, 0, 0), 9)])
    orc = reference_spectrum(ModeParams(0, 0, 0), 10)
    dt = time.perf_counter() - t
    exact = legendre_eigenvalues(10)
    e_s, e_o = float(np.max(np.abs(shoot - exact))), float(np.max(np.abs(orc - exact)))
    ok = e_s < 1e-8 and e_o < 1e-7 and dt < 10.0
    record(1, ok, f"shooting err {e_s:.2e} (<1e-8), oracle err {e_o:.2e} (<1e-7), {dt:.2f}s (<10s)")
    assert ok


def test_criterion_02_node_theorem():
    worst, nodes_ok = 0.0, True
    for om in (0.0, 3.0, 8.0):
        for s, k in ((0, 0), (1, 1), (2, 0)):
            r = node_integral_suite(ModeParams(s, k, om), 10)
            worst = max(worst, r.metric)
            nodes_ok &= all(z == n for n, z in enumerate(r.detail["sign_changes"]))
    ok = worst < 1e-6 and nodes_ok
    record(2, ok, f"max |int Im y - (n+1)pi| = {worst:.2e} (<1e-6) over 9 configs, sign changes == n: {nodes_ok}")
    assert ok


def test_criterion_03_weyl_asymptotics():
    r = weyl_suite(ModeParams(0, 0, 3.0), 20, 40)
    ok = r.passed and r.seconds < 60.0
    record(3, ok, f"max |lam_n - n^2|/n = {r.metric:.3f} (<=10), max gap deviation "
                  f"{r.detail['max_gap_deviation']:.3f} (<=20), {r.seconds:.1f}s (<60s)")
    assert ok


def test_criterion_04_imaginary_potential_identity(complex_runs):
    worst, count = 0.0, 0
    for om, pts in complex_runs.items():
        r = imv_suite(ModeParams(2, 2, om), points=pts)
        worst = max(worst, r.metric)
        count += len(pts)
    ok = worst < 1e-6
    record(4, ok, f"max |int ImV|phi|^2| / int |ImV||phi|^2 = {worst:.2e} (<1e-6) at {count} eigenvalues")
    assert ok


def test_criterion_05_apriori_strip(complex_runs):
    violations, total, worst = 0, 0, 0.0
    runs = [(ModeParams(2, 2, om), pts) for om, pts in complex_runs.items()]
    wide = ModeParams(1, 0, 1.5 + 1.8j, strip_c=2.0)
    runs.append((wide, complex_spectrum(wide, 9)))
    for p, pts in runs:
        bound = DEFAULT.apriori_constant(p.strip_c) * abs(p.omega)
        for pt in pts:
            total += 1
            worst = max(worst, abs(pt.lam.imag) / bound)
            try:
                check_apriori(p, pt.lam)
            except AprioriViolation:
                violations += 1
    ok = violations == 0
    record(5, ok, f"{violations} violations of |Im lam| <= C|Omega| among {total} eigenvalues "
                  f"in {len(runs)} configurations (max ratio {worst:.3f})")
    assert ok


@pytest.fixture(scope="module")
def family424(p424, track424):
    lams = track424.finals
    return projector_family(p424, lams[:10], others=lams[10:], workers=WORKERS)


def test_criterion_06_projector_algebra(p424, track424, family424):
    fam = family424
    idem = max(P.idempotence_defect() for P in fam)
    orth = max(fam[i].product_norm(fam[j]) for i in range(10) for j in range(10) if i != j)
    jl = max(P.jordan_length for P in fam[1:])
    lams = track424.finals
    n0 = gamma0_count(real_spectrum(p424, 15, 0.0), p424.omega)
    G0 = block_projector(p424, lams[:n0], lams[n0:], workers=WORKERS)
    ok = idem < 1e-5 and orth < 1e-5 and jl <= 2 and G0.rank_estimate == n0
    record(6, ok, f"idempotence {idem:.2e} (<1e-5), max |Q_n Q_m| {orth:.2e} (<1e-5), "
                  f"max Jordan length n>=1: {jl} (<=2), Gamma0 rank {G0.rank_estimate} == count {n0}")
    assert ok


def legendre_residual(f_of_u, count):
    """Bump residual after the first ``count`` normalised Legendre modes, by direct quadrature."""
    x, w = np.polynomial.legendre.leggauss(800)
    u = 1.3 + 1.0 * x  # bump support
    f = f_of_u(u)
    nf2 = np.sum(w * f ** 2)
    c = [np.sum(w * f * np.sqrt(np.sin(u)) * np.sqrt(l + 0.5) * eval_legendre(l, np.cos(u))) for l in range(count)]
    return float(np.sqrt(max(nf2 - np.sum(np.square(c)), 0.0) / nf2))


def test_criterion_07_completeness():
    g = mapped_gauss_legendre(DEFAULT.grid)
    bump = polynomial_bump(g.u)
    p = ModeParams(2, 2, 4 + 0.4j)
    lams = track_spectrum(p, 33).finals
    fam = projector_family(p, lams[:30], others=lams[30:], workers=WORKERS)
    rep = completeness_check(p, fam, [bump], g)
    r_c = float(rep.residuals[0, -1])
    flat = flatness_series(fam)

    p0 = ModeParams(0, 0, 0)
    lams0 = [q.lam for q in real_spectrum(p0, 32)]
    fam0 = projector_family(p0, lams0[:30], others=lams0[30:], workers=WORKERS)
    r_0 = float(completeness_check(p0, fam0, [bump], g).residuals[0, -1])
    r_leg = legendre_residual(polynomial_bump, 30)
    ok = (r_c < 5e-2 and bool(rep.strictly_decreasing[0]) and r_0 < 1e-3 and r_leg < 1e-3
          and abs(r_0 - r_leg) < 1e-6 + 1e-2 * r_leg)
    record(7, ok, f"Omega=4+0.4i residual {r_c:.2e} (<5e-2), strictly decreasing {bool(rep.strictly_decreasing[0])}; "
                  f"Omega=0 residual {r_0:.2e} vs Legendre series {r_leg:.2e} (<1e-3); "
                  f"|Q_n| in [{flat.min():.4f}, {flat.max():.4f}]")
    assert ok


def test_criterion_08_homotopy_consistency(p424, track424):
    res = track424
    counts = set(res.box_counts)
    ref = reference_spectrum(p424, 20)
    err = matched_error(res.finals, ref)
    ok = len(counts) == 1 and res.max_return_error < 1e-6 and err < 1e-5 and res.elapsed < 300
    record(8, ok, f"box count {sorted(counts)} over {len(res.box_counts)} checks, return error "
                  f"{res.max_return_error:.2e} (<1e-6), oracle match {err:.2e} (<1e-5), {res.elapsed:.1f}s (<300s)")
    assert ok


def test_criterion_09_symmetries():
    rs = [symmetry_suite(ModeParams(2, 2, 4 + 0.4j), 8), symmetry_suite(ModeParams(1, 0, 3 - 0.2j), 8)]
    conj = max(r.detail["conjugation"] for r in rs)
    flip = max(r.detail["flip"] for r in rs)
    ok = all(r.passed for r in rs)
    record(9, ok, f"conjugation {conj:.2e}, (Omega,k)->(-Omega,-k) {flip:.2e} (<1e-8), two configurations")
    assert ok


def test_criterion_10_gradient_checks():
    rs = [gradient_suite(ModeParams(2, 2, 4 + 0.4j), seed=1), gradient_suite(ModeParams(1, 0, 3.0), seed=2)]
    order = min(r.metric for r in rs)
    rel = max(r.detail["dw_max_relative"] for r in rs)
    ok = all(r.passed for r in rs)
    record(10, ok, f"y_lambda difference order {order:.3f} (>=1.9), dw/dlambda relative error {rel:.2e} "
                   f"(<1e-4) at 20 random points")
    assert ok
