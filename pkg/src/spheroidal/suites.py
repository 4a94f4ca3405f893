"""Invariant suites behind ``verify``; each returns a :class:`SuiteResult`."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT, SolverConfig
from .grid import eigenfunction_on_grid, mapped_gauss_legendre
from .integrator import Problem, regular_solution, wronskian
from .oracle import reference_spectrum
from .osculating import node_integral, sign_changes
from .potential import ModeParams
from .spectrum import check_apriori, complex_spectrum, imv_identity, real_spectrum


@dataclass
class SuiteResult:
    name: str
    passed: bool
    metric: float
    threshold: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrap(*a, **kw):
        t = time.perf_counter()
        r = fn(*a, **kw)
        r.seconds = time.perf_counter() - t
        return r

    wrap.__name__ = fn.__name__
    wrap.__doc__ = fn.__doc__
    return wrap


def _spectrum(params, n, config):
    if params.omega.imag == 0:
        return real_spectrum(params, n, 0.0, config)
    return complex_spectrum(params, n, config)


def eigen_sign_changes(params, lam, tau=0.0, grid=None) -> int:
    grid = grid or mapped_gauss_legendre(DEFAULT.grid)
    f = eigenfunction_on_grid(Problem.from_params(params, tau), lam, grid)
    return sign_changes(f.real)


@_timed
def node_integral_suite(params: ModeParams, n_max: int = 10, config: SolverConfig = DEFAULT) -> SuiteResult:
    """``|int Im y - (n+1) pi| < 1e-6`` and ``n`` sign changes, on the ``tau = 0`` problem."""
    pts = real_spectrum(params, n_max, 0.0, config)
    errs, nodes = [], []
    for p in pts:
        errs.append(abs(node_integral(params, p.lam.real, 0.0) - (p.index + 1) * math.pi))
        nodes.append(eigen_sign_changes(params, p.lam.real))
    ok_nodes = all(z == p.index for z, p in zip(nodes, pts))
    m = max(errs)
    return SuiteResult("node_integral", m < 1e-6 and ok_nodes, m, 1e-6,
                       {"errors": errs, "sign_changes": nodes})


@_timed
def weyl_suite(params: ModeParams, lo: int = 20, hi: int = 40, config: SolverConfig = DEFAULT) -> SuiteResult:
    """``|lambda_n - n^2| <= 10 n`` and ``|gap - 2n| <= 20`` for ``lo <= n <= hi``."""
    lams = np.array([p.lam.real for p in real_spectrum(params, hi + 1, 0.0, config)])
    n = np.arange(lo, hi + 1)
    dev = np.abs(lams[n] - n ** 2) / n
    gaps = np.abs(lams[n + 1] - lams[n] - 2 * n)
    ok = bool(np.all(dev <= 10) and np.all(gaps <= 20))
    return SuiteResult("weyl", ok, float(dev.max()), 10.0, {"max_gap_deviation": float(gaps.max())})


@_timed
def imv_suite(params: ModeParams, n_max: int = 10, config: SolverConfig = DEFAULT, points=None) -> SuiteResult:
    """``|int Im V |phi|^2| < 1e-6 int |Im V| |phi|^2`` at every computed eigenvalue."""
    pts = points if points is not None else _spectrum(params, n_max, config)
    ratios = []
    for p in pts:
        a, b = imv_identity(params, p.lam)
        ratios.append(a / b if b > 0 else 0.0)
    m = max(ratios)
    return SuiteResult("imv_identity", m < 1e-6, m, 1e-6, {"ratios": ratios})


@_timed
def apriori_suite(params: ModeParams, n_max: int = 10, config: SolverConfig = DEFAULT, points=None) -> SuiteResult:
    pts = points if points is not None else _spectrum(params, n_max, config)
    bound = config.apriori_constant(params.strip_c) * abs(params.omega)
    worst = max(abs(p.lam.imag) for p in pts)
    bad = 0
    for p in pts:
        try:
            check_apriori(params, p.lam, config)
        except Exception:
            bad += 1
    return SuiteResult("apriori_strip", bad == 0, worst, bound, {"violations": bad})


def _match(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    C = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(C)
    return float(C[r, c].max())


@_timed
def symmetry_suite(params: ModeParams, n_max: int = 8, config: SolverConfig = DEFAULT) -> SuiteResult:
    """Conjugation and ``(Omega, k) -> (-Omega, -k)``, compared pointwise after matching."""
    base = np.array([p.lam for p in _spectrum(params, n_max, config)])
    conj = np.array([p.lam for p in _spectrum(params.conjugate(), n_max, config)])
    flip = np.array([p.lam for p in _spectrum(params.flipped(), n_max, config)])
    e1 = _match(np.conj(base), conj)
    e2 = _match(base, flip)
    m = max(e1, e2)
    return SuiteResult("symmetry", m < 1e-8, m, 1e-8, {"conjugation": e1, "flip": e2})


def y_lambda_order(params: ModeParams, lam: complex, hs=(1e-2, 5e-3), u_eval=None, tau: float = 1.0):
    """Observed order of central differences of ``y`` against the analytic ``y_lambda``."""
    prob = Problem.from_params(params, tau)
    if u_eval is None:
        u_eval = np.linspace(0.4, np.pi / 2, 7)
    st = regular_solution(prob, lam, "left", u_eval)
    keep = np.abs(st.phi) > 1e-3 * np.abs(st.phi).max()
    ref = st.y_lambda[keep]
    errs = []
    for h in hs:
        yp = regular_solution(prob, lam + h, "left", u_eval).y[keep]
        ym = regular_solution(prob, lam - h, "left", u_eval).y[keep]
        errs.append(float(np.max(np.abs((yp - ym) / (2 * h) - ref))))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(hs[i] / hs[i + 1]) for i in range(len(hs) - 1)]
    return orders, errs


def dw_relative_errors(params: ModeParams, lams, tau: float = 1.0, h: float = 1e-5):
    prob = Problem.from_params(params, tau)
    out = []
    for lam in lams:
        w0 = wronskian(prob, lam)
        wp, wm = wronskian(prob, lam + h), wronskian(prob, lam - h)
        fd = (wp.w * math.exp(wp.logscale - w0.logscale) - wm.w * math.exp(wm.logscale - w0.logscale)) / (2 * h)
        out.append(abs(fd - w0.dw) / abs(w0.dw))
    return np.array(out)


@_timed
def gradient_suite(params: ModeParams, seed: int = 0, count: int = 20) -> SuiteResult:
    """``y_lambda`` convergence order ``>= 1.9``; ``dw/dlambda`` within ``1e-4`` at random points."""
    rng = np.random.default_rng(seed)
    lam0 = complex(rng.uniform(5, 40), rng.uniform(-2, 2) if params.omega.imag else 0.0)
    orders, errs = y_lambda_order(params, lam0)
    lams = rng.uniform(0, 60, count) + 1j * rng.uniform(-5, 5, count)
    rel = dw_relative_errors(params, lams)
    ok = min(orders) >= 1.9 and rel.max() < 1e-4
    return SuiteResult("gradient", bool(ok), float(min(orders)), 1.9,
                       {"fd_errors": errs, "dw_max_relative": float(rel.max())})


@_timed
def oracle_suite(params: ModeParams, n_max: int = 10, config: SolverConfig = DEFAULT, tol: float = 1e-5,
                 points=None) -> SuiteResult:
    pts = points if points is not None else _spectrum(params, n_max, config)
    ref = reference_spectrum(params, len(pts) + 4)
    e = _match(np.array([p.lam for p in pts]), ref)
    return SuiteResult("oracle", e < tol, e, tol)


ALL = ("node_integral", "weyl", "imv_identity", "apriori_strip", "symmetry", "gradient", "oracle")


def run_suites(params: ModeParams, names=ALL, n_max: int = 10, config: SolverConfig = DEFAULT, seed: int = 0):
    points = None
    if any(n in names for n in ("imv_identity", "apriori_strip", "oracle")):
        points = _spectrum(params, n_max, config)
    out = []
    for name in names:
        if name == "node_integral":
            out.append(node_integral_suite(params, n_max, config))
        elif name == "weyl":
            out.append(weyl_suite(params, config=config))
        elif name == "imv_identity":
            if params.omega.imag != 0:
                out.append(imv_suite(params, n_max, config, points))
        elif name == "apriori_strip":
            out.append(apriori_suite(params, n_max, config, points))
        elif name == "symmetry":
            out.append(symmetry_suite(params, min(n_max, 8), config))
        elif name == "gradient":
            out.append(gradient_suite(params, seed))
        elif name == "oracle":
            out.append(oracle_suite(params, n_max, config, points=points))
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out
