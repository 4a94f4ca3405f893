"""Eigenvalue location: node-integral bisection, complex Newton, zero counting."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT, SolverConfig
from .errors import (
    AprioriViolation, BoundaryZero, BracketFailure, CertificationMismatch,
    NewtonDiverged, NoTurningPoints, PhaseJump,
)
from .integrator import Problem, as_problem, wronskian
from .osculating import node_integral
from .potential import ModeParams, PotentialCoefficients, coefficients_of

log = logging.getLogger(__name__)


@dataclass
class SpectralPoint:
    lam: complex
    index: int
    multiplicity: int = 1
    jordan_length: int | None = None
    wronskian_residual: float = float("nan")
    provenance: str = "newton"
    sorted_index: int | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class SeedEstimate:
    lambda_guess: complex
    source: str
    turning_points: tuple
    index: int = 0


# ---------------------------------------------------------------------------
# Bohr-Sommerfeld seeds


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


def _allowed_intervals(f, n_scan=2000):
    """Maximal sub-intervals of (0, pi) on which ``f > 0`` (``f`` vectorised)."""
    u = np.linspace(1e-9, np.pi - 1e-9, n_scan)
    vals = f(u)
    pos = vals > 0
    out = []
    i = 0
    while i < n_scan:
        if pos[i]:
            j = i
            while j + 1 < n_scan and pos[j + 1]:
                j += 1
            lo = 0.0 if i == 0 else brentq(f, u[i - 1], u[i], xtol=1e-14)
            hi = np.pi if j == n_scan - 1 else brentq(f, u[j], u[j + 1], xtol=1e-14)
            out.append((lo, hi))
            i = j + 1
        else:
            i += 1
    return out


def _chebyshev_nodes(lo, hi):
    """Nodes/weights for ``int_lo^hi g(u) du`` after ``u = lo + (hi-lo)(1-cos t)/2``."""
    t = 0.5 * np.pi * (_GL_X + 1.0)
    u = lo + 0.5 * (hi - lo) * (1.0 - np.cos(t))
    w = 0.5 * np.pi * _GL_W * 0.5 * (hi - lo) * np.sin(t)
    return u, w


def _seed_potential(coef: PotentialCoefficients, langer: bool):
    def re_w(u):
        sn, cs = np.sin(u), np.cos(u)
        s2 = sn * sn
        w = complex(coef.A).real * s2 + complex(coef.B).real * cs + complex(coef.C).real
        if coef.P != 0 or coef.Q != 0 or langer:
            w = w + (coef.P + coef.Q * cs + (0.25 if langer else 0.0)) / s2
        return w

    def im_w(u):
        return complex(coef.A).imag * np.sin(u) ** 2 + complex(coef.B).imag * np.cos(u) + complex(coef.C).imag

    return re_w, im_w


def _action(re_w, lam):
    f = lambda u: lam - re_w(u)
    iv = _allowed_intervals(f)
    total = 0.0
    for lo, hi in iv:
        u, w = _chebyshev_nodes(lo, hi)
        total += np.sum(w * np.sqrt(np.maximum(f(u), 0.0)))
    return total, iv


def bohr_sommerfeld_seeds(params, n_range, tau: float = 1.0) -> list[SeedEstimate]:
    """Semiclassical guesses ``lambda_n`` for ``n`` in ``n_range``.

    For the physical potential the Langer-corrected ``W + 1/(4 sin^2 u)`` is
    quantised with a Maslov shift, ``int sqrt(Re(lambda - W_L))_+ = pi (n + 1/2)``,
    which is exact for the spherical case ``s = k = Omega = 0``.  A synthetic
    pole-free potential (``PotentialCoefficients``) uses ``int = pi n``.
    ``Im lambda`` is the ``1/sqrt(Re(lambda - W))``-weighted mean of ``Im W``
    over the classically allowed region.
    """
    ns = list(n_range)
    if not ns:
        raise ValueError("n_range must be non-empty")
    if isinstance(params, PotentialCoefficients):
        coef, langer, shift = params, False, 0.0
    else:
        coef, langer, shift = coefficients_of(params, tau), True, 0.5
    re_w, im_w = _seed_potential(coef, langer)
    grid = np.linspace(1e-3, np.pi - 1e-3, 2001)
    wmin = float(np.min(re_w(grid)))
    out = []
    for n in ns:
        target = np.pi * (n + shift)
        if target <= 0:
            lam_re, iv = wmin, []
            source = "bohr_sommerfeld"
        else:
            lo = wmin
            hi = max(wmin + 1.0, (n + shift) ** 2 + abs(wmin) + 1.0)
            while _action(re_w, hi)[0] < target:
                hi = 2 * hi + 1.0
            lam_re = brentq(lambda x: _action(re_w, x)[0] - target, lo, hi, xtol=1e-12, rtol=1e-13)
            _, iv = _action(re_w, lam_re)
            source = "bohr_sommerfeld"
        if not iv:
            out.append(SeedEstimate(complex(float(n) ** 2), "weyl", (None, None), n))
            continue
        num = den = 0.0
        for lo, hi in iv:
            u, w = _chebyshev_nodes(lo, hi)
            g = np.maximum(lam_re - re_w(u), 1e-300) ** -0.5
            num += np.sum(w * g * im_w(u))
            den += np.sum(w * g)
        out.append(SeedEstimate(complex(lam_re, num / den), source, (iv[0][0], iv[-1][1]), n))
    return out


def weyl_seed(n: int) -> complex:
    return complex(n * n)


# ---------------------------------------------------------------------------
# Real spectrum


def _newton_polish(prob, lam, iters=4, window=1e-7):
    """A few real Newton steps that stay within ``window (1 + |lam|)`` and reduce ``|w|``.

    Near a tunnelling doublet ``w'`` is small and an unguarded step can land
    far from the bracketed root, so anything else keeps the bisection value.
    """
    x = lam
    half = window * (1.0 + abs(lam))
    wv = wronskian(prob, x)
    size = abs(wv.normalized)
    for _ in range(iters):
        if wv.dw == 0:
            break
        step = (wv.w / wv.dw).real
        nx = x - step
        if abs(nx - lam) > half:
            break
        nv = wronskian(prob, nx)
        if not abs(nv.normalized) < size:
            break
        x, wv, size = nx, nv, abs(nv.normalized)
        if abs(step) < 1e-15 * (1 + abs(x)):
            break
    return x


def real_spectrum(params, n_max: int, tau: float = 0.0, config: SolverConfig = DEFAULT,
                  lambda_ceiling: float | None = None) -> list[SpectralPoint]:
    """Eigenvalues ``lambda_0 < ... < lambda_n_max`` of a real potential.

    Each ``lambda_n`` solves ``int_0^pi Im y = (n + 1) pi``; the node integral is
    strictly increasing in ``lambda`` so a bracket is grown and refined by
    Brent's method, then polished by a few guarded Newton steps on the Wronskian.
    The values are non-decreasing; members of a doublet split by less than
    ``real_tol`` coincide.
    """
    prob = as_problem(params, tau, config)
    if not prob.coef.is_real:
        raise ValueError("real_spectrum needs a real potential (tau = 0 or real Omega)")
    F = lambda x: node_integral(prob, x)
    seeds = bohr_sommerfeld_seeds(prob.params if prob.params is not None else prob.coef, range(n_max + 2), tau=prob.tau)
    lo = seeds[0].lambda_guess.real - 10.0
    step = 10.0
    while F(lo) >= np.pi:
        lo -= step
        step *= 2
        if lo < -1e8:
            raise BracketFailure("no lower bracket for the ground state")
    out = []
    for n in range(n_max + 1):
        target = (n + 1) * np.pi
        hi = max(seeds[n].lambda_guess.real, lo) + 1.0
        gap = max(1.0, seeds[n + 1].lambda_guess.real - seeds[n].lambda_guess.real)
        while F(hi) <= target:
            hi += gap
            gap *= 1.5
            if lambda_ceiling is not None and hi > lambda_ceiling:
                raise BracketFailure(f"node integral never reaches {n + 1} pi below the ceiling")
        lam = brentq(lambda x: F(x) - target, lo, hi, xtol=config.real_tol, rtol=1e-15)
        lam = _newton_polish(prob, lam)
        wv = wronskian(prob, lam)
        out.append(SpectralPoint(complex(lam), n, 1, None, abs(wv.normalized), "real_bisection", n))
        # F(lambda_n) = (n + 1) pi < (n + 2) pi, so lambda_n itself brackets the next root from below;
        # a doublet below the bisection tolerance comes back as two equal values
        lo = lam
    return out


# ---------------------------------------------------------------------------
# Argument principle


def _edge_phases(f, z0, z1, n_init, max_depth, min_abs):
    """Total change of ``arg f`` along the segment ``z0 -> z1``.

    ``f`` returns ``(value, size, dlog)`` with ``dlog = f'/f`` or ``None``.
    A segment is accepted only when the wrapped phase step is small and agrees
    with the trapezoid estimate from ``dlog``; otherwise it is bisected.  The
    second test catches steps that alias by a multiple of ``2 pi``.
    """
    dz = z1 - z0

    def sample(z):
        v = f(z)
        if v[0] == 0:
            raise BoundaryZero(f"exact zero at {z} on the contour")
        return v

    ts = np.linspace(0.0, 1.0, n_init + 1)
    vals = [sample(z0 + t * dz) for t in ts]
    total = 0.0
    minv = min(abs(v[1]) for v in vals)
    stack = [(ts[i], vals[i], ts[i + 1], vals[i + 1], 0) for i in range(n_init)][::-1]
    while stack:
        ta, va, tb, vb, depth = stack.pop()
        d = np.angle(vb[0] / va[0])
        bad = abs(d) > np.pi / 4
        if not bad and va[2] is not None:
            pred = (0.5 * (va[2] + vb[2]) * (tb - ta) * dz).imag
            bad = abs(pred - d) > np.pi / 8
        if bad and depth < max_depth:
            tm = 0.5 * (ta + tb)
            vm = sample(z0 + tm * dz)
            minv = min(minv, abs(vm[1]))
            stack.append((tm, vm, tb, vb, depth + 1))
            stack.append((ta, va, tm, vm, depth + 1))
            continue
        if abs(d) > np.pi / 2:
            raise PhaseJump(f"phase jump {d:.3f} between {z0 + ta * dz} and {z0 + tb * dz}")
        total += d
    if minv <= min_abs:
        raise BoundaryZero(f"|w| = {minv:.3e} on the contour")
    return total


def count_zeros(target, box, tau: float = 1.0, config: SolverConfig = DEFAULT,
                n_init: int = 8, max_depth: int = 18, return_raw: bool = False):
    """Number of zeros of the Wronskian (or of a callable) inside ``box``.

    ``box = (re_lo, re_hi, im_lo, im_hi)``.  ``target`` is a ``ModeParams`` /
    ``Problem`` or a holomorphic callable ``f(lambda)``.
    """
    if callable(target) and not isinstance(target, (ModeParams, Problem)):
        def f(z):
            v = complex(target(z))
            return v, abs(v), None
        min_abs = 0.0
    else:
        prob = as_problem(target, tau, config)

        def f(z):
            wv = wronskian(prob, z)
            return wv.w, abs(wv.normalized), (wv.dw / wv.w if wv.w != 0 else None)

        min_abs = config.boundary_tol
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0
    for i in range(4):
        total += _edge_phases(f, corners[i], corners[(i + 1) % 4], n_init, max_depth, min_abs)
    raw = total / (2 * np.pi)
    k = int(round(raw))
    if abs(raw - k) > 0.25:
        raise PhaseJump(f"winding number {raw:.3f} is not close to an integer")
    return (k, raw) if return_raw else k


# ---------------------------------------------------------------------------
# Complex Newton refinement


def newton(prob: Problem, seed: complex, config: SolverConfig = DEFAULT, max_iter: int | None = None,
           max_step: float | None = None):
    """Plain Newton on ``w(lambda)``; returns ``(lambda, last_step, iterations)``."""
    lam = complex(seed)
    max_iter = max_iter or config.newton_max_iter
    step = np.inf
    for it in range(1, max_iter + 1):
        wv = wronskian(prob, lam)
        if wv.dw == 0:
            raise NewtonDiverged("vanishing derivative")
        step = wv.w / wv.dw
        if max_step is not None and abs(step) > max_step:
            step = step * (max_step / abs(step))
        lam = lam - step
        if not np.isfinite(lam):
            raise NewtonDiverged("non-finite iterate")
        if abs(step) <= config.newton_tol * (1.0 + abs(lam)):
            return lam, abs(step), it
    raise NewtonDiverged(f"no convergence after {max_iter} iterations from {seed}")


def certify(prob: Problem, lam: complex, half_width: float, config: SolverConfig = DEFAULT) -> int:
    box = (lam.real - half_width, lam.real + half_width, lam.imag - half_width, lam.imag + half_width)
    return count_zeros(prob, box, config=config)


def check_apriori(params: ModeParams, lam: complex, config: SolverConfig = DEFAULT) -> None:
    bound = config.apriori_constant(params.strip_c) * abs(params.omega)
    if abs(complex(lam).imag) > bound + 1e-9:
        raise AprioriViolation(f"|Im lambda| = {abs(lam.imag):.4g} exceeds {bound:.4g}")


def complex_refine(params, seed: complex, tau: float = 1.0, config: SolverConfig = DEFAULT,
                   index: int = -1, expected: int = 1, certify_box: bool = True,
                   neighbour_sep: float | None = None) -> SpectralPoint:
    """Newton on the Wronskian from ``seed``, certified by the argument principle.

    ``neighbour_sep`` is the distance to the nearest other known eigenvalue; the
    certification box is kept well inside it so a close doublet partner is not counted.
    """
    prob = as_problem(params, tau, config)
    lam, last, _ = newton(prob, seed, config)
    mult = 1
    if certify_box:
        hw = max(10.0 * last, 1e-6 * (1.0 + abs(lam)))
        if neighbour_sep is not None and np.isfinite(neighbour_sep):
            hw = min(hw, 0.35 * neighbour_sep)
        mult = certify(prob, lam, hw, config)
        if mult != 1 and mult != expected:
            raise CertificationMismatch(f"box around {lam} holds {mult} zeros")
    if prob.params is not None:
        check_apriori(prob.params, lam, config)
    wv = wronskian(prob, lam)
    pt = SpectralPoint(lam, index, mult, None, abs(wv.normalized), "newton")
    h = None
    if neighbour_sep is not None and np.isfinite(neighbour_sep):
        h = min(1e-4 * math.sqrt(1.0 + abs(lam)), 0.05 * neighbour_sep)
    pt.extra["dw_check"] = derivative_check(prob, lam, h)
    if pt.extra["dw_check"] >= 1e-4:
        log.warning("analytic dw/dlambda disagrees with differences by %.2e at %s", pt.extra["dw_check"], lam)
    return pt


def derivative_check(problem, lam: complex, h: float | None = None) -> float:
    """Relative gap between analytic ``dw/dlambda`` and a central difference."""
    prob = as_problem(problem)
    lam = complex(lam)
    h = h or 1e-4 * math.sqrt(1.0 + abs(lam))
    w0 = wronskian(prob, lam)
    wp, wm = wronskian(prob, lam + h), wronskian(prob, lam - h)
    fd = (wp.w * math.exp(wp.logscale - w0.logscale) - wm.w * math.exp(wm.logscale - w0.logscale)) / (2 * h)
    return float(abs(fd - w0.dw) / abs(w0.dw))


def imv_identity(params, lam: complex, grid=None, tau: float = 1.0):
    """``(|int Im V |phi|^2|, int |Im V| |phi|^2)`` for the eigenfunction at ``lam``.

    At an eigenvalue the first number vanishes: it is the imaginary part of
    ``int |phi'|^2 + V |phi|^2``, which is zero for Dirichlet data.
    """
    from .grid import eigenfunction_on_grid, mapped_gauss_legendre
    from .potential import eval_potential

    grid = grid or mapped_gauss_legendre(DEFAULT.grid)
    prob = as_problem(params, tau)
    phi = eigenfunction_on_grid(prob, lam, grid)
    imv = eval_potential(params, lam, grid.u, tau).v.imag
    dens = grid.w * np.abs(phi) ** 2
    return float(abs(np.sum(imv * dens))), float(np.sum(np.abs(imv) * dens))


def complex_spectrum(params: ModeParams, n_max: int, config: SolverConfig = DEFAULT, **kw) -> list[SpectralPoint]:
    """Eigenvalues ``0..n_max`` at ``tau = 1`` indexed by continuation from ``tau = 0``."""
    from .homotopy import track_spectrum

    res = track_spectrum(params, n_max, config=config, **kw)
    pts = [r.final for r in res.records]
    sort_points(list(pts))
    return pts


def sort_points(points):
    """Deterministic order by ``Re lambda`` then ``Im lambda``; fills ``sorted_index``."""
    pts = sorted(points, key=lambda p: (round(p.lam.real, 9), round(p.lam.imag, 9)))
    for i, p in enumerate(pts):
        p.sorted_index = i
    return pts
