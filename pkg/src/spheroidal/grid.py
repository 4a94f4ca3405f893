"""Quadrature grid on (0, pi) and the Dirichlet pair sampled on it."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NearSpectrum
from .integrator import Problem, _dirichlet_factor, _pair_scale, _seed_vector, as_problem, integrate_sl


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes ``u`` and positive weights ``w`` with ``sum w f ~ int_0^pi f du``."""

    u: np.ndarray
    w: np.ndarray

    @property
    def size(self) -> int:
        return self.u.size

    def inner(self, f, g) -> complex:
        return complex(np.sum(self.w * np.conj(f) * g))

    def norm(self, f) -> float:
        return float(math.sqrt(np.sum(self.w * np.abs(f) ** 2)))


@lru_cache(maxsize=16)
def _mapped(n: int):
    x, wx = np.polynomial.legendre.leggauss(n)
    # u = (pi/2)(1 + (3x - x^3)/2): flat at x = +-1, so nodes cluster at both poles
    u = 0.5 * np.pi * (1.0 + 0.5 * (3.0 * x - x ** 3))
    du = 0.75 * np.pi * (1.0 - x * x)
    return u, wx * du


def mapped_gauss_legendre(n: int = 400) -> QuadratureGrid:
    if n < 8:
        raise ValueError("grid needs at least 8 nodes")
    u, w = _mapped(int(n))
    return QuadratureGrid(u.copy(), w.copy())


def _segment_weights(x: np.ndarray, order: int = 8) -> np.ndarray:
    """Row ``m`` integrates the local interpolant over ``[x_m, x_{m+1}]``.

    Windows of ``order`` neighbouring nodes keep the rule banded, which matters
    when the integrand is a product of a huge and a tiny factor near a pole.
    Rows ``0`` and ``n`` cover the end pieces ``[-1, x_0]`` and ``[x_{n-1}, 1]``.
    """
    n = x.size
    S = np.zeros((n + 1, n))
    ends = np.concatenate(([-1.0], x, [1.0]))
    for m in range(n + 1):
        a, b = ends[m], ends[m + 1]
        c = min(max(m - order // 2, 0), n - order)
        idx = np.arange(c, c + order)
        xs = x[idx]
        mid, half = 0.5 * (xs[0] + xs[-1]), 0.5 * (xs[-1] - xs[0])
        t = (xs - mid) / half
        ta, tb = (a - mid) / half, (b - mid) / half
        p = np.arange(order)
        V = t[None, :] ** p[:, None]
        mom = (tb ** (p + 1) - ta ** (p + 1)) / (p + 1) * half
        S[m, idx] = np.linalg.solve(V, mom)
    return S


@lru_cache(maxsize=16)
def _running(n: int):
    x, _ = np.polynomial.legendre.leggauss(n)
    S = _segment_weights(x)
    lower = np.cumsum(S[:-1], axis=0)             # int_{-1}^{x_i}
    upper = np.cumsum(S[::-1][:-1], axis=0)[::-1]  # int_{x_i}^{1}
    jac = 0.75 * np.pi * (1.0 - x * x)
    return lower * jac[None, :], upper * jac[None, :]


def running_integrals(grid: QuadratureGrid):
    """``(lower, upper)`` matrices for ``int_0^{u_i}`` and ``int_{u_i}^pi``."""
    u, _ = _mapped(grid.size)
    if not np.array_equal(u, grid.u):
        raise ValueError("running integrals need a mapped Gauss-Legendre grid")
    return _running(grid.size)


@dataclass
class DirichletSamples:
    """``phi^D_L``, ``phi^D_R`` on a grid, stored as ``values * exp(log)``.

    ``w`` is ``w(phi^D_L, phi^D_R)`` divided by ``exp(log_w)``.
    """

    grid: QuadratureGrid
    lam: complex
    left: np.ndarray
    left_log: float
    right: np.ndarray
    right_log: float
    w: complex
    log_w: float
    normalized_w: complex

    @property
    def wronskian(self) -> complex:
        return self.w * math.exp(self.log_w) if abs(self.log_w) < 700 else complex(np.inf)


def _flatten_log(values, logs):
    """Common exponent for a sample vector with per-sample log-scales."""
    ref = float(np.max(logs))
    return values * np.exp(logs - ref), ref


def _one_side(prob: Problem, lam: complex, u: np.ndarray, side: str):
    bl, br = prob.basis(lam, "left"), prob.basis(lam, "right")
    near, far = (bl, br) if side == "left" else (br, bl)
    lo, hi = bl.matching_radius, np.pi - br.matching_radius
    fac = _dirichlet_factor(near.a)
    if side == "right":
        fac = -fac
    u_start = lo if side == "left" else hi
    f0, df0, _, _ = _seed_vector(near, u_start)
    mid = (u >= lo) & (u <= hi)
    out = np.empty(u.size, dtype=complex)
    logs = np.zeros(u.size)
    # series on the near side
    near_mask = (u < lo) if side == "left" else (u > hi)
    if np.any(near_mask):
        out[near_mask] = fac * near.values_u(u[near_mask])[0]
    # integrate across, then append the far endpoint for the decomposition
    u_end = hi if side == "left" else lo
    idx = np.where(mid)[0]
    if side == "right":
        idx = idx[::-1]
    pts = np.append(u[idx], u_end)
    if pts.size > 1 and pts[-1] == pts[-2]:
        pts = pts[:-1]
    st = integrate_sl(prob, lam, (u_start, fac * f0, fac * df0), u_eval=pts)
    out[idx] = st.phi[: idx.size]
    logs[idx] = st.logscale[: idx.size]
    far_mask = (u > hi) if side == "left" else (u < lo)
    if np.any(far_mask):
        fe, dfe, le = st.phi[-1], st.dphi[-1], st.logscale[-1]
        v = far.values_u(u_end)
        r, dr, g, dg = v[0][0], v[1][0], v[2][0], v[3][0]
        wrg = dr * g - r * dg
        alpha = (dfe * g - fe * dg) / wrg
        beta = (dfe * r - fe * dr) / (-wrg)
        vv = far.values_u(u[far_mask])
        out[far_mask] = alpha * vv[0] + beta * vv[2]
        logs[far_mask] = le
    # derivative data at pi/2 for the Wronskian
    return out, logs


def dirichlet_on_grid(problem, lam: complex, grid: QuadratureGrid, tau: float = 1.0,
                      near_tol: float | None = None) -> DirichletSamples:
    """Sample the Dirichlet pair on ``grid`` and compute their Wronskian.

    Raises ``NearSpectrum`` if the normalised Wronskian is below ``near_tol``.
    """
    prob = as_problem(problem, tau)
    lam = complex(lam)
    fl, ll = _one_side(prob, lam, grid.u, "left")
    fr, lr = _one_side(prob, lam, grid.u, "right")
    fl, Ll = _flatten_log(fl, ll)
    fr, Lr = _flatten_log(fr, lr)
    # Wronskian at pi/2 on the same footing
    bl, br = prob.basis(lam, "left"), prob.basis(lam, "right")
    fa, fb = _dirichlet_factor(prob.a_left), -_dirichlet_factor(prob.a_right)
    um = np.pi / 2
    a0 = _seed_vector(bl, bl.matching_radius)
    b0 = _seed_vector(br, np.pi - br.matching_radius)
    L = integrate_sl(prob, lam, (bl.matching_radius, fa * a0[0], fa * a0[1]), u_eval=[um])
    R = integrate_sl(prob, lam, (np.pi - br.matching_radius, fb * b0[0], fb * b0[1]), u_eval=[um])
    w = L.dphi[-1] * R.phi[-1] - L.phi[-1] * R.dphi[-1]
    log_w = float(L.logscale[-1] + R.logscale[-1])
    scale = _pair_scale(L.phi[-1], L.dphi[-1], R.phi[-1], R.dphi[-1], lam)
    nw = complex(w / scale)
    if near_tol is not None and abs(nw) < near_tol:
        raise NearSpectrum(f"|w| / scale = {abs(nw):.3e} at lambda = {lam}")
    return DirichletSamples(grid, lam, fl, Ll, fr, Lr, complex(w), log_w, nw)


def green_matrix(samples: DirichletSamples) -> np.ndarray:
    """``s(u_i, u_j) = phi^D_L(min) phi^D_R(max) / w`` on the sample grid."""
    fl, fr = samples.left, samples.right
    c = math.exp(samples.left_log + samples.right_log - samples.log_w) / samples.w
    n = fl.size
    i = np.arange(n)
    lo = np.minimum.outer(i, i)
    hi = np.maximum.outer(i, i)
    return c * fl[lo] * fr[hi]


def resolvent_operator(samples: DirichletSamples) -> np.ndarray:
    """Matrix ``K`` with ``(K f)_i ~ int s(u_i, v) f(v) dv`` by product integration.

    The kernel has a derivative jump on the diagonal; splitting the integral
    there and using banded running integrals avoids the resulting
    first-order quadrature error.
    """
    g = samples.grid
    lower, upper = running_integrals(g)
    fl, fr = samples.left, samples.right
    c = math.exp(samples.left_log + samples.right_log - samples.log_w) / samples.w
    return c * (fr[:, None] * lower * fl[None, :] + fl[:, None] * upper * fr[None, :])


def eigenfunction_on_grid(problem, lam: complex, grid: QuadratureGrid, tau: float = 1.0) -> np.ndarray:
    """Eigenfunction at ``lam``, unit L2 norm, real-positive at its peak.

    The left Dirichlet solution is used on ``u < pi/2`` and the right one,
    matched at the middle, beyond; each side is then free of the residual
    dominant branch that a one-sided sweep picks up near the far pole.
    """
    prob = as_problem(problem, tau)
    lam = complex(lam)
    fl, ll = _one_side(prob, lam, grid.u, "left")
    fr, lr = _one_side(prob, lam, grid.u, "right")
    fl, Ll = _flatten_log(fl, ll)
    fr, Lr = _flatten_log(fr, lr)
    left = grid.u < 0.5 * np.pi
    i = int(np.argmax(np.where(np.abs(grid.u - 0.5 * np.pi) < 0.3, np.abs(fl) * np.abs(fr), -1.0)))
    f = np.where(left, fl, fr * (fl[i] / fr[i]))
    f = f / grid.norm(f)
    j = int(np.argmax(np.abs(f)))
    return f * (abs(f[j]) / f[j])
