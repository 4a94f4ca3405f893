"""Osculating-circle geometry of ``zeta = int 1/phi^2`` and the node integral.

For a complex solution with ``Im y > 0`` (``y = phi'/phi``) the curve
``zeta(u)`` has curvature ``K = 2 |phi|^2 Im y``, radius ``R = 1/|K|`` and
centre ``p = zeta - i / (2 phi^2 Im y)``.  For a real potential ``K`` and
``p`` are constant and the total angle ``int_0^pi Im y`` counts zeros of the
Dirichlet solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import UndefinedFrame
from .integrator import Problem, as_problem, integrate_sl


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def _monotone_sweep(angles) -> float:
    """Total increase of an angle known to be non-decreasing, from wrapped samples."""
    d = np.diff(np.asarray(angles, dtype=float))
    return float(np.sum((d + np.pi / 2) % (2 * np.pi) - np.pi / 2))


_TAIL_HALVINGS = 50


def _left_tail(basis, sig: float, theta_start: float) -> float:
    """Angle swept by ``reg + i sig gen`` on ``(0, eps]``.

    Sampled at ``eps 2^-k``: close to an eigenvalue the solution can pass near
    zero inside the matching radius, where one wrapped difference is ambiguous.
    """
    x = basis.matching_radius * 2.0 ** -np.arange(_TAIL_HALVINGS, -1, -1)
    v = basis.evaluate(x)
    return _monotone_sweep(np.concatenate([[theta_start], np.angle(v[0] + 1j * sig * v[2])]))


def _right_tail(basis, A: complex, B: complex, arg_start: float) -> float:
    """Angle swept by ``A gen + B reg`` from ``pi - eps`` to the pole."""
    # local variable pi - u: values only, so the derivative sign flip does not matter
    x = basis.matching_radius * 2.0 ** -np.arange(1, _TAIL_HALVINGS + 1)
    v = basis.evaluate(x)
    limit = np.angle(A) + (np.pi if basis.a == 0 else 0.0)
    return _monotone_sweep(np.concatenate([[arg_start], np.angle(A * v[2] + B * v[0]), [limit]]))


def _sigma(a_left: int) -> float:
    # reg + i*sigma*gen has Im y > 0 for a real potential
    return 1.0 if a_left == 0 else -1.0


def default_u0(problem: Problem, lam: complex) -> float:
    """Minimiser of ``Re V`` on ``[0.1, pi/2]``."""
    res = minimize_scalar(
        lambda u: float(np.real(problem.potential(lam, u))), bounds=(0.1, np.pi / 2), method="bounded",
        options={"xatol": 1e-10},
    )
    return float(res.x)


def complex_solution(problem, lam: complex, u_eval=None, u0: float | None = None, normalize: bool = True,
                     tau: float = 1.0, npts: int = 401):
    """The left solution ``phi = reg + i sigma gen`` with ``zeta`` and angle.

    ``zeta`` starts from the exact value ``int_0^eps phi^-2`` (obtained from the
    Wronskian identity ``int phi^-2 = -(reg/phi)/w(phi, reg)``), and the angle
    is continued from ``arg phi(0+)``.  With ``normalize`` the solution is
    rescaled by a complex constant so that ``phi(u0)`` is real positive and
    ``phi(u0)^2 Im y(u0) = 1``; the record is stored in ``state.normalization``.
    """
    prob = as_problem(problem, tau)
    lam = complex(lam)
    bl = prob.basis(lam, "left")
    eps = bl.matching_radius
    v = bl.values_u(eps)
    sig = _sigma(prob.a_left)
    phi = v[0][0] + 1j * sig * v[2][0]
    dphi = v[1][0] + 1j * sig * v[3][0]
    w_phi_reg = dphi * v[0][0] - phi * v[1][0]
    zeta0 = -(v[0][0] / phi) / w_phi_reg
    theta_start = -np.pi / 2
    theta0 = theta_start + _left_tail(bl, sig, theta_start)
    br = prob.basis(lam, "right")
    hi = np.pi - br.matching_radius
    if u_eval is None:
        u_eval = np.linspace(eps, hi, npts)
    u_eval = np.asarray(u_eval, dtype=float)
    if u0 is None and normalize:
        u0 = default_u0(prob, lam)
    pts = u_eval if u0 is None else np.union1d(u_eval, [u0])
    st = integrate_sl(prob, lam, (eps, phi, dphi), u_eval=pts, zeta0=zeta0, with_angle=True)
    st.angle = st.angle + theta0
    rec = {"u0": None, "theta_left": theta_start, "scale": 1.0 + 0j, "sigma": sig}
    if normalize and u0 is not None:
        i = int(np.argmin(np.abs(pts - u0)))
        y0 = st.dphi[i] / st.phi[i]
        if y0.imag > 0:
            phi_u0 = st.true_phi()[i]
            c = 1.0 / (phi_u0 * math.sqrt(y0.imag))
            _rescale(st, c)
            rec.update(u0=float(u0), y0=complex(y0), scale=complex(c), theta_left=theta_start + float(np.angle(c)))
        else:
            rec.update(u0=float(u0), y0=complex(y0), status="none")
    st.normalization = rec
    if u0 is not None and not np.isin(u0, u_eval):
        keep = np.isin(pts, u_eval)
        for name in ("grid", "phi", "dphi", "phi_l", "dphi_l", "logscale", "zeta", "angle"):
            setattr(st, name, getattr(st, name)[keep])
    return st


def _rescale(st, c):
    st.phi = st.phi * c
    st.dphi = st.dphi * c
    st.phi_l = st.phi_l * c
    st.dphi_l = st.dphi_l * c
    if st.zeta is not None:
        st.zeta = st.zeta / c ** 2
    if st.angle is not None:
        st.angle = st.angle + float(np.angle(c))


@dataclass
class OsculatingFrame:
    grid: np.ndarray
    theta: np.ndarray
    curvature: np.ndarray
    radius: np.ndarray
    center: np.ndarray
    coverage: float

    def zeta_closure(self, zeta) -> np.ndarray:
        """``|zeta - p - (i/K) exp(-2 i theta)|`` pointwise."""
        return np.abs(zeta - self.center - (1j / self.curvature) * np.exp(-2j * self.theta))


def frame_along(state) -> OsculatingFrame:
    """Osculating frame at every sample with ``Im y > 0``; others are NaN."""
    if state.zeta is None:
        raise UndefinedFrame("state carries no zeta integral")
    phi = state.true_phi()
    y = state.dphi / state.phi
    iy = y.imag
    good = iy > 0
    if not np.any(good):
        raise UndefinedFrame("Im y <= 0 on the whole span")
    theta = state.angle if state.angle is not None else np.unwrap(np.angle(phi))
    K = np.where(good, 2.0 * np.abs(phi) ** 2 * iy, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        center = np.where(good, state.zeta - 1j / (2.0 * phi ** 2 * iy), np.nan)
        R = 1.0 / np.abs(K)
    return OsculatingFrame(state.grid, theta, K, R, center, float(np.mean(good)))


# ---------------------------------------------------------------------------
# Node integral


def node_integral(problem, lam: float, tau: float = 0.0, return_state: bool = False):
    """``int_0^pi Im y du`` for ``phi = reg + i sigma gen`` at real ``lambda``.

    The interior is integrated as an extra ODE component; the two pole tails
    are closed exactly from the Frobenius data (at the right pole the solution
    is decomposed into the local basis, and ``arg phi(pi)`` is the argument
    of the coefficient of the dominant branch).
    """
    prob = as_problem(problem, tau)
    lam = float(np.real(lam))
    bl, br = prob.basis(lam, "left"), prob.basis(lam, "right")
    eL, eR = bl.matching_radius, br.matching_radius
    vl = bl.values_u(eL)
    sig = _sigma(prob.a_left)
    phi = vl[0][0] + 1j * sig * vl[2][0]
    dphi = vl[1][0] + 1j * sig * vl[3][0]
    left_tail = _left_tail(bl, sig, -np.pi / 2)
    st = integrate_sl(prob, lam, (eL, phi, dphi), u_eval=[np.pi - eR], with_angle="monotone")
    f, df = st.phi[-1], st.dphi[-1]
    vr = br.values_u(np.pi - eR)
    reg, dreg, gen, dgen = vr[0][0], vr[1][0], vr[2][0], vr[3][0]
    A = (df * reg - f * dreg) / (dgen * reg - gen * dreg)
    B = (f * dgen - df * gen) / (reg * dgen - gen * dreg)
    right_tail = _right_tail(br, A, B, np.angle(f))
    total = left_tail + st.angle[-1] + right_tail
    if return_state:
        return float(total), st
    return float(total)


def node_count(params, lam: float, interval=(0.0, np.pi), tau: float = 0.0):
    """``(count, angle_integral)`` with ``count = ceil(I/pi) - 1``.

    ``count`` is the number of zeros of the Dirichlet solution for ``lambda``
    in ``(lambda_{n-1}, lambda_n]``; the bracket ``I/pi - 1 <= Z < I/pi + 1``
    always holds.  Only the full interval is supported.
    """
    if tuple(interval) != (0.0, np.pi):
        raise ValueError("node_count integrates over the whole interval (0, pi)")
    total = node_integral(params, lam, tau)
    return max(0, math.ceil(total / np.pi - 1e-8) - 1), total


def sign_changes(values) -> int:
    v = np.real(np.asarray(values))
    v = v[np.abs(v) > 1e-14 * np.abs(v).max()]
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))


def phiphiD_sign_check(state):
    """``(max identity violation, min Im(phi phi^D))`` for a normalised state.

    ``phi^D = phi zeta`` and the identity is
    ``Im(phi phi^D) = |phi|^2 (1 - Re[(phi^2/|phi|^2) L]) / 2`` with
    ``L = lim_{u->0} |phi|^2/phi^2``.
    """
    if state.zeta is None:
        raise UndefinedFrame("state carries no zeta integral")
    phi = state.true_phi()
    prod = phi * phi * state.zeta
    theta_left = state.normalization.get("theta_left", -np.pi / 2)
    L = np.exp(-2j * theta_left)
    a2 = np.abs(phi) ** 2
    rhs = 0.5 * a2 * (1.0 - np.real(phi ** 2 / a2 * L))
    viol = np.max(np.abs(prod.imag - rhs) / np.maximum(a2, 1e-300))
    return float(viol), float(np.min(prod.imag))
