"""Propagation of solutions of ``-phi'' + V phi = 0`` and Wronskian assembly.

The compiled stepper in :mod:`spheroidal._dop853` advances ``(phi, phi')``
together with the variational pair ``(phi_lambda, phi_lambda')``, and
optionally ``zeta = int 1/phi^2`` and the angle ``int Im(phi'/phi)``.
Everything here is a thin, typed layer on top of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _dop853
from .boundary import EndpointBasis, default_radius, endpoint_basis
from .config import DEFAULT, SolverConfig
from .errors import ParameterError, BlowUp, DomainError, NonFiniteZeta, StepUnderflow
from .potential import ModeParams, PotentialCoefficients, coefficients_of

MAX_STEPS = 2_000_000
LOG_GUARD = 600.0 * 50


@dataclass(frozen=True)
class Problem:
    """A concrete operator: coefficients, pole orders and numerical settings."""

    coef: PotentialCoefficients
    a_left: int
    a_right: int
    config: SolverConfig = DEFAULT
    params: ModeParams | None = None
    tau: float = 1.0

    @classmethod
    def from_params(cls, params: ModeParams, tau: float = 1.0, config: SolverConfig = DEFAULT):
        return cls(coefficients_of(params, tau), params.a_left, params.a_right, config, params, tau)

    @classmethod
    def synthetic(cls, coef: PotentialCoefficients, config: SolverConfig = DEFAULT):
        return cls(coef, 0, 0, config, None, 1.0)

    def at_tau(self, tau: float) -> "Problem":
        if self.params is None:
            raise ValueError("tau deformation needs physical parameters")
        return Problem.from_params(self.params, tau, self.config)

    def packed(self, lam: complex) -> np.ndarray:
        return self.coef.as_array(complex(lam))

    def basis(self, lam: complex, side: str) -> EndpointBasis:
        cfg = self.config
        eps = default_radius(complex(lam) - complex(self.coef.C), cfg.eps_max, cfg.eps_mu)
        a = self.a_left if side == "left" else self.a_right
        lead = complex(self.coef.P) + (1 if side == "left" else -1) * complex(self.coef.Q)
        if abs(lead - (a * a - 0.25)) > 1e-10 * (1 + a * a):
            raise ParameterError(
                f"{side} endpoint: P {'+' if side == 'left' else '-'} Q = {lead} but the series needs a^2 - 1/4 "
                f"with a = {a}; synthetic potentials without this pole can only be integrated directly")
        return endpoint_basis(
            self.params, lam, side, eps=eps, series_tol=cfg.series_tol,
            max_order=cfg.series_max_order, coef=self.coef, a=a,
        )

    def potential(self, lam, u):
        return _dop853_potential(self.packed(lam), np.asarray(u, dtype=float))


def _dop853_potential(coef, u):
    c = coef
    sn, cs = np.sin(u), np.cos(u)
    v = c[0] * sn * sn + c[1] * cs + c[2] - c[5]
    if c[3] != 0 or c[4] != 0:
        v = v + (c[3] + c[4] * cs) / (sn * sn)
    return v


def as_problem(obj, tau: float = 1.0, config: SolverConfig | None = None) -> Problem:
    if isinstance(obj, Problem):
        return obj if config is None else Problem(obj.coef, obj.a_left, obj.a_right, config, obj.params, obj.tau)
    if isinstance(obj, ModeParams):
        return Problem.from_params(obj, tau, config or DEFAULT)
    if isinstance(obj, PotentialCoefficients):
        return Problem.synthetic(obj, config or DEFAULT)
    raise TypeError(f"cannot build a problem from {type(obj).__name__}")


@dataclass
class SturmLiouvilleState:
    """Solution samples on ``grid``; ``phi`` etc. are stored up to ``exp(logscale)``.

    ``zeta`` is the true (unscaled) running integral of ``1/phi^2`` when it
    was requested, otherwise None.
    """

    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    phi_l: np.ndarray
    dphi_l: np.ndarray
    logscale: np.ndarray
    lam: complex
    zeta: np.ndarray | None = None
    angle: np.ndarray | None = None
    nsteps: int = 0
    normalization: dict = field(default_factory=dict)

    @property
    def y(self) -> np.ndarray:
        """``phi'/phi``, NaN inside the guard band around zeros."""
        mag = np.abs(self.phi) * np.exp(self.logscale - self.logscale.max())
        with np.errstate(divide="ignore", invalid="ignore"):
            y = self.dphi / self.phi
        y[mag < 1e-12 * mag.max()] = np.nan
        return y

    @property
    def y_lambda(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.dphi_l * self.phi - self.dphi * self.phi_l) / self.phi ** 2

    def true_phi(self) -> np.ndarray:
        return self.phi * np.exp(self.logscale)

    def true_dphi(self) -> np.ndarray:
        return self.dphi * np.exp(self.logscale)


_ANGLE_MODES = {False: 0, True: 1, "ode": 1, "monotone": 2}


def integrate_sl(
    problem,
    lam: complex,
    initial,
    u_end: float | None = None,
    u_eval=None,
    initial_lambda=(0j, 0j),
    zeta0: complex | None = None,
    with_angle: bool | str = False,
    tau: float = 1.0,
    config: SolverConfig | None = None,
) -> SturmLiouvilleState:
    """Propagate ``(phi, phi')`` from ``initial = (u_start, phi, phi')``.

    ``u_eval`` is a monotone list of output points in the direction of
    integration (``u_end`` is appended when given).  If ``zeta0`` is not None
    the integral ``int 1/phi^2`` is accumulated starting from that value.
    ``with_angle`` is False, True (integrate ``Im y``) or ``"monotone"``
    (unwrap ``arg phi`` step by step; only valid when ``Im y`` cannot change sign).
    """
    prob = as_problem(problem, tau, config)
    cfg = prob.config
    u0, phi0, dphi0 = initial
    pts = [] if u_eval is None else list(np.atleast_1d(np.asarray(u_eval, dtype=float)))
    if u_end is not None:
        pts.append(float(u_end))
    if not pts:
        raise ValueError("nothing to integrate to")
    pts = np.asarray(pts, dtype=float)
    if np.any(pts <= 0) or np.any(pts >= np.pi) or not (0 < u0 < np.pi):
        if prob.params is not None:
            raise DomainError("integration points must lie inside (0, pi)")
    direction = np.sign(pts[-1] - u0) or 1.0
    if np.any(np.diff(pts) * direction < 0):
        raise ValueError("u_eval must be monotone in the integration direction")
    y0 = np.zeros(_dop853.NVAR, dtype=np.complex128)
    y0[0], y0[1] = phi0, dphi0
    y0[2], y0[3] = initial_lambda
    y0[4] = 0j if zeta0 is None else zeta0
    Y, L, status, nsteps = _dop853.integrate(
        prob.packed(lam), float(u0), y0, pts, cfg.ode_tol, cfg.ode_atol,
        zeta0 is not None, _ANGLE_MODES[with_angle], MAX_STEPS,
    )
    _check_status(status, L)
    zeta = None
    if zeta0 is not None:
        zeta = Y[:, 4] * np.exp(-2.0 * L)
        if not np.all(np.isfinite(zeta)):
            raise NonFiniteZeta("zeta integral is not finite")
    return SturmLiouvilleState(
        pts, Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], L, complex(lam), zeta,
        Y[:, 5].real if _ANGLE_MODES[with_angle] else None, int(nsteps),
    )


def _check_status(status, L):
    if status == _dop853.STEP_UNDERFLOW:
        raise StepUnderflow("required step fell below 1e-14")
    if status == _dop853.TOO_MANY_STEPS:
        raise StepUnderflow("step budget exhausted")
    if L.size and np.max(np.abs(L)) > LOG_GUARD:
        raise BlowUp("log-scale exceeded the overflow guard")


# ---------------------------------------------------------------------------
# Distinguished solutions and the Wronskian


@dataclass
class WronskianValue:
    """``w = w(reg_L, reg_R)`` at ``u_match`` with its ``lambda``-derivative.

    Both are stored up to the positive factor ``exp(logscale)``.  ``scale`` is
    ``k |(phi_L, phi_L'/k)| |(phi_R, phi_R'/k)|`` with ``k = sqrt(1 + |lambda|)``
    on the same footing, so ``w / scale`` is a dimensionless residual.
    """

    lam: complex
    w: complex
    dw: complex
    scale: float
    logscale: float
    u_match: float

    @property
    def normalized(self) -> complex:
        return self.w / self.scale

    @property
    def newton_step(self) -> complex:
        return self.w / self.dw


def _pair_scale(fL, dfL, fR, dfR, lam):
    k = math.sqrt(1.0 + abs(lam))
    return float(k * math.hypot(abs(fL), abs(dfL) / k) * math.hypot(abs(fR), abs(dfR) / k))


def _seed_vector(basis: EndpointBasis, u: float, which: str = "reg"):
    v = basis.values_u(u)
    if which == "reg":
        return complex(v[0][0]), complex(v[1][0]), complex(v[4][0]), complex(v[5][0])
    return complex(v[2][0]), complex(v[3][0]), complex(v[6][0]), complex(v[7][0])


def regular_solution(problem: Problem, lam: complex, side: str, u_eval, basis: EndpointBasis | None = None):
    """The boundary-condition solution from ``side`` sampled at ``u_eval``.

    ``u_eval`` must lie in ``[eps, pi - eps]`` and be ordered away from the
    starting pole.
    """
    b = basis or problem.basis(lam, side)
    u0 = b.matching_radius if side == "left" else np.pi - b.matching_radius
    f, df, fl, dfl = _seed_vector(b, u0)
    return integrate_sl(problem, lam, (u0, f, df), u_eval=u_eval, initial_lambda=(fl, dfl))


def wronskian(problem, lam: complex, u_match: float = np.pi / 2, tau: float = 1.0) -> WronskianValue:
    prob = as_problem(problem, tau)
    lam = complex(lam)
    left = regular_solution(prob, lam, "left", [u_match])
    right = regular_solution(prob, lam, "right", [u_match])
    fL, dfL, gL, dgL = left.phi[-1], left.dphi[-1], left.phi_l[-1], left.dphi_l[-1]
    fR, dfR, gR, dgR = right.phi[-1], right.dphi[-1], right.phi_l[-1], right.dphi_l[-1]
    w = dfL * fR - fL * dfR
    dw = dgL * fR + dfL * gR - gL * dfR - fL * dgR
    scale = _pair_scale(fL, dfL, fR, dfR, lam)
    return WronskianValue(lam, complex(w), complex(dw), float(scale), float(left.logscale[-1] + right.logscale[-1]), u_match)


@dataclass
class WronskianReport:
    """``drift`` is the spread of ``w`` over the three sample points relative
    to ``max(|w|, scale)``."""

    value: complex
    eval_point: float
    lam: complex
    drift: float
    normalized: complex
    samples: tuple = ()


def _dirichlet_factor(a: int) -> float:
    """``phi^D = factor * reg`` normalised by ``w(phi_gen, phi^D) = -1``."""
    return 1.0 / (2.0 * a) if a > 0 else -1.0


def build_dirichlet_pair(params, lam: complex, tau: float = 1.0, config: SolverConfig | None = None, npts: int = 201):
    """``phi^D_L`` and ``phi^D_R`` on a common grid plus the Wronskian report.

    ``phi^D_L`` is the regular left branch scaled so that
    ``w(phi_L, phi^D_L) = -1`` where ``phi_L`` is the generic left branch
    (equivalently ``phi^D_L = phi_L zeta_L``), and likewise on the right.
    The Wronskian is sampled at ``u_max`` (or ``pi/2``) and two flanking
    points.
    """
    prob = as_problem(params, tau, config)
    lam = complex(lam)
    bl, br = prob.basis(lam, "left"), prob.basis(lam, "right")
    lo, hi = bl.matching_radius, np.pi - br.matching_radius
    grid = np.linspace(lo, hi, npts)
    um = np.pi / 2
    if prob.params is not None and abs(prob.params.omega) > 0 and lam.real > 0:
        from .potential import find_u_max
        try:
            found = find_u_max(prob.params, lam)
        except Exception:  # pragma: no cover - classification is advisory
            found = None
        if found is not None:
            um = found
    checks = np.array([um - 0.25, um, um + 0.25])
    grid = np.union1d(grid, checks)
    L = regular_solution(prob, lam, "left", grid, bl)
    R = regular_solution(prob, lam, "right", grid[::-1], br)
    for st in (R,):
        for name in ("grid", "phi", "dphi", "phi_l", "dphi_l", "logscale"):
            setattr(st, name, getattr(st, name)[::-1].copy())
    fa, fb = _dirichlet_factor(prob.a_left), -_dirichlet_factor(prob.a_right)
    for st, fac in ((L, fa), (R, fb)):
        st.phi, st.dphi, st.phi_l, st.dphi_l = (fac * x for x in (st.phi, st.dphi, st.phi_l, st.dphi_l))
    idx = np.searchsorted(grid, checks)
    ref = L.logscale[idx[1]] + R.logscale[idx[1]]
    ws = []
    for i in idx:
        w = L.dphi[i] * R.phi[i] - L.phi[i] * R.dphi[i]
        ws.append(w * math.exp(L.logscale[i] + R.logscale[i] - ref))
    ws = np.array(ws)
    i = idx[1]
    scale = _pair_scale(L.phi[i], L.dphi[i], R.phi[i], R.dphi[i], lam)
    drift = float(np.max(np.abs(ws - ws[1])) / max(abs(ws[1]), scale))
    report = WronskianReport(
        complex(ws[1] * math.exp(ref)) if abs(ref) < 700 else complex(ws[1]),
        float(grid[i]), lam, drift, complex(ws[1] / scale), tuple(ws),
    )
    return L, R, report


# ---------------------------------------------------------------------------
# lambda-derivative of the Riccati variable


def _csimpson(f, u):
    # scipy's cumulative_simpson drops imaginary parts
    from scipy.integrate import cumulative_simpson

    f = np.asarray(f)
    return (cumulative_simpson(f.real, x=u, initial=0.0)
            + 1j * cumulative_simpson(f.imag, x=u, initial=0.0))


def propagate_lambda_derivative(state: SturmLiouvilleState, y_lambda0: complex, method: str = "closed"):
    """``y_lambda`` along ``state`` given its value at ``state.grid[0]``.

    ``method="closed"`` uses the closed form
    ``y_l(u) = (y_l(u0) phi(u0)^2 - int_{u0}^u phi^2) / phi(u)^2`` with the
    stored samples (cumulative Simpson on the state grid); ``method="ode"``
    solves ``y_l' = -1 - 2 y y_l`` by the same quadrature rule applied to the
    integrating factor.  Both need a reasonably fine grid.
    """
    phi = state.true_phi()
    u = state.grid
    if method == "closed":
        integral = _csimpson(phi ** 2, u)
        return (y_lambda0 * phi[0] ** 2 - integral) / phi ** 2
    if method == "ode":
        y = state.dphi / state.phi
        g = np.exp(_csimpson(2.0 * y, u))
        return (y_lambda0 - _csimpson(g, u)) / g
    raise ValueError("method must be 'closed' or 'ode'")


def y_lambda_from_variation(problem, lam, initial, y_lambda0, u_eval, tau: float = 1.0):
    """``y_lambda`` from the variational equation with ``phi_lambda(u0) = 0``."""
    u0, phi0, dphi0 = initial
    st = integrate_sl(problem, lam, initial, u_eval=u_eval, initial_lambda=(0j, y_lambda0 * phi0), tau=tau)
    return st.y_lambda, st


# ---------------------------------------------------------------------------
# Continuation of phi^D_L across the matching point


def continue_phiDL_right(problem, lam: complex, u_hat: float, u_eval, tau: float = 1.0):
    """``phi^D_L`` on ``[u_hat, pi)`` from left data at ``u_hat`` and the right basis.

    Implements

        phi^D_L(u) = phi_R(u) * ( zeta_L(u_hat) phi_L(u_hat) / phi_R(u_hat)
                                  + zeta_R|_{u_hat}^{u} * lim phi_R / phi_L )

    with ``phi_L``, ``phi_R`` the generic branches, ``zeta_L = phi^D_L/phi_L``
    and ``zeta_R|_{u_hat}^{u} = int_{u_hat}^u phi_R^{-2}``.  The limit is
    ``phi_R(u_hat)/phi_L(u_hat) + w(phi_L, phi_R) zeta_L(u_hat)``.
    Returns ``(u, phi^D_L)``.
    """
    prob = as_problem(problem, tau)
    lam = complex(lam)
    u_eval = np.asarray(u_eval, dtype=float)
    bl, br = prob.basis(lam, "left"), prob.basis(lam, "right")
    fac = _dirichlet_factor(prob.a_left)
    epsL = bl.matching_radius
    # generic left branch phi_L and phi^D_L up to u_hat
    gL = _seed_vector(bl, epsL, "gen")
    rL = _seed_vector(bl, epsL, "reg")
    GL = integrate_sl(prob, lam, (epsL, gL[0], gL[1]), u_eval=[u_hat])
    DL = integrate_sl(prob, lam, (epsL, fac * rL[0], fac * rL[1]), u_eval=[u_hat])
    phiL, dphiL = GL.true_phi()[-1], GL.true_dphi()[-1]
    phiDL = DL.true_phi()[-1]
    zetaL = phiDL / phiL
    # generic right branch phi_R from pi - eps back to u_hat, then forward with zeta
    epsR = br.matching_radius
    gR = _seed_vector(br, np.pi - epsR, "gen")
    GR = integrate_sl(prob, lam, (np.pi - epsR, gR[0], gR[1]), u_eval=[u_hat])
    phiR, dphiR = GR.true_phi()[-1], GR.true_dphi()[-1]
    wLR = dphiL * phiR - phiL * dphiR
    limit = phiR / phiL + wLR * zetaL
    fwd = integrate_sl(prob, lam, (u_hat, phiR, dphiR), u_eval=u_eval, zeta0=0j)
    return u_eval, fwd.true_phi() * (zetaL * phiL / phiR + fwd.zeta * limit)
