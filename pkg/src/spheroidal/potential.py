"""Complex potential of the spin-weighted spheroidal Sturm-Liouville problem.

With ``phi = sqrt(sin u) * Theta`` the angular equation becomes
``-phi'' + V phi = 0`` on ``(0, pi)`` with

    W(u) = A sin^2 u + B cos u + C + P / sin^2 u + Q cos u / sin^2 u
    V(u) = W(u) - lambda

where ``A = Omega^2``, ``B = -2 s Omega``, ``C = 2 Omega k - s^2 - 1/4``,
``P = k^2 + s^2 - 1/4`` and ``Q = -2 s k``.  The pole coefficients ``P`` and
``Q`` are always real, so the imaginary part of ``W`` is a smooth function.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ParameterError

log = logging.getLogger(__name__)


def _is_integer(x: float, tol: float = 1e-12) -> bool:
    return abs(x - round(x)) < tol


@dataclass(frozen=True)
class ModeParams:
    """Parameters ``(s, k, Omega)`` fixing one operator of the family.

    ``strip_c`` is the bound ``c`` on ``|Im Omega|`` defining the admissible
    strip; it also enters the default a-priori bound on ``Im lambda``.
    """

    s: float
    k: float
    omega: complex = 0j
    strip_c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "omega", complex(self.omega))
        object.__setattr__(self, "strip_c", float(self.strip_c))
        if self.s < 0 or not _is_integer(2 * self.s):
            raise ParameterError(f"2s must be a non-negative integer, got s={self.s}")
        if not _is_integer(self.k - self.s):
            raise ParameterError(f"k - s must be an integer, got k={self.k}, s={self.s}")
        if self.strip_c <= 0:
            raise ParameterError("strip_c must be positive")
        if not abs(self.omega.imag) < self.strip_c:
            raise ParameterError(
                f"|Im Omega| = {abs(self.omega.imag)} violates the strip bound c = {self.strip_c}"
            )

    @property
    def a_left(self) -> int:
        """``|k - s|``, the Frobenius order at ``u = 0``."""
        return int(round(abs(self.k - self.s)))

    @property
    def a_right(self) -> int:
        """``|k + s|``, the Frobenius order at ``u = pi``."""
        return int(round(abs(self.k + self.s)))

    def conjugate(self) -> "ModeParams":
        return replace(self, omega=self.omega.conjugate())

    def flipped(self) -> "ModeParams":
        """The parameters ``(-Omega, -k)``, which give the same potential."""
        return replace(self, omega=-self.omega, k=-self.k)

    def reflected(self) -> "ModeParams":
        """Parameters whose potential is ``V(pi - u)`` (``s -> -s``).

        The result may have negative ``s`` and is only used internally for
        series expansions at the right pole, so validation is bypassed.
        """
        obj = object.__new__(ModeParams)
        object.__setattr__(obj, "s", -self.s)
        object.__setattr__(obj, "k", self.k)
        object.__setattr__(obj, "omega", self.omega)
        object.__setattr__(obj, "strip_c", self.strip_c)
        return obj


@dataclass(frozen=True)
class PotentialCoefficients:
    """Coefficients of ``W = A sin^2 + B cos + C + P/sin^2 + Q cos/sin^2``.

    Also used for synthetic potentials in tests (e.g. ``C`` only gives a
    constant potential).
    """

    A: complex = 0j
    B: complex = 0j
    C: complex = 0j
    P: float = 0.0
    Q: float = 0.0

    @classmethod
    def from_params(cls, params: ModeParams, tau: float = 1.0) -> "PotentialCoefficients":
        om, s, k = params.omega, params.s, params.k
        A = om * om
        B = -2.0 * s * om
        C = 2.0 * om * k - s * s - 0.25
        coeffs = cls(A, B, C, k * k + s * s - 0.25, -2.0 * s * k)
        if tau != 1.0:
            coeffs = coeffs.deformed(tau)
        return coeffs

    @classmethod
    def constant(cls, value: complex) -> "PotentialCoefficients":
        return cls(C=complex(value))

    def deformed(self, tau: float) -> "PotentialCoefficients":
        """``Re W + i tau Im W``; only the smooth coefficients are complex."""

        def d(z):
            z = complex(z)
            return complex(z.real, tau * z.imag)

        return replace(self, A=d(self.A), B=d(self.B), C=d(self.C))

    def reflected(self) -> "PotentialCoefficients":
        """Coefficients of ``W(pi - u)``."""
        return replace(self, B=-complex(self.B), Q=-self.Q)

    def as_array(self, lam: complex) -> np.ndarray:
        """Packed form consumed by the compiled integrator."""
        return np.array(
            [self.A, self.B, self.C, self.P, self.Q, lam], dtype=np.complex128
        )

    @property
    def is_real(self) -> bool:
        return complex(self.A).imag == 0 and complex(self.B).imag == 0 and complex(self.C).imag == 0


def coefficients_of(params, tau: float = 1.0) -> PotentialCoefficients:
    if isinstance(params, PotentialCoefficients):
        return params.deformed(tau) if tau != 1.0 else params
    return PotentialCoefficients.from_params(params, tau)


def mu_of(params: ModeParams, lam: complex) -> complex:
    return lam - 2.0 * params.omega * params.k + params.s ** 2 + 0.25


class PotentialValue(NamedTuple):
    v: complex
    w: complex
    dv: complex
    d2v: complex
    mu: complex


def _w_and_derivatives(c: PotentialCoefficients, u):
    sn, cs = np.sin(u), np.cos(u)
    s2 = sn * sn
    w = c.A * s2 + c.B * cs + c.C + c.P / s2 + c.Q * cs / s2
    dw = (
        c.A * 2.0 * sn * cs
        - c.B * sn
        - 2.0 * c.P * cs / (s2 * sn)
        - c.Q * (1.0 / sn + 2.0 * cs * cs / (s2 * sn))
    )
    d2w = (
        c.A * 2.0 * np.cos(2.0 * u)
        - c.B * cs
        + c.P * (2.0 / s2 + 6.0 * cs * cs / (s2 * s2))
        + c.Q * (5.0 * cs / s2 + 6.0 * cs ** 3 / (s2 * s2))
    )
    return w, dw, d2w


def _check_domain(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= np.pi):
        raise DomainError("u must lie in the open interval (0, pi)")


def eval_potential(params: ModeParams, lam: complex, u, tau: float = 1.0) -> PotentialValue:
    """``V``, ``W``, ``V'``, ``V''`` and ``mu`` at ``u`` (scalar or array)."""
    _check_domain(u)
    c = coefficients_of(params, tau)
    w, dw, d2w = _w_and_derivatives(c, u)
    mu = mu_of(params, lam) if isinstance(params, ModeParams) else lam - complex(c.C)
    return PotentialValue(w - lam, w, dw, d2w, mu)


def homotopy_potential(params: ModeParams, lam: complex, tau: float, u) -> complex:
    """``Re V + i tau Im V`` for the deformation parameter ``tau``.

    Eigenvalue tracking uses :meth:`PotentialCoefficients.deformed` instead,
    which deforms only ``W`` and keeps ``lambda`` out of the real/imaginary
    split; the two agree whenever ``lambda`` is real.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    v = eval_potential(params, lam, u).v
    return np.real(v) + 1j * tau * np.imag(v)


class PoleExpansion(NamedTuple):
    leading: float
    constant: complex


def pole_expansion(params: ModeParams, lam: complex, side: str) -> PoleExpansion:
    """Coefficient of the ``1/u^2`` pole and the constant ``-mu``.

    The ``Omega^2 u^2`` and ``O(Omega)`` pieces are not part of the result;
    the full Laurent series is available from
    :func:`spheroidal.boundary.laurent_coefficients`.
    """
    if side == "left":
        lead = (params.k - params.s) ** 2 - 0.25
    elif side == "right":
        lead = (params.k + params.s) ** 2 - 0.25
    else:
        raise ValueError("side must be 'left' or 'right'")
    return PoleExpansion(lead, -mu_of(params, lam))


@dataclass
class RegionLayout:
    case_tag: str
    u_ell: float
    u_r: float
    u_max: float
    u_plus: float | None = None
    u_ell_right: float | None = None
    u_r_right: float | None = None
    u_plus_right: float | None = None
    re_v_max: float = float("nan")
    threshold: float = float("nan")
    degenerate: bool = False
    notes: list = field(default_factory=list)


CASES = ("WKB", "ParabolicCylinder", "Airy")


def _re_v(params, lam, u):
    return float(np.real(eval_potential(params, lam, u).v))


def _re_dv(params, lam, u):
    return float(np.real(eval_potential(params, lam, u).dv))


def _root(f, a, b, xtol=1e-12):
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        return None
    return brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)


def find_u_max(params: ModeParams, lam: complex) -> float | None:
    """Interior maximum of ``Re V`` on ``[pi/3, 2 pi/3]``, or None."""
    a, b = np.pi / 3, 2 * np.pi / 3
    u = _root(lambda x: _re_dv(params, lam, x), a, b)
    if u is None:
        return None
    if np.real(eval_potential(params, lam, u).d2v) >= 0:
        return None
    return u


def classify_regions(
    params: ModeParams,
    lam: complex,
    nu_hat: float = 1.0,
    c5: float = 1.0,
) -> RegionLayout:
    """Case tag and region boundaries of the double-well potential.

    ``nu_hat`` replaces the large proof constant of the case distinction
    (``Re V(u_max)`` compared against ``nu_hat * |Omega|``).  A layout with
    ``degenerate=True`` is returned when ``Re V`` has no concave interior
    maximum (for instance at ``Omega = 0``); it collapses to one WKB region.
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise ValueError("classify_regions requires Re lambda > 0")
    om = abs(params.omega)
    u_max = find_u_max(params, lam) if om > 0 else None
    if u_max is not None and np.real(eval_potential(params, lam, u_max).d2v) > -0.25 * om ** 2:
        u_max = None
    u_ell = nu_hat / np.sqrt(lam.real)
    if u_max is None:
        log.info("degenerate region layout: no concave maximum of Re V")
        mid = np.pi / 2
        return RegionLayout(
            "WKB", min(u_ell, mid / 2), mid, mid,
            u_ell_right=np.pi - min(u_ell, mid / 2), u_r_right=mid,
            degenerate=True, notes=["no interior maximum of Re V; single WKB region"],
        )

    re_vmax = _re_v(params, lam, u_max)
    thr = nu_hat * om
    if re_vmax < -thr:
        tag = "WKB"
    elif re_vmax < thr:
        tag = "ParabolicCylinder"
    else:
        tag = "Airy"

    notes = []
    f = lambda target: (lambda x: _re_v(params, lam, x) - target)
    u_plus = u_plus_r = None
    if tag == "WKB":
        u_r, u_r_right = u_max, u_max
    elif tag == "ParabolicCylinder":
        u_r = _root(f(-thr), np.pi / 3, u_max)
        u_r_right = _root(f(-thr), u_max, 2 * np.pi / 3)
        if u_r is None or u_r_right is None:
            notes.append("parabolic-cylinder boundary outside [pi/3, 2pi/3]; using u_max")
            u_r = u_r if u_r is not None else u_max
            u_r_right = u_r_right if u_r_right is not None else u_max
    else:
        nu = min(
            0.25 * (c5 ** 2 * om ** 2 * lam.real) ** (1 / 3),
            0.5 * (nu_hat ** 2 * om ** 2 * re_vmax) ** (1 / 3),
        )
        lo = max(np.sqrt(lam.real) / (2 * om), 1e-8)
        hi = min(u_max, 4 * np.sqrt(lam.real) / om)
        u_r = _root(f(-nu), lo, hi)
        u_plus = _root(f(nu), lo, hi)
        if u_r is None or u_plus is None:
            notes.append("Airy bracket violated; searching (0, u_max)")
            grid = np.linspace(1e-6, u_max, 400)
            vals = np.array([_re_v(params, lam, x) for x in grid])
            u_r = _first_crossing(grid, vals, -nu, params, lam) or u_max
            u_plus = _first_crossing(grid, vals, nu, params, lam) or u_max
        rgrid = np.linspace(np.pi - 1e-6, u_max, 400)
        rvals = np.array([_re_v(params, lam, x) for x in rgrid])
        u_r_right = _first_crossing(rgrid, rvals, -nu, params, lam) or u_max
        u_plus_r = _first_crossing(rgrid, rvals, nu, params, lam) or u_max

    if u_ell >= u_r:
        notes.append("pole region reaches the WKB boundary; u_ell clipped to u_r/2")
        u_ell = u_r / 2
    u_ell_right = np.pi - min(nu_hat / np.sqrt(lam.real), (np.pi - u_r_right) / 2)
    return RegionLayout(
        tag, u_ell, u_r, u_max, u_plus,
        u_ell_right, u_r_right, u_plus_r,
        re_v_max=re_vmax, threshold=thr, notes=notes,
    )


def _first_crossing(grid, vals, target, params, lam):
    d = vals - target
    idx = np.nonzero(np.sign(d[:-1]) != np.sign(d[1:]))[0]
    if idx.size == 0:
        return None
    i = idx[-1] if grid[0] < grid[-1] else idx[-1]
    a, b = sorted((grid[i], grid[i + 1]))
    return _root(lambda x: _re_v(params, lam, x) - target, a, b)
