"""Frobenius data at the regular singular endpoints ``u = 0`` and ``u = pi``.

Near the left pole ``u^2 V(u) = sum_j p_j u^j`` with ``p_0 = a^2 - 1/4`` and
``a = |k - s|``.  The two Frobenius branches are

    regular:  u^(1/2 + a) * sum c_n u^n,                      c_0 = 1
    generic:  u^(1/2 - a) * sum d_n u^n + kappa log(u) * regular

with ``d_0 = 1`` for ``a > 0``.  For ``a = 0`` the generic branch is
``sqrt(u) log(u) (1 + ...)``, i.e. ``d_0 = 0`` and ``kappa = 1``.  The right
pole is handled by reflecting the potential (``t = pi - u``, which amounts to
``B -> -B``, ``Q -> -Q``) and ``a -> b = |k + s|``.

All coefficients are polynomials in ``lambda``; their ``lambda``-derivatives
are propagated alongside (``d p_2 / d lambda = -1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SeriesDiverged
from .potential import ModeParams, PotentialCoefficients, coefficients_of

_NBASE = 160


def _base_series(n):
    """Taylor coefficients of sin^2, cos, u^2/sin^2 and u^2 cos/sin^2."""
    fact = np.array([math.factorial(j) for j in range(n + 1)], dtype=float)
    sin2 = np.zeros(n + 1)
    cos = np.zeros(n + 1)
    sinc = np.zeros(n + 1)
    for j in range(0, n + 1, 2):
        m = j // 2
        cos[j] = (-1) ** m / fact[j]
        if m >= 1:
            sin2[j] = (-1) ** (m + 1) * 2.0 ** (2 * m - 1) / fact[j]
        if j + 1 <= n:
            sinc[j] = (-1) ** m / math.factorial(j + 1)
    sinc2 = np.convolve(sinc, sinc)[: n + 1]
    inv = np.zeros(n + 1)
    inv[0] = 1.0 / sinc2[0]
    for j in range(1, n + 1):
        inv[j] = -np.dot(sinc2[1 : j + 1], inv[j - 1 :: -1][:j]) / sinc2[0]
    icos = np.convolve(inv, cos)[: n + 1]
    return sin2, cos, inv, icos


_SIN2, _COS, _ISIN2, _ICOS = _base_series(_NBASE)


def laurent_coefficients(coef: PotentialCoefficients, lam: complex, order: int) -> np.ndarray:
    """Coefficients ``p_0..p_order`` of ``u^2 V(u)`` at ``u = 0``."""
    if order > _NBASE:
        raise ValueError(f"order {order} exceeds the tabulated base series")
    n = order + 1
    p = np.zeros(n, dtype=np.complex128)
    smooth = complex(coef.A) * _SIN2[:n] + complex(coef.B) * _COS[:n]
    smooth[0] += complex(coef.C) - lam
    p[2:] = smooth[: n - 2]
    p += coef.P * _ISIN2[:n] + coef.Q * _ICOS[:n]
    return p


@njit(cache=True, nogil=True)
def _recurrences(p, a, nmax):
    c = np.zeros(nmax + 1, dtype=np.complex128)
    dc = np.zeros(nmax + 1, dtype=np.complex128)
    d = np.zeros(nmax + 1, dtype=np.complex128)
    dd = np.zeros(nmax + 1, dtype=np.complex128)
    c[0] = 1.0
    for n in range(1, nmax + 1):
        acc = 0j
        dacc = 0j
        for j in range(1, n + 1):
            acc += p[j] * c[n - j]
            dacc += p[j] * dc[n - j]
        if n >= 2:
            dacc -= c[n - 2]
        c[n] = acc / (n * (n + 2 * a))
        dc[n] = dacc / (n * (n + 2 * a))
    kappa = 0j
    dkappa = 0j
    if a == 0:
        kappa = 1.0
        for n in range(1, nmax + 1):
            acc = 0j
            dacc = 0j
            for j in range(1, n + 1):
                acc += p[j] * d[n - j]
                dacc += p[j] * dd[n - j]
            if n >= 2:
                dacc -= d[n - 2]
            d[n] = (acc - 2.0 * n * c[n]) / (n * n)
            dd[n] = (dacc - 2.0 * n * dc[n]) / (n * n)
    else:
        d[0] = 1.0
        for n in range(1, nmax + 1):
            acc = 0j
            dacc = 0j
            for j in range(1, n + 1):
                acc += p[j] * d[n - j]
                dacc += p[j] * dd[n - j]
            if n >= 2:
                dacc -= d[n - 2]
            if n == 2 * a:
                kappa = acc / (2.0 * a)
                dkappa = dacc / (2.0 * a)
                d[n] = 0.0
                dd[n] = 0.0
            else:
                m = n - 2 * a
                lc = 0j
                dlc = 0j
                if m >= 0:
                    lc = (2.0 * n - 2.0 * a) * kappa * c[m]
                    dlc = (2.0 * n - 2.0 * a) * (dkappa * c[m] + kappa * dc[m])
                d[n] = (acc - lc) / (n * (n - 2 * a))
                dd[n] = (dacc - dlc) / (n * (n - 2 * a))
    return c, dc, d, dd, kappa, dkappa


@dataclass(frozen=True)
class EndpointBasis:
    """Frobenius coefficients of both branches at one pole.

    Values returned by :meth:`evaluate` are in the local variable ``t``
    (``t = u`` on the left, ``t = pi - u`` on the right); use
    :meth:`values_u` for ``u``-derivatives.
    """

    side: str
    a: int
    exponent_plus: float
    exponent_minus: float
    logarithmic: bool
    c: np.ndarray
    dc: np.ndarray
    d: np.ndarray
    dd: np.ndarray
    kappa: complex
    dkappa: complex
    matching_radius: float
    order: int

    def evaluate(self, t):
        """Return arrays ``(reg, reg_t, gen, gen_t, reg_l, reg_lt, gen_l, gen_lt)``.

        The ``_l`` entries are ``lambda``-derivatives.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        n = np.arange(self.order + 1)
        tp = t[:, None] ** n[None, :]
        a = self.a
        hp = t ** (0.5 + a)
        hm = t ** (0.5 - a)
        lt = np.log(t)

        def branch(coef, expo, base):
            s = tp @ coef
            ds = (tp @ (coef * (n + expo))) / t
            return base * s, base * ds

        reg, reg_t = branch(self.c, 0.5 + a, hp)
        reg_l, reg_lt = branch(self.dc, 0.5 + a, hp)
        g0, g0_t = branch(self.d, 0.5 - a, hm)
        g0l, g0l_t = branch(self.dd, 0.5 - a, hm)
        k, dk = self.kappa, self.dkappa
        gen = g0 + k * lt * reg
        gen_t = g0_t + k * (reg / t + lt * reg_t)
        gen_l = g0l + dk * lt * reg + k * lt * reg_l
        gen_lt = g0l_t + dk * (reg / t + lt * reg_t) + k * (reg_l / t + lt * reg_lt)
        return reg, reg_t, gen, gen_t, reg_l, reg_lt, gen_l, gen_lt

    def values_u(self, u):
        """Same as :meth:`evaluate` but at ``u`` and with ``u``-derivatives."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.side == "left":
            return self.evaluate(u)
        out = list(self.evaluate(np.pi - u))
        for i in (1, 3, 5, 7):
            out[i] = -out[i]
        return tuple(out)

    @property
    def wronskian_reg_gen(self) -> float:
        """``w(reg, gen) = reg' gen - reg gen'`` in the local variable."""
        return 2.0 * self.a if self.a > 0 else -1.0


def indicial_exponents(params: ModeParams, side: str):
    """``(1/2 + a, 1/2 - a, a == 0)`` with ``a = |k -+ s|``."""
    a = _order(params, side)
    return 0.5 + a, 0.5 - a, a == 0


def _order(params, side):
    if side == "left":
        return params.a_left
    if side == "right":
        return params.a_right
    raise ValueError("side must be 'left' or 'right'")


def default_radius(mu: complex, eps_max: float = 0.05, eps_mu: float = 0.5) -> float:
    return min(eps_max, eps_mu / math.sqrt(max(abs(mu), 1e-300)))


def endpoint_basis(
    params: ModeParams,
    lam: complex,
    side: str,
    eps: float | None = None,
    tau: float = 1.0,
    series_tol: float = 1e-12,
    max_order: int = 120,
    coef: PotentialCoefficients | None = None,
    a: int | None = None,
) -> EndpointBasis:
    """Series data at ``side`` with an automatically validated matching radius.

    ``coef``/``a`` override the physical potential (used for synthetic tests).
    """
    if coef is None:
        coef = coefficients_of(params, tau)
    if a is None:
        a = _order(params, side)
    if side == "right":
        coef = coef.reflected()
    lam = complex(lam)
    mu = lam - complex(coef.C)
    if eps is None:
        eps = default_radius(mu)
    order = min(max_order, _NBASE)
    p = laurent_coefficients(coef, lam, order)
    c, dc, d, dd, kappa, dkappa = _recurrences(p, a, order)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(d))):
        raise SeriesDiverged("non-finite Frobenius coefficients")
    n = np.arange(order + 1)
    for _ in range(40):
        mag_c = np.abs(c) * eps ** n
        mag_d = np.abs(d) * eps ** n
        mag = np.maximum(mag_c, mag_d / max(1.0, abs(d[0]) if a > 0 else 1.0))
        tail = mag[-4:].max() / max(mag.max(), 1e-300)
        if tail < series_tol * 1e-3:
            cut = np.nonzero(mag > series_tol * 1e-4 * mag.max())[0]
            used = int(min(order, max(cut.max() + 4, 2 * a + 2)))
            break
        eps *= 0.5
    else:
        raise SeriesDiverged("Frobenius series did not converge for any matching radius")
    return EndpointBasis(
        side, a, 0.5 + a, 0.5 - a, a == 0,
        c[: used + 1], dc[: used + 1], d[: used + 1], dd[: used + 1],
        complex(kappa), complex(dkappa), float(eps), used,
    )


def seed_regular_solution(params, lam, side, eps=None, **kw):
    """``(phi(eps), phi'(eps))`` of the branch obeying the boundary condition.

    The point is ``u = eps`` on the left and ``u = pi - eps`` on the right;
    derivatives are with respect to ``u``.
    """
    b = endpoint_basis(params, lam, side, eps=eps, **kw)
    u = b.matching_radius if side == "left" else np.pi - b.matching_radius
    v = b.values_u(u)
    return complex(v[0][0]), complex(v[1][0])


def seed_generic_solution(params, lam, side, eps=None, **kw):
    """Value and ``u``-derivative of the second Frobenius branch."""
    b = endpoint_basis(params, lam, side, eps=eps, **kw)
    u = b.matching_radius if side == "left" else np.pi - b.matching_radius
    v = b.values_u(u)
    return complex(v[2][0]), complex(v[3][0])
