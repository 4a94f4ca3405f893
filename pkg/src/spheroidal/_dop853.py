"""Compiled DOP853 stepper for the Sturm-Liouville system.

State layout (complex):
    0 phi, 1 phi', 2 d phi / d lambda, 3 (d phi / d lambda)',
    4 scaled zeta (running integral of 1/phi^2), 5 angle (real part used)

Components 4 and 5 are switched on by flags.  ``use_theta = 1`` integrates
``Im phi'/phi``; ``use_theta = 2`` instead accumulates the change of ``arg phi``
over each accepted step, taken in ``[-pi/2, 3pi/2)``.  The second mode is for
real ``lambda``, where the angle never decreases: a near-zero of ``phi``
narrower than any step then still adds its half turn.  The potential is described by
``coef = [A, B, C, P, Q, lambda]``.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dc

NVAR = 6
_A = np.ascontiguousarray(_dc.A[:12, :12]).astype(np.float64)
_B = np.ascontiguousarray(_dc.B).astype(np.float64)
_C = np.ascontiguousarray(_dc.C[:12]).astype(np.float64)
_E3 = np.ascontiguousarray(_dc.E3).astype(np.float64)
_E5 = np.ascontiguousarray(_dc.E5).astype(np.float64)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BIG = 1e150
SMALL = 1e-150

OK = 0
STEP_UNDERFLOW = 1
TOO_MANY_STEPS = 2
NON_FINITE = 3


@njit(cache=True, nogil=True)
def potential(u, coef):
    sn = np.sin(u)
    cs = np.cos(u)
    s2 = sn * sn
    v = coef[0] * s2 + coef[1] * cs + coef[2] - coef[5]
    if coef[3] != 0.0 or coef[4] != 0.0:
        v += (coef[3] + coef[4] * cs) / s2
    return v


@njit(cache=True, nogil=True)
def rhs(u, y, coef, use_zeta, use_theta, out):
    v = potential(u, coef)
    out[0] = y[1]
    out[1] = v * y[0]
    out[2] = y[3]
    out[3] = v * y[2] - y[0]
    if use_zeta:
        out[4] = 1.0 / (y[0] * y[0])
    else:
        out[4] = 0.0
    if use_theta == 1:
        out[5] = (y[1] / y[0]).imag
    else:
        out[5] = 0.0


@njit(cache=True, nogil=True)
def _norm(x, scale):
    s = 0.0
    for i in range(x.shape[0]):
        r = abs(x[i]) / scale[i]
        s += r * r
    return np.sqrt(s / x.shape[0])


@njit(cache=True, nogil=True)
def _initial_step(u0, y0, f0, coef, direction, rtol, atol, use_zeta, use_theta, span):
    n = y0.shape[0]
    scale = np.empty(n)
    for i in range(n):
        scale[i] = atol + abs(y0[i]) * rtol
    d0 = _norm(y0, scale)
    d1 = _norm(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * direction * f0
    f1 = np.empty(n, dtype=np.complex128)
    rhs(u0 + h0 * direction, y1, coef, use_zeta, use_theta, f1)
    d2 = _norm(f1 - f0, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100 * h0, h1, span)


@njit(cache=True, nogil=True)
def integrate(coef, u0, y0, u_eval, rtol, atol, use_zeta, use_theta, max_steps):
    """Integrate from ``u0`` through the monotone points ``u_eval``.

    Returns ``(Y, logscale, status, nsteps)`` with ``Y[i]`` the stored state at
    ``u_eval[i]``; the true ``phi``-components equal ``Y * exp(logscale)`` and
    the true zeta equals ``Y[:, 4] * exp(-2 logscale)``.
    """
    n = NVAR
    m = u_eval.shape[0]
    Y = np.zeros((m, n), dtype=np.complex128)
    L = np.zeros(m)
    if m == 0:
        return Y, L, OK, 0
    u_end = u_eval[m - 1]
    direction = 1.0 if u_end >= u0 else -1.0
    y = y0.copy()
    t = u0
    logscale = 0.0
    idx = 0
    while idx < m and (u_eval[idx] - t) * direction <= 0.0:
        Y[idx, :] = y
        L[idx] = logscale
        idx += 1
    if idx == m:
        return Y, L, OK, 0

    K = np.zeros((13, n), dtype=np.complex128)
    f = np.empty(n, dtype=np.complex128)
    rhs(t, y, coef, use_zeta, use_theta, f)
    h_abs = _initial_step(t, y, f, coef, direction, rtol, atol, use_zeta, use_theta, abs(u_end - t))
    ynew = np.empty(n, dtype=np.complex128)
    ytmp = np.empty(n, dtype=np.complex128)
    fnew = np.empty(n, dtype=np.complex128)
    scale = np.empty(n)
    nsteps = 0
    rejected = False
    while idx < m:
        if nsteps >= max_steps:
            return Y, L, TOO_MANY_STEPS, nsteps
        min_step = 1e-14 * max(1.0, abs(t))
        if h_abs < min_step:
            return Y, L, STEP_UNDERFLOW, nsteps
        target = u_eval[idx]
        h = h_abs * direction
        hit = False
        if (t + h - target) * direction >= 0.0:
            h = target - t
            hit = True
        # stages
        for i in range(n):
            K[0, i] = f[i]
        for s in range(1, 12):
            for i in range(n):
                acc = 0j
                for j in range(s):
                    acc += _A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            rhs(t + _C[s] * h, ytmp, coef, use_zeta, use_theta, fnew)
            for i in range(n):
                K[s, i] = fnew[i]
        for i in range(n):
            acc = 0j
            for j in range(12):
                acc += _B[j] * K[j, i]
            ynew[i] = y[i] + h * acc
        rhs(t + h, ynew, coef, use_zeta, use_theta, fnew)
        for i in range(n):
            K[12, i] = fnew[i]
        e5 = 0.0
        e3 = 0.0
        finite = True
        for i in range(n):
            scale[i] = atol + max(abs(y[i]), abs(ynew[i])) * rtol
            a5 = 0j
            a3 = 0j
            for j in range(13):
                a5 += _E5[j] * K[j, i]
                a3 += _E3[j] * K[j, i]
            r5 = abs(a5) / scale[i]
            r3 = abs(a3) / scale[i]
            e5 += r5 * r5
            e3 += r3 * r3
            if not (np.isfinite(ynew[i].real) and np.isfinite(ynew[i].imag)):
                finite = False
        if not finite:
            h_abs *= 0.25
            rejected = True
            continue
        if e5 == 0.0 and e3 == 0.0:
            err = 0.0
        else:
            denom = e5 + 0.01 * e3
            err = abs(h) * e5 / np.sqrt(denom * n)
        if err < 1.0:
            if err == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * err ** (-1.0 / 8.0))
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            nsteps += 1
            t = target if hit else t + h
            if use_theta == 2:
                q = ynew[0] / y[0]
                d = np.arctan2(q.imag, q.real)
                if d < -0.5 * np.pi:
                    d += 2.0 * np.pi
                ynew[5] = y[5] + d
            for i in range(n):
                y[i] = ynew[i]
                f[i] = fnew[i]
            big = max(abs(y[0]), abs(y[1]))
            if big > BIG or (big < SMALL and big > 0.0):
                for i in range(4):
                    y[i] /= big
                    f[i] /= big
                y[4] *= big * big
                f[4] *= big * big
                logscale += np.log(big)
            if not hit:
                h_abs = abs(h) * factor
            else:
                h_abs = max(h_abs, abs(h) * factor)
            while idx < m and (u_eval[idx] - t) * direction <= 0.0:
                for i in range(n):
                    Y[idx, i] = y[i]
                L[idx] = logscale
                idx += 1
        else:
            factor = max(MIN_FACTOR, SAFETY * err ** (-1.0 / 8.0))
            h_abs = abs(h) * factor
            rejected = True
    return Y, L, OK, nsteps
