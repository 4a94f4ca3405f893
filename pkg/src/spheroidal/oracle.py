"""Reference spectra from a dense Galerkin matrix in the spherical eigenbasis.

In ``x = cos u`` the angular operator acting on ``Theta = phi / sqrt(sin u)`` is

    A Theta = -((1 - x^2) Theta')' + [(k - s x)^2 / (1 - x^2) + Omega^2 (1 - x^2)
              - 2 s Omega x + 2 Omega k] Theta

and at ``Omega = 0`` its eigenfunctions are
``(1 - x)^(alpha/2) (1 + x)^(beta/2) P_n^(alpha, beta)(x)`` with
``alpha = |k - s|``, ``beta = |k + s|``.  All weak-form integrands are
polynomials in ``x``, so Gauss-Legendre quadrature with enough nodes is exact.
Nothing here shares code with the shooting method.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, eigh
from scipy.special import eval_jacobi

from .potential import ModeParams


@dataclass
class DiscreteOperator:
    params: ModeParams
    dimension: int
    matrix: np.ndarray
    basis: str = "recursion_in_spherical_basis"
    metadata: dict = field(default_factory=dict)


def _basis(n_dim, alpha, beta, x):
    """Values and derivatives of the unnormalised basis at nodes ``x``.

    The derivative is returned in factored form
    ``Theta_n' = (1-x)^(alpha/2 - 1) (1+x)^(beta/2 - 1) R_n``.
    """
    P = np.empty((n_dim, x.size))
    dP = np.empty((n_dim, x.size))
    for n in range(n_dim):
        P[n] = eval_jacobi(n, alpha, beta, x)
        # d/dx P_n^(a,b) = (n + a + b + 1)/2 P_{n-1}^(a+1, b+1)
        dP[n] = 0.0 if n == 0 else 0.5 * (n + alpha + beta + 1) * eval_jacobi(n - 1, alpha + 1, beta + 1, x)
    R = -0.5 * alpha * (1 + x) * P + 0.5 * beta * (1 - x) * P + (1 - x * x) * dP
    return P, R


def discretize(params: ModeParams, dimension: int) -> DiscreteOperator:
    """Galerkin matrix of ``A`` in the orthonormalised spherical basis."""
    if dimension < 16:
        raise ValueError("dimension must be at least 16")
    s, k, om = params.s, params.k, params.omega
    alpha, beta = abs(k - s), abs(k + s)
    nq = dimension + int(alpha + beta) + 16
    x, w = np.polynomial.legendre.leggauss(nq)
    P, R = _basis(dimension, alpha, beta, x)
    weight = (1 - x) ** alpha * (1 + x) ** beta
    dweight = (1 - x) ** (alpha - 1) * (1 + x) ** (beta - 1)
    gram = np.einsum("q,iq,jq->ij", w * weight, P, P)
    norm = 1.0 / np.sqrt(np.diag(gram))
    stiff = np.einsum("q,iq,jq->ij", w * dweight, R, R)
    cent = np.einsum("q,iq,jq->ij", w * weight * (k - s * x) ** 2 / (1 - x * x), P, P)
    sin2 = np.einsum("q,iq,jq->ij", w * weight * (1 - x * x), P, P)
    cosm = np.einsum("q,iq,jq->ij", w * weight * x, P, P)
    H = (stiff + cent).astype(complex) + om * om * sin2 - 2 * s * om * cosm
    H = norm[:, None] * H * norm[None, :] + 2 * om * k * np.eye(dimension)
    return DiscreteOperator(params, dimension, H, metadata={"alpha": alpha, "beta": beta, "quadrature": nq})


def _eigvals(op: DiscreteOperator):
    H = op.matrix
    if op.params.omega.imag == 0:
        return np.sort(eigh(H.real, eigvals_only=True)).astype(complex)
    vals = eig(H, right=False)
    return vals[np.lexsort((vals.imag, vals.real))]


@dataclass
class OracleValue:
    lam: complex
    converged: bool
    drift: float


def oracle_spectrum(op: DiscreteOperator, count: int) -> list[OracleValue]:
    """Lowest ``count`` eigenvalues (by real part) with a dimension-doubling check."""
    if count > op.dimension // 3:
        raise ValueError("count must not exceed dimension / 3")
    a = _eigvals(op)[:count]
    b = _eigvals(discretize(op.params, 2 * op.dimension))
    out = []
    for lam in a:
        d = float(np.min(np.abs(b - lam)))
        out.append(OracleValue(complex(lam), d < 1e-7, d))
    return out


def reference_spectrum(params: ModeParams, count: int, dimension: int | None = None) -> np.ndarray:
    """Convenience wrapper returning converged eigenvalues as an array."""
    dim = dimension or max(48, 3 * count + 24)
    vals = oracle_spectrum(discretize(params, dim), count)
    return np.array([v.lam for v in vals])


def reference_potential(params: ModeParams, lam: complex, u):
    """Second, independent evaluation of ``V`` via ``U - 1/4 - 1/(4 sin^2 u)``.

    ``U`` is the potential of the angular operator in the ``Theta`` picture.
    """
    s, k, om = params.s, params.k, params.omega
    u = np.asarray(u, dtype=float)
    x = np.cos(u)
    sn2 = 1 - x * x
    U = om ** 2 * sn2 - 2 * s * om * x + 2 * om * k + (k - s * x) ** 2 / sn2
    return U - 0.25 - 0.25 / sn2 - lam


def legendre_eigenvalues(count: int, k: int = 0) -> np.ndarray:
    """``l (l + 1)`` for ``l = |k|, |k| + 1, ...`` (spherical case, ``s = 0``)."""
    l0 = abs(int(k))
    return np.array([float(l * (l + 1)) for l in range(l0, l0 + count)])
