"""Grid functions, a finite-difference Hamiltonian and norm estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .potential import ModeParams, eval_potential

COLLAR = 2


@dataclass
class GridFunction:
    u: np.ndarray
    w: np.ndarray
    values: np.ndarray
    _norm: float | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.u.shape != self.w.shape or self.u.shape != self.values.shape:
            raise ValueError("nodes, weights and values must have the same shape")
        if np.any(self.w <= 0):
            raise ValueError("weights must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function contains non-finite samples")

    @classmethod
    def on(cls, grid, values):
        return cls(grid.u, grid.w, values)

    def norm(self) -> float:
        if self._norm is None:
            self._norm = math.sqrt(float(np.sum(self.w * np.abs(self.values) ** 2)))
        return self._norm

    def inner(self, other: "GridFunction") -> complex:
        return complex(np.sum(self.w * np.conj(self.values) * other.values))

    def restrict(self, sl: slice) -> "GridFunction":
        return GridFunction(self.u[sl], self.w[sl], self.values[sl])

    def __add__(self, other):
        return GridFunction(self.u, self.w, self.values + other.values)

    def __sub__(self, other):
        return GridFunction(self.u, self.w, self.values - other.values)

    def __mul__(self, c):
        return GridFunction(self.u, self.w, self.values * c)

    __rmul__ = __mul__


def second_derivative_weights(u: np.ndarray) -> np.ndarray:
    """Five-point weights for ``f''`` at every node with two neighbours each side.

    Row ``i`` of the returned ``(n - 4, 5)`` array acts on ``f[i : i + 5]`` and
    gives ``f''(u[i + 2])``; exact for quartics, fourth order on smooth grids.
    """
    n = u.size
    if n < 5:
        raise ValueError("need at least five nodes")
    out = np.empty((n - 4, 5))
    p = np.arange(5)
    rhs = np.array([0.0, 0.0, 2.0, 0.0, 0.0])
    for i in range(n - 4):
        h = u[i : i + 5] - u[i + 2]
        sc = max(abs(h[0]), abs(h[-1]))
        V = (h / sc)[None, :] ** p[:, None]
        out[i] = np.linalg.solve(V, rhs) / sc ** 2
    return out


def _potential_w(params, u, tau):
    if isinstance(params, ModeParams):
        return eval_potential(params, 0.0, u, tau).w
    from .integrator import as_problem

    # synthetic coefficients or a Problem: V at lambda = 0 is W
    return as_problem(params, tau).potential(0.0, u)


def apply_H(params, lambda_shift: complex, f: GridFunction, tau: float = 1.0) -> GridFunction:
    """``-f'' + W f - lambda_shift f`` on the interior nodes.

    ``params`` is a ``ModeParams``, ``PotentialCoefficients`` or ``Problem``.
    The returned function lives on ``f.u[2:-2]``; the two-node collar at each
    end is dropped because the pole terms make pointwise values meaningless
    there.
    """
    D = second_derivative_weights(f.u)
    v = f.values
    n = v.size
    stacked = np.stack([v[j : n - 4 + j] for j in range(5)], axis=1)
    d2 = np.sum(D * stacked, axis=1)
    ui = f.u[COLLAR:-COLLAR]
    W = _potential_w(params, ui, tau)
    out = -d2 + (W - lambda_shift) * v[COLLAR:-COLLAR]
    return GridFunction(ui, f.w[COLLAR:-COLLAR], out)


def weighted(matrix: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``W^1/2 M W^-1/2``: the L2(w) operator as a Euclidean matrix."""
    s = np.sqrt(w)
    return s[:, None] * matrix / s[None, :]


def operator_norm_estimate(matrix: np.ndarray, w: np.ndarray | None = None, tol: float = 1e-8,
                           max_iter: int = 1000, seed: int = 0) -> float:
    """Largest singular value of the (optionally weighted) operator by power iteration."""
    B = np.asarray(matrix, dtype=complex)
    if w is not None:
        B = weighted(B, np.asarray(w, dtype=float))
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(B.shape[1]) + 1j * rng.standard_normal(B.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iter):
        y = B.conj().T @ (B @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        new = math.sqrt(ny)
        x = y / ny
        if abs(new - sigma) <= tol * max(new, 1e-300):
            return new
        sigma = new
    return sigma


def polynomial_bump(u, center: float = 1.3, width: float = 1.0, power: int = 6, derivative: int = 0):
    """``(1 - x^2)^p`` with ``x = (u - center)/width`` on its support, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    x = (u - center) / width
    m = np.abs(x) < 1
    out = np.zeros_like(u)
    xm, p = x[m], power
    q = 1 - xm * xm
    if derivative == 0:
        out[m] = q ** p
    elif derivative == 2:
        out[m] = (-2 * p * q ** (p - 1) + 4 * p * (p - 1) * xm * xm * q ** (p - 2)) / width ** 2
    else:
        raise ValueError("derivative must be 0 or 2")
    return out


def interior_residual(r: GridFunction, f: GridFunction) -> float:
    """``||r|| / ||f||`` with ``f`` restricted to the same interior."""
    fi = f.restrict(slice(COLLAR, -COLLAR))
    return r.norm() / fi.norm()
