"""Green's kernel, Riesz projectors by contour quadrature, Jordan lengths, completeness."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, SolverConfig
from .diagnostics import operator_norm_estimate, polynomial_bump, weighted
from .errors import ContourThroughSpectrum, NearSpectrum, RankAmbiguous
from .grid import (QuadratureGrid, dirichlet_on_grid, green_matrix, mapped_gauss_legendre,
                   resolvent_operator)
from .integrator import as_problem, wronskian
from .potential import eval_potential


def _grid(spec, config: SolverConfig) -> QuadratureGrid:
    if spec is None:
        return mapped_gauss_legendre(config.grid)
    if isinstance(spec, QuadratureGrid):
        return spec
    return mapped_gauss_legendre(int(spec))


# ---------------------------------------------------------------------------
# Green's kernel


@dataclass
class GreensKernel:
    """``kernel`` holds pointwise values ``s(u_i, u_j)``; ``operator`` the
    product-integration matrix that applies ``(H - lambda)^-1`` to samples."""

    lam: complex
    grid: QuadratureGrid
    kernel: np.ndarray
    operator: np.ndarray
    wronskian: complex
    normalized_wronskian: complex

    def apply(self, f) -> np.ndarray:
        return self.operator @ np.asarray(f, dtype=complex)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.kernel - self.kernel.T)))

    def norm(self) -> float:
        return operator_norm_estimate(self.operator, self.grid.w)


def greens_kernel(params, lam: complex, grid_spec=None, tau: float = 1.0, config: SolverConfig | None = None,
                  pointwise: bool = True) -> GreensKernel:
    prob = as_problem(params, tau, config)
    cfg = prob.config
    grid = _grid(grid_spec, cfg)
    samples = dirichlet_on_grid(prob, lam, grid, near_tol=cfg.accept_tol)
    K = green_matrix(samples) if pointwise else np.empty((0, 0))
    return GreensKernel(complex(lam), grid, K, resolvent_operator(samples), samples.wronskian, samples.normalized_w)


def resolvent_residual(params, lam: complex, grid_spec=None, tau: float = 1.0, config: SolverConfig | None = None,
                       center: float = 1.3, width: float = 1.0) -> float:
    """``||s_lambda (H - lambda) g - g|| / ||g||`` for a polynomial bump ``g``."""
    gk = greens_kernel(params, lam, grid_spec, tau, config, pointwise=False)
    u = gk.grid.u
    g = polynomial_bump(u, center, width)
    f = -polynomial_bump(u, center, width, derivative=2) + eval_potential(params, lam, u, tau).v * g
    return gk.grid.norm(gk.apply(f) - g) / gk.grid.norm(g)


# ---------------------------------------------------------------------------
# Contours


@dataclass(frozen=True)
class Contour:
    """Ellipse ``center + e^{i angle} (a cos t + i b sin t)``, positively oriented."""

    center: complex
    a: float
    b: float
    angle: float = 0.0

    @classmethod
    def circle(cls, center: complex, radius: float) -> "Contour":
        return cls(complex(center), float(radius), float(radius), 0.0)

    def nodes(self, m: int):
        t = 2 * np.pi * np.arange(m) / m
        rot = np.exp(1j * self.angle)
        lam = self.center + rot * (self.a * np.cos(t) + 1j * self.b * np.sin(t))
        dlam = rot * (-self.a * np.sin(t) + 1j * self.b * np.cos(t))
        return lam, dlam * (2 * np.pi / m)

    def contains(self, z) -> np.ndarray:
        z = (np.asarray(z, dtype=complex) - self.center) * np.exp(-1j * self.angle)
        return (z.real / self.a) ** 2 + (z.imag / self.b) ** 2 < 1.0

    def as_dict(self) -> dict:
        return {"center": {"re": self.center.real, "im": self.center.imag}, "a": self.a, "b": self.b,
                "angle": self.angle}


def contour_around(cluster, others, fraction: float = 1.0 / 3.0) -> Contour:
    """Circle (one point) or ellipse (a pair) at ``fraction`` of the distance to the rest."""
    cl = np.atleast_1d(np.asarray(cluster, dtype=complex))
    rest = np.asarray([z for z in np.atleast_1d(np.asarray(others, dtype=complex))
                       if np.min(np.abs(cl - z)) > 0], dtype=complex)
    d = float(np.min(np.abs(rest[:, None] - cl[None, :]))) if rest.size else 1.0
    r = fraction * d
    if cl.size == 1:
        return Contour.circle(cl[0], r)
    c = complex(np.mean(cl))
    half = float(np.max(np.abs(cl - c)))
    angle = float(np.angle(cl[np.argmax(np.abs(cl - c))] - c)) if half > 0 else 0.0
    return Contour(c, half + r, r, angle)


# ---------------------------------------------------------------------------
# Projectors


@dataclass(frozen=True)
class Projector:
    """``matrix`` applies ``Q`` to samples on ``grid`` (product-integration form)."""

    contour: Contour
    grid: QuadratureGrid
    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    enclosed: tuple
    rank_estimate: int
    winding_count: int
    moments: tuple = ()
    refinement_change: float = 0.0
    converged: bool = True
    singular_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    jordan_length: int | None = None

    def apply(self, f) -> np.ndarray:
        return self.matrix @ np.asarray(f, dtype=complex)

    def norm(self) -> float:
        return operator_norm_estimate(self.matrix, self.grid.w)

    def idempotence_defect(self) -> float:
        """``||Q^2 - Q|| / (1 + ||Q||^2)``."""
        Q = self.matrix
        return operator_norm_estimate(Q @ Q - Q, self.grid.w) / (1.0 + self.norm() ** 2)

    def product_norm(self, other: "Projector") -> float:
        return operator_norm_estimate(self.matrix @ other.matrix, self.grid.w)


def _node_data(prob, grid, lam, boundary_tol):
    samples = dirichlet_on_grid(prob, lam, grid)
    if abs(samples.normalized_w) <= boundary_tol:
        raise ContourThroughSpectrum(f"|w| / scale = {abs(samples.normalized_w):.2e} at contour node {lam}")
    wv = wronskian(prob, lam)
    return resolvent_operator(samples), wv.dw / wv.w


def _rank(Q: np.ndarray, w: np.ndarray, rank_tol: float):
    sv = np.linalg.svd(weighted(Q, w), compute_uv=False)
    if sv[0] == 0:
        return 0, sv
    r = int(np.sum(sv > rank_tol * sv[0]))
    if r < sv.size and sv[r] > 0 and sv[r - 1] / sv[r] < 10.0:
        raise RankAmbiguous(f"singular values {sv[r - 1]:.3e} and {sv[r]:.3e} are not separated")
    return r, sv


def project(params, contour: Contour, grid_spec=None, tau: float = 1.0, config: SolverConfig | None = None,
            enclosed=None, workers: int | None = None, moment_orders: int = 3) -> Projector:
    """``Q = -(1/2 pi i) oint s_lambda d lambda`` by the trapezoid rule on ``contour``.

    The node count starts at ``contour_nodes`` and doubles until the operator
    norm of the change is below ``proj_tol ||Q||``.  Moments
    ``-(1/2 pi i) oint p(lambda)^m s_lambda`` with ``p(lambda) = prod (lambda - lambda_i)``
    over the distinct enclosed eigenvalues are accumulated for the Jordan test.
    """
    prob = as_problem(params, tau, config)
    cfg = prob.config
    grid = _grid(grid_spec, cfg)
    workers = workers or cfg.workers
    ref = np.atleast_1d(np.asarray(enclosed if enclosed is not None else [contour.center], dtype=complex))
    distinct = []
    for z in ref:
        if all(abs(z - d) > 1e-6 * (1 + abs(z)) for d in distinct):
            distinct.append(z)
    distinct = np.array(distinct)

    def evaluate(lams):
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                return list(ex.map(lambda z: _node_data(prob, grid, z, cfg.boundary_tol), lams))
        return [_node_data(prob, grid, z, cfg.boundary_tol) for z in lams]

    n = grid.size
    m = cfg.contour_nodes
    lam, dl = contour.nodes(m)
    data = evaluate(lam)
    all_lam, all_dl, all_data = list(lam), list(dl), data

    def assemble(lams, dls, dat):
        # Q = -(1/2 pi i) sum K_j dlam_j ; the moment sums reuse the same nodes
        acc = [np.zeros((n, n), dtype=complex) for _ in range(moment_orders + 1)]
        wind = 0j
        for z, d, (K, dlog) in zip(lams, dls, dat):
            c = -d / (2j * np.pi)
            pz = np.prod(z - distinct)
            for k in range(moment_orders + 1):
                acc[k] += (c * pz ** k) * K
            wind += dlog * d / (2j * np.pi)
        return acc, wind

    acc, wind = assemble(all_lam, all_dl, all_data)
    change, converged = np.inf, False
    while True:
        norm_q = operator_norm_estimate(acc[0], grid.w)
        if 2 * m > cfg.contour_max_nodes:
            break
        t = 2 * np.pi * (np.arange(m) + 0.5) / m
        rot = np.exp(1j * contour.angle)
        new_lam = contour.center + rot * (contour.a * np.cos(t) + 1j * contour.b * np.sin(t))
        new_dl = rot * (-contour.a * np.sin(t) + 1j * contour.b * np.cos(t)) * (2 * np.pi / m)
        new_data = evaluate(new_lam)
        m *= 2
        all_lam += list(new_lam)
        all_dl = [d / 2 for d in all_dl] + list(new_dl / 2)
        all_data += new_data
        prev = acc[0]
        acc, wind = assemble(all_lam, all_dl, all_data)
        change = operator_norm_estimate(acc[0] - prev, grid.w)
        norm_q = operator_norm_estimate(acc[0], grid.w)
        if change <= cfg.proj_tol * max(norm_q, 1.0) and m >= 2 * cfg.contour_nodes:
            converged = True
            break
    Q = acc[0]
    if norm_q < 1e-12:
        r, sv = 0, np.zeros(1)
    else:
        r, sv = _rank(Q, grid.w, cfg.rank_tol)
    return Projector(contour, grid, Q, np.array(all_lam), np.array(all_dl), tuple(complex(z) for z in ref),
                     r, int(round(wind.real)), tuple(acc[1:]), float(change), converged, sv)


def jordan_length(projector: Projector, params=None, nilpotent_tol: float = DEFAULT.nilpotent_tol) -> int:
    """Smallest ``m`` with ``||p(H)^m Q|| < nilpotent_tol ||Q||``.

    ``p(H)^m Q`` is evaluated exactly as a contour moment rather than by
    differencing on the grid, using ``(H - lambda) s_lambda = 1``.
    """
    if projector.rank_estimate == 0:
        return 0
    nq = projector.norm()
    for m, Nm in enumerate(projector.moments, start=1):
        if operator_norm_estimate(Nm, projector.grid.w) < nilpotent_tol * nq:
            return m
    raise RankAmbiguous("no moment up to the stored order is nilpotent at the requested tolerance")


def nilpotent_defects(projector: Projector) -> list[float]:
    nq = projector.norm()
    return [operator_norm_estimate(N, projector.grid.w) / nq for N in projector.moments]


def with_jordan(projector: Projector, nilpotent_tol: float = DEFAULT.nilpotent_tol) -> Projector:
    from dataclasses import replace
    return replace(projector, jordan_length=jordan_length(projector, nilpotent_tol=nilpotent_tol))


# ---------------------------------------------------------------------------
# Families of projectors and completeness


def clusters_of(points, pair_radius: float | None = None, newton_tol: float = DEFAULT.newton_tol):
    lams = [complex(getattr(p, "lam", p)) for p in points]
    out, used = [], set()
    for i, z in enumerate(lams):
        if i in used:
            continue
        group = [i]
        for j in range(i + 1, len(lams)):
            rad = pair_radius if pair_radius is not None else 10 * newton_tol * (1 + abs(z))
            if j not in used and abs(lams[j] - z) < rad:
                group.append(j)
        used.update(group)
        out.append(group)
    return out


def projector_family(params, points, grid_spec=None, tau: float = 1.0, config: SolverConfig | None = None,
                     clusters=None, workers: int | None = None, others=None) -> list[Projector]:
    """One projector per cluster in index order, with Jordan lengths filled in.

    ``others`` lists further eigenvalues (beyond ``points``) that contours must
    keep their distance from.
    """
    cfg = as_problem(params, tau, config).config
    lams = np.array([complex(getattr(p, "lam", p)) for p in points])
    every = np.concatenate([lams, np.asarray(others if others is not None else [], dtype=complex)])
    groups = clusters if clusters is not None else clusters_of(lams, newton_tol=cfg.newton_tol)
    out = []
    for g in groups:
        cl = lams[g]
        rest = [z for z in every if np.min(np.abs(cl - z)) > 0]
        P = project(params, contour_around(cl, rest), grid_spec, tau, cfg, enclosed=cl, workers=workers)
        out.append(with_jordan(P, cfg.nilpotent_tol))
    return out


def block_projector(params, block, rest, grid_spec=None, tau: float = 1.0, config: SolverConfig | None = None,
                    workers: int | None = None) -> Projector:
    """One circle around all of ``block``, a third of the way out to the nearest of ``rest``."""
    low = np.atleast_1d(np.asarray(block, dtype=complex))
    rest = np.atleast_1d(np.asarray(rest, dtype=complex))
    c = complex(np.mean(low))
    reach = float(np.max(np.abs(low - c))) if low.size > 1 else 0.0
    gap = float(np.min(np.abs(rest - c))) if rest.size else reach + 1.0
    if gap <= reach:
        raise ContourThroughSpectrum("block is not separated from the rest of the spectrum by a circle")
    return project(params, Contour.circle(c, reach + (gap - reach) / 3.0), grid_spec, tau, config,
                   enclosed=low, workers=workers)


@dataclass
class CompletenessReport:
    residuals: np.ndarray        # (n_functions, n_projectors)
    monotone: np.ndarray         # per function
    strictly_decreasing: np.ndarray

    def as_dict(self) -> dict:
        return {"residuals": self.residuals.tolist(), "monotone": self.monotone.tolist(),
                "strictly_decreasing": self.strictly_decreasing.tolist()}


def completeness_check(params, projectors, test_functions, grid: QuadratureGrid | None = None) -> CompletenessReport:
    """``||f - sum_{n<N} Q_n f|| / ||f||`` for ``N = 1 .. len(projectors)``."""
    grid = grid or projectors[0].grid
    res = np.empty((len(test_functions), len(projectors)))
    for i, f in enumerate(test_functions):
        f = np.asarray(f, dtype=complex)
        nf = grid.norm(f)
        acc = np.zeros_like(f)
        for n, P in enumerate(projectors):
            acc = acc + P.apply(f)
            res[i, n] = grid.norm(f - acc) / nf
    d = np.diff(res, axis=1)
    mono = np.all(d <= 1e-12, axis=1)
    strict = np.all(d < 0, axis=1)
    return CompletenessReport(res, mono, strict)


def flatness_series(projectors) -> np.ndarray:
    """``||Q_n||`` for each projector in order."""
    return np.array([P.norm() for P in projectors])


def truncated_circle_check(params, ceilings, test_function, floor: float = -5.0, grid_spec=None,
                           tau: float = 1.0, config: SolverConfig | None = None, strip_height: float = 0.0):
    """Residual ``||f - Q_R f|| / ||f||`` for circles through ``floor`` and each ceiling.

    Each ceiling should sit in a spectral gap; the circle spans ``[floor, ceiling]``
    on the real axis and must be taller than the strip holding the spectrum.
    """
    out = []
    for top in ceilings:
        c = 0.5 * (floor + top)
        R = 0.5 * (top - floor)
        if R <= strip_height:
            raise ValueError("circle does not cover the spectral strip")
        P = project(params, Contour.circle(c, R), grid_spec, tau, config)
        f = np.asarray(test_function, dtype=complex)
        out.append(P.grid.norm(f - P.apply(f)) / P.grid.norm(f))
    return np.array(out)


# ---------------------------------------------------------------------------
# Serialisation: JSON header line followed by CSV matrix blocks


def _matrix_csv(M: np.ndarray) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    for row in M:
        wr.writerow([x for z in row for x in (repr(float(z.real)), repr(float(z.imag)))])
    return buf.getvalue()


def dumps_matrix_bundle(header: dict, blocks: dict) -> str:
    """``# {json}`` then, per block, ``## name rows cols`` and rows of ``re,im`` pairs."""
    out = ["# " + json.dumps(header, sort_keys=True)]
    for name, M in blocks.items():
        M = np.atleast_2d(np.asarray(M, dtype=complex))
        out.append(f"## {name} {M.shape[0]} {M.shape[1]}")
        out.append(_matrix_csv(M).rstrip("\n"))
    return "\n".join(out) + "\n"


def loads_matrix_bundle(text: str):
    lines = text.splitlines()
    header = json.loads(lines[0][2:])
    blocks, i = {}, 1
    while i < len(lines):
        _, name, r, c = lines[i].split()
        r, c = int(r), int(c)
        rows = list(csv.reader(lines[i + 1 : i + 1 + r]))
        arr = np.array(rows, dtype=float).reshape(r, c, 2)
        blocks[name] = arr[..., 0] + 1j * arr[..., 1]
        i += 1 + r
    return header, blocks


def kernel_to_text(gk: GreensKernel) -> str:
    header = {"type": "greens_kernel", "lambda": {"re": gk.lam.real, "im": gk.lam.imag},
              "wronskian": {"re": gk.wronskian.real, "im": gk.wronskian.imag}, "grid_size": gk.grid.size}
    return dumps_matrix_bundle(header, {"grid": np.vstack([gk.grid.u, gk.grid.w]), "kernel": gk.kernel})


def projector_to_text(P: Projector) -> str:
    header = {"type": "projector", "contour": P.contour.as_dict(),
              "enclosed": [{"re": z.real, "im": z.imag} for z in P.enclosed], "rank_estimate": P.rank_estimate,
              "jordan_length": P.jordan_length, "nodes": int(P.nodes.size), "converged": P.converged}
    return dumps_matrix_bundle(header, {"grid": np.vstack([P.grid.u, P.grid.w]), "matrix": P.matrix})
