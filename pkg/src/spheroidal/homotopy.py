"""Continuation of eigenvalues along ``W_tau = Re W + i tau Im W``, tau: 0 -> 1."""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, SolverConfig
from .errors import CountMismatch, NewtonDiverged, SpectralError, TrackLost
from .integrator import Problem, wronskian
from .potential import ModeParams
from .spectrum import SpectralPoint, check_apriori, complex_refine, count_zeros, real_spectrum

log = logging.getLogger(__name__)


@dataclass
class TrackRecord:
    index: int
    path: list = field(default_factory=list)
    events: list = field(default_factory=list)
    final: SpectralPoint | None = None

    def to_jsonl(self) -> str:
        lines = []
        for tau, lam in self.path:
            lines.append(json.dumps({"index": self.index, "tau": tau, "lambda": {"re": lam.real, "im": lam.imag}}))
        return "\n".join(lines)


@dataclass
class TrackResult:
    records: list
    box: tuple
    box_counts: list
    tau_grid: list
    elapsed: float
    max_return_error: float | None = None
    reverse_records: list | None = None
    merges: int = 0

    @property
    def finals(self) -> np.ndarray:
        return np.array([r.final.lam for r in self.records])


def _w_rel(prob: Problem, lam: complex, ref_log: float | None = None):
    wv = wronskian(prob, lam)
    if ref_log is None:
        return wv.w, wv.dw, wv.logscale
    f = math.exp(wv.logscale - ref_log)
    return wv.w * f, wv.dw * f, ref_log


def tau_derivative(params: ModeParams, tau: float, lam: complex, config: SolverConfig = DEFAULT, delta: float = 1e-6):
    """``d lambda / d tau = -(dw/dtau)/(dw/dlambda)``; ``dw/dtau`` by central differences."""
    p0 = Problem.from_params(params, tau, config)
    w0, dw0, L0 = _w_rel(p0, lam)
    wp, _, _ = _w_rel(Problem.from_params(params, tau + delta, config), lam, L0)
    wm, _, _ = _w_rel(Problem.from_params(params, tau - delta, config), lam, L0)
    dwt = (wp - wm) / (2 * delta)
    return -dwt / dw0


def master_box(params: ModeParams, real_points, n_max: int, config: SolverConfig = DEFAULT):
    """``(floor, ceiling, -h, h)`` with the ceiling at a gap midpoint of the tau = 0 spectrum.

    Returns the box and the number of tau = 0 eigenvalues inside it.
    """
    lams = np.array([p.lam.real for p in real_points])
    floor = min(config.lambda_floor, lams[0] - 5.0)
    if config.lambda_ceiling is not None:
        ceil = config.lambda_ceiling
    else:
        target = 1.5 * max(lams[n_max], 1.0)
        j = int(np.searchsorted(lams, target)) - 1
        j = max(j, n_max)
        if j + 1 >= len(lams):
            raise ValueError("not enough tau = 0 eigenvalues to place the ceiling")
        ceil = 0.5 * (lams[j] + lams[j + 1])
    h = max(config.apriori_constant(params.strip_c) * abs(params.omega), 1.0)
    inside = int(np.sum((lams > floor) & (lams < ceil)))
    return (floor, ceil, -h, h), inside


def _needed_real_points(params, n_max, config):
    n = n_max + 4
    while True:
        pts = real_spectrum(params, n, tau=0.0, config=config)
        top = pts[-1].lam.real
        if config.lambda_ceiling is not None:
            if top > config.lambda_ceiling:
                return pts
        elif top > 1.5 * max(pts[n_max].lam.real, 1.0) + 1.0:
            return pts
        n = int(n * 1.5) + 2


def _min_sep(lams):
    out = np.full(len(lams), np.inf)
    for i in range(len(lams)):
        for j in range(len(lams)):
            if i != j:
                out[i] = min(out[i], abs(lams[i] - lams[j]))
    return out


def _continue(params, lams, tau_from, tau_to, config, records, box=None, box_count=None, counts=None,
              taus=None):
    """Lock-step predictor-corrector from ``tau_from`` to ``tau_to``."""
    direction = 1.0 if tau_to > tau_from else -1.0
    tau = tau_from
    dtau = min(abs(tau_to - tau_from) / config.tau_steps, config.dtau_max)
    lams = np.array(lams, dtype=complex)
    while (tau_to - tau) * direction > 1e-14:
        dt = min(dtau, abs(tau_to - tau)) * direction
        new_tau = tau + dt if abs(tau + dt - tau_to) > 1e-12 else tau_to
        ceiling = 2.0 * np.sqrt(1.0 + np.abs(lams))
        preds = np.empty_like(lams)
        prob = Problem.from_params(params, new_tau, config)
        ok = True
        new = np.empty_like(lams)
        for i, lam in enumerate(lams):
            try:
                slope = tau_derivative(params, tau, lam, config)
                pred = lam + (new_tau - tau) * slope
                x = pred
                for _ in range(12):
                    wv = wronskian(prob, x)
                    step = wv.w / wv.dw
                    x = x - step
                    if abs(step) <= config.newton_tol * (1 + abs(x)):
                        break
                else:
                    raise NewtonDiverged("corrector did not converge")
                if abs(x - lam) > ceiling[i] or abs(x - pred) > 0.25 * ceiling[i]:
                    raise NewtonDiverged("corrector left the step ceiling")
                new[i], preds[i] = x, pred
            except (SpectralError, ZeroDivisionError, FloatingPointError) as exc:
                records[i].events.append({"type": "newton_retry", "tau": float(new_tau), "reason": str(exc)})
                ok = False
                break
        if ok and len(new) > 1:
            # each corrected root must sit much nearer its own prediction than any other root,
            # otherwise a corrector may have been captured by a neighbouring path
            s = _min_sep(new)
            if np.any(s < 1e-8 * (1 + np.abs(new))) or np.any(np.abs(new - preds) > 0.1 * s):
                ok = False
                records[int(np.argmin(s))].events.append({"type": "crowded", "tau": float(new_tau)})
        if not ok:
            dtau *= 0.5
            if dtau < config.dtau_min:
                raise TrackLost(f"tau step fell below {config.dtau_min} at tau = {tau:.6f}")
            continue
        tau = new_tau
        lams = new
        for i, r in enumerate(records):
            r.path.append((float(tau), complex(lams[i])))
        if taus is not None:
            taus.append(float(tau))
        if box is not None:
            c = count_zeros(prob, box, config=config)
            counts.append(c)
            if c != box_count:
                raise CountMismatch(f"master box holds {c} zeros at tau = {tau:.4f}, expected {box_count}")
        dtau = min(dtau * 1.5, config.dtau_max)
    return lams


def track_spectrum(params: ModeParams, n_max: int, tau_steps: int | None = None, config: SolverConfig = DEFAULT,
                   check_box: bool = True, reverse: bool = False, certify_final: bool = True) -> TrackResult:
    """Track ``lambda_0 .. lambda_n_max`` from the self-adjoint problem to tau = 1."""
    t0 = time.perf_counter()
    if tau_steps is not None:
        config = config.with_(tau_steps=tau_steps, dtau_max=min(config.dtau_max, 1.0 / tau_steps))
    real_pts = _needed_real_points(params, n_max, config) if check_box else real_spectrum(params, n_max, 0.0, config)
    start = np.array([p.lam for p in real_pts[: n_max + 1]])
    records = [TrackRecord(n, [(0.0, complex(start[n]))]) for n in range(n_max + 1)]
    box, box_count, counts = None, None, []
    if check_box:
        box, expected = master_box(params, real_pts, n_max, config)
        box_count = count_zeros(Problem.from_params(params, 0.0, config), box, config=config)
        counts.append(box_count)
        if box_count != expected:
            raise CountMismatch(f"master box holds {box_count} zeros at tau = 0, expected {expected}")
    taus = [0.0]
    if params.omega.imag == 0:
        finals = start.copy()
        for r in records:
            r.path.append((1.0, r.path[0][1]))
        taus.append(1.0)
    else:
        finals = _continue(params, start, 0.0, 1.0, config, records, box, box_count, counts, taus)
    seps = _min_sep(finals)
    for r, lam, sep in zip(records, finals, seps):
        if certify_final:
            pt = complex_refine(params, lam, 1.0, config, index=r.index, neighbour_sep=sep)
        else:
            check_apriori(params, lam, config)
            pt = SpectralPoint(complex(lam), r.index, 1, None, abs(wronskian(Problem.from_params(params, 1.0, config), lam).normalized), "homotopy")
        pt.provenance = "homotopy"
        r.final = pt
    result = TrackResult(records, box, counts, taus, 0.0)
    if reverse:
        back_records = [TrackRecord(r.index, [(1.0, r.final.lam)]) for r in records]
        if params.omega.imag == 0:
            back = finals
        else:
            back = _continue(params, finals, 1.0, 0.0, config, back_records)
        result.reverse_records = back_records
        result.max_return_error = float(np.max(np.abs(back - start)))
    result.merges = sum(len(c) > 1 for c in detect_pairs(records))
    result.elapsed = time.perf_counter() - t0
    return result


def detect_pairs(records, pair_radius: float | None = None, newton_tol: float = DEFAULT.newton_tol):
    """Group final eigenvalues closer than ``pair_radius`` (default ``10 tol (1+|lambda|)``)."""
    lams = [r.final.lam for r in records]
    n = len(lams)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            rad = pair_radius if pair_radius is not None else 10 * newton_tol * (1 + abs(lams[i]))
            if abs(lams[i] - lams[j]) < rad:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(records[i].index)
    return sorted(groups.values(), key=lambda g: g[0])


def gamma0_count(real_points, omega: complex) -> int:
    """Size of the low block: all ``n`` with ``lambda_n(0) < 4 |Omega|`` (at least one)."""
    lams = np.array([p.lam.real for p in real_points])
    return max(1, int(np.sum(lams < 4 * abs(omega))))
