"""Command-line front end: ``spheroidal {eigen,project,track,verify}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .config import SolverConfig
from .errors import ConfigError, ParameterError, SpectralError
from .io import RunConfig, complex_json, output_dir, parse_complex, write_csv, write_json

EXIT_OK, EXIT_CERT, EXIT_CONFIG = 0, 2, 3

COLUMN_TAGS = {
    "index": "continuation index from the self-adjoint problem",
    "sorted_index": "position by (Re, Im)",
    "lambda_re": "eigenvalue, real part",
    "lambda_im": "eigenvalue, imaginary part",
    "multiplicity": "argument-principle count in the certifying box",
    "wronskian_residual": "|w| / local scale at acceptance",
    "provenance": "real_bisection | newton | homotopy",
}

_TOL_FIELDS = [f.name for f in fields(SolverConfig) if f.name.endswith("_tol")]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--s", type=float)
    common.add_argument("--k", type=float)
    common.add_argument("--omega", help="complex, e.g. 4+0.4i")
    common.add_argument("--strip-c", type=float)
    common.add_argument("--lambda-ceiling", type=float)
    common.add_argument("--n", type=int, help="number of eigenvalues (indices 0..n-1)")
    common.add_argument("--tau-steps", type=int)
    common.add_argument("--grid", type=int)
    common.add_argument("--out", help="output directory (fallback: $SPECTRA_OUT, then .)")
    common.add_argument("--workers", type=int, help="worker threads (default: available cores)")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    for name in _TOL_FIELDS:
        common.add_argument("--tol-" + name[: -len("_tol")].replace("_", "-"), dest=name, type=float)

    p = _Parser(prog="spheroidal", description="Spectra of the spin-weighted spheroidal operator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("eigen", parents=[common], help="eigenvalue table")
    pr = sub.add_parser("project", parents=[common], help="spectral projectors and their checks")
    pr.add_argument("--completeness", choices=["none", "bump", "random", "both"])
    pr.add_argument("--save-projectors", action="store_true")
    sub.add_parser("track", parents=[common], help="tau-homotopy tracks")
    ve = sub.add_parser("verify", parents=[common], help="pass/fail matrix of invariant suites")
    ve.add_argument("--suites", default="all", help="comma list or 'all'")
    return p


def resolve_config(ns) -> RunConfig:
    base = RunConfig()
    if ns.config:
        base = RunConfig.from_text(Path(ns.config).read_text())
    raw = {}
    for key in ("s", "k", "n", "tau_steps", "seed", "strip_c"):
        v = getattr(ns, key, None)
        if v is not None:
            raw[key] = v
    if ns.omega is not None:
        raw["omega"] = parse_complex(ns.omega)
    if getattr(ns, "completeness", None) is not None:
        raw["completeness"] = ns.completeness
    if ns.lambda_ceiling is not None:
        raw["lambda_ceiling"] = ns.lambda_ceiling
    if ns.grid is not None:
        raw["grid"] = ns.grid
    for name in _TOL_FIELDS:
        v = getattr(ns, name, None)
        if v is not None:
            raw[name] = v
    workers = ns.workers if ns.workers is not None else (base.solver.workers if ns.config else os.cpu_count() or 1)
    raw["workers"] = workers
    raw = {k: (v if isinstance(v, (str, complex)) else repr(v) if isinstance(v, float) else str(v))
           for k, v in raw.items()}
    cfg = RunConfig.from_items(raw, base)
    if ns.tau_steps is not None:
        cfg = RunConfig.from_items({"dtau_max": repr(min(cfg.solver.dtau_max, 1.0 / ns.tau_steps))}, cfg)
    return cfg


def _header(cfg: RunConfig, command: str, columns=None) -> dict:
    h = {"command": command, "config_hash": cfg.hash(),
         "params": {"s": cfg.s, "k": cfg.k, "omega": complex_json(cfg.omega), "strip_c": cfg.strip_c},
         "tolerances": {k: getattr(cfg.solver, k) for k in _TOL_FIELDS}}
    if columns:
        h["columns"] = {c: COLUMN_TAGS.get(c, "") for c in columns}
    return h


def _spectrum_points(cfg: RunConfig):
    from .spectrum import complex_spectrum, real_spectrum, sort_points

    params = cfg.params()
    if params.omega.imag == 0:
        pts = real_spectrum(params, cfg.n - 1, 0.0, cfg.solver)
        sort_points(list(pts))
        return pts
    return complex_spectrum(params, cfg.n - 1, cfg.solver)


def cmd_eigen(cfg: RunConfig, out: Path) -> int:
    pts = _spectrum_points(cfg)
    cols = list(COLUMN_TAGS)
    rows = [[p.index, p.sorted_index, float(p.lam.real), float(p.lam.imag), p.multiplicity,
             float(p.wronskian_residual), p.provenance] for p in pts]
    write_csv(out / "eigen.csv", _header(cfg, "eigen", cols), cols, rows)
    write_json(out / "eigen.json", {"header": _header(cfg, "eigen"), "points": [
        {"index": p.index, "sorted_index": p.sorted_index, "lambda": complex_json(p.lam),
         "multiplicity": p.multiplicity, "wronskian_residual": p.wronskian_residual, "provenance": p.provenance}
        for p in pts]})
    bad = [p for p in pts if not p.wronskian_residual < cfg.solver.accept_tol]
    if bad:
        logging.error("%d points exceed accept_tol", len(bad))
        return EXIT_CERT
    return EXIT_OK


def cmd_project(cfg: RunConfig, out: Path, save: bool = False) -> int:
    from .diagnostics import polynomial_bump
    from .grid import mapped_gauss_legendre
    from .homotopy import gamma0_count
    from .resolvent import (block_projector, completeness_check, flatness_series, nilpotent_defects,
                            projector_family, projector_to_text)
    from .spectrum import real_spectrum

    params = cfg.params()
    sc = cfg.solver
    pts = _spectrum_points(cfg.__class__.from_items({"n": str(cfg.n + 2)}, cfg))
    used, extra = pts[: cfg.n], pts[cfg.n:]
    fam = projector_family(params, used, sc.grid, 1.0, sc, others=[p.lam for p in extra], workers=sc.workers)
    rows, clusters = [], []
    for P in fam:
        idem = P.idempotence_defect()
        lam = P.enclosed[0]
        idx = [p.index for p in used if any(abs(p.lam - z) == 0 for z in P.enclosed)]
        rows.append([idx[0], float(lam.real), float(lam.imag), len(P.enclosed), P.rank_estimate, P.jordan_length,
                     P.norm(), idem, P.nodes.size])
        clusters.append({"indices": idx, "enclosed": [complex_json(z) for z in P.enclosed],
                         "rank": P.rank_estimate, "jordan_length": P.jordan_length,
                         "winding_count": P.winding_count, "nilpotent_defects": nilpotent_defects(P),
                         "idempotence": idem, "norm": P.norm(), "nodes": int(P.nodes.size)})
        for p in used:
            if p.index in idx:
                p.jordan_length = P.jordan_length
    orth = 0.0
    for i in range(len(fam)):
        for j in range(len(fam)):
            if i != j:
                orth = max(orth, fam[i].product_norm(fam[j]))
    # low block: every n with lambda_n(0) < 4 |Omega|
    real0 = real_spectrum(params, cfg.n, 0.0, sc)
    n0 = min(gamma0_count(real0, params.omega), len(used))
    G0 = block_projector(params, [p.lam for p in used[:n0]], [p.lam for p in pts[n0:]], sc.grid, 1.0, sc,
                         workers=sc.workers)
    report = {"header": _header(cfg, "project"), "clusters": clusters, "max_orthogonality": orth,
              "max_idempotence": max(r[7] for r in rows), "jordan_max_n_ge_1": max(
                  [r[5] for r in rows if r[0] >= 1] or [0]),
              "flatness": flatness_series(fam).tolist(),
              "gamma0": {"count": n0, "rank": G0.rank_estimate, "winding_count": G0.winding_count}}
    if cfg.completeness != "none":
        grid = mapped_gauss_legendre(sc.grid)
        tests, names = [], []
        if cfg.completeness in ("bump", "both"):
            tests.append(polynomial_bump(grid.u))
            names.append("bump")
        if cfg.completeness in ("random", "both"):
            rng = np.random.default_rng(cfg.seed)
            for j in range(3):
                tests.append(rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size))
                names.append(f"random_{j}")
        rep = completeness_check(params, fam, tests, grid)
        report["completeness"] = {"functions": names, **rep.as_dict()}
    cols = ["index", "lambda_re", "lambda_im", "cluster_size", "rank", "jordan_length", "norm", "idempotence",
            "contour_nodes"]
    write_csv(out / "projectors.csv", _header(cfg, "project", cols), cols, rows)
    write_json(out / "projectors.json", report)
    if save:
        for P, row in zip(fam, rows):
            (out / f"projector_{row[0]}.txt").write_text(projector_to_text(P))
    ok = (report["max_idempotence"] < sc.proj_tol and orth < sc.proj_tol and report["jordan_max_n_ge_1"] <= 2
          and G0.rank_estimate == n0)
    return EXIT_OK if ok else EXIT_CERT


def cmd_track(cfg: RunConfig, out: Path) -> int:
    from .homotopy import track_spectrum

    res = track_spectrum(cfg.params(), cfg.n - 1, cfg.tau_steps, cfg.solver, reverse=True)
    with open(out / "tracks.jsonl", "w") as fh:
        for r in res.records:
            fh.write(r.to_jsonl() + "\n")
    summary = {"header": _header(cfg, "track"), "max_return_error": res.max_return_error, "merges": res.merges,
               "box": list(res.box) if res.box else None, "box_counts": res.box_counts,
               "tau_steps_taken": len(res.tau_grid) - 1,
               "finals": [{"index": r.index, "lambda": complex_json(r.final.lam),
                           "events": r.events} for r in res.records]}
    write_json(out / "track_summary.json", summary)
    return EXIT_OK if (res.max_return_error or 0.0) < 1e-6 else EXIT_CERT


def cmd_verify(cfg: RunConfig, out: Path, suites: str = "all") -> int:
    from .suites import ALL, run_suites

    names = ALL if suites == "all" else tuple(s.strip() for s in suites.split(","))
    unknown = set(names) - set(ALL)
    if unknown:
        raise ConfigError(f"unknown suites: {sorted(unknown)}")
    results = run_suites(cfg.params(), names, cfg.n - 1, cfg.solver, cfg.seed)
    cols = ["suite", "passed", "metric", "threshold"]
    rows = [[r.name, r.passed, float(r.metric), float(r.threshold)] for r in results]
    write_csv(out / "verify.csv", _header(cfg, "verify"), cols, rows)
    write_json(out / "verify.json", {"header": _header(cfg, "verify"),
                                     "results": [{k: v for k, v in r.as_dict().items() if k != "seconds"}
                                                 for r in results]})
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:15s} metric={r.metric:.3e} threshold={r.threshold:.3e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CERT


def _glue_values(argv):
    """``--omega -0-0i`` would read as a flag; rewrite to ``--omega=-0-0i``."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--omega", "--lambda-ceiling", "--s", "--k") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(_glue_values(list(sys.argv[1:] if argv is None else argv)))
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        cfg.params()
        out = output_dir(ns.out)
        (out / "run.cfg").write_text(cfg.to_text())
        if ns.command == "eigen":
            return cmd_eigen(cfg, out)
        if ns.command == "project":
            return cmd_project(cfg, out, ns.save_projectors)
        if ns.command == "track":
            return cmd_track(cfg, out)
        return cmd_verify(cfg, out, ns.suites)
    except (ConfigError, ParameterError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralError as exc:
        print(f"certification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CERT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
