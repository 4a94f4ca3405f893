"""||Q_n|| for the first n projectors at a sweep of Omega; one CSV row per (Omega, n)."""
import argparse
import csv
import os
from dataclasses import dataclass, field

from spheroidal import ModeParams
from spheroidal.homotopy import track_spectrum
from spheroidal.io import parse_complex
from spheroidal.resolvent import flatness_series, projector_family


@dataclass
class Sweep:
    s: float = 2.0
    k: float = 2.0
    omegas: list = field(default_factory=lambda: [1 + 0.1j, 2 + 0.2j, 4 + 0.4j, 6 + 0.6j])
    count: int = 12
    out: str = "flatness.csv"


def run(cfg: Sweep):
    rows = []
    for om in cfg.omegas:
        p = ModeParams(cfg.s, cfg.k, om)
        lams = track_spectrum(p, cfg.count + 2).finals
        fam = projector_family(p, lams[: cfg.count], others=lams[cfg.count:], workers=os.cpu_count())
        for n, q in enumerate(flatness_series(fam)):
            rows.append([om.real, om.imag, n, q])
        print(f"Omega={om}: max |Q_n| = {max(r[3] for r in rows[-cfg.count:]):.4f}")
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega_re", "omega_im", "n", "norm"])
        w.writerows(rows)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omegas", nargs="*", type=parse_complex)
    ap.add_argument("--count", type=int, default=12)
    ap.add_argument("--out", default="flatness.csv")
    a = ap.parse_args()
    cfg = Sweep(count=a.count, out=a.out)
    if a.omegas:
        cfg.omegas = a.omegas
    run(cfg)
