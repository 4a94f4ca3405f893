"""Run configuration, its flat text format, and table writers."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .config import SolverConfig
from .errors import ConfigError

def parse_complex(text) -> complex:
    """Accept ``4+0.4i``, ``3-0.2j``, ``2i``, ``-0-0i``, ``5``; negative zeros become zero."""
    if isinstance(text, (int, float, complex)):
        z = complex(text)
    else:
        t = str(text).strip().replace(" ", "").replace("i", "j")
        try:
            z = complex(t)
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {text!r}") from exc
    return complex(z.real + 0.0, z.imag + 0.0)


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


@dataclass(frozen=True)
class RunConfig:
    s: float = 0.0
    k: float = 0.0
    omega: complex = 0j
    strip_c: float = 1.0
    n: int = 10
    tau_steps: int = 20
    out: str = "."
    seed: int = 0
    completeness: str = "none"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "strip_c", float(self.strip_c))
        object.__setattr__(self, "omega", parse_complex(self.omega))
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.tau_steps < 1:
            raise ConfigError("tau_steps must be >= 1")
        if self.completeness not in ("none", "bump", "random", "both"):
            raise ConfigError("completeness must be one of none, bump, random, both")

    def params(self):
        from .potential import ModeParams

        return ModeParams(self.s, self.k, self.omega, self.strip_c)

    # -- flat key = value format -------------------------------------------
    def to_items(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "solver"}
        d["omega"] = format_complex(self.omega)
        d.update(asdict(self.solver))
        return d

    def to_text(self) -> str:
        lines = []
        for key, val in self.to_items().items():
            lines.append(f"{key} = {'none' if val is None else (repr(val) if isinstance(val, float) else val)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        raw = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected key = value")
            key, val = (x.strip() for x in line.split("=", 1))
            raw[key] = val
        return cls.from_items(raw)

    @classmethod
    def from_items(cls, raw: dict, base: "RunConfig | None" = None) -> "RunConfig":
        base = base or cls()
        run_kw, solver_kw = {}, {}
        run_types = {f.name: f.type for f in fields(cls)}
        solver_fields = {f.name: f for f in fields(SolverConfig)}
        for key, val in raw.items():
            if key in run_types and key != "solver":
                run_kw[key] = _coerce_run(key, val)
            elif key in solver_fields:
                solver_kw[key] = _coerce_solver(key, val)
            else:
                raise ConfigError(f"unknown configuration key {key!r}")
        try:
            solver = replace(base.solver, **solver_kw)
            return replace(base, solver=solver, **run_kw)
        except TypeError as exc:  # pragma: no cover - defensive
            raise ConfigError(str(exc)) from exc

    def hash(self) -> str:
        """Digest of everything that affects results (not ``out`` or ``workers``)."""
        items = self.to_items()
        items.pop("out", None)
        items.pop("workers", None)
        blob = json.dumps({k: repr(v) for k, v in items.items()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _coerce_run(key, val):
    if key == "omega":
        return parse_complex(val)
    if key in ("n", "tau_steps", "seed"):
        return int(val)
    if key in ("s", "k", "strip_c"):
        return float(val)
    return str(val)


def _coerce_solver(key, val):
    if isinstance(val, str) and val.lower() == "none":
        return None
    ints = {f.name for f in fields(SolverConfig) if f.type in ("int", int)}
    try:
        return int(val) if key in ints else float(val)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {val!r}") from exc


def output_dir(cli_value: str | None) -> Path:
    d = Path(cli_value or os.environ.get("SPECTRA_OUT") or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def complex_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def write_csv(path: Path, header: dict, columns: list[str], rows: list[list]) -> None:
    """``# key: value`` metadata lines, then a header row and data rows."""
    buf = io.StringIO()
    for k in sorted(header):
        buf.write(f"# {k}: {json.dumps(header[k], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    Path(path).write_text(buf.getvalue())


def read_csv(path: Path):
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, v = line[2:].split(": ", 1)
            meta[k] = json.loads(v)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def write_json(path: Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")


def _default(o):
    if isinstance(o, complex):
        return complex_json(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")
