"""Numerical tolerances and knobs, collected in one dataclass."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError


@dataclass(frozen=True)
class SolverConfig:
    # integrator
    ode_tol: float = 1e-10
    ode_atol: float = 1e-14
    wronskian_tol: float = 1e-7
    # boundary series
    series_tol: float = 1e-12
    eps_max: float = 0.05
    eps_mu: float = 0.5
    series_max_order: int = 120
    # root finding
    real_tol: float = 1e-12
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    accept_tol: float = 1e-8
    boundary_tol: float = 1e-9
    c_apriori: float | None = None
    # region classification
    nu_hat: float = 1.0
    c5: float = 1.0
    # resolvent / projectors
    grid: int = 400
    contour_nodes: int = 16
    contour_max_nodes: int = 256
    proj_tol: float = 1e-5
    rank_tol: float = 1e-8
    nilpotent_tol: float = 1e-4
    # homotopy
    tau_steps: int = 20
    dtau_min: float = 1e-4
    dtau_max: float = 0.05
    lambda_floor: float = -5.0
    lambda_ceiling: float | None = None
    # misc
    workers: int = 1

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.endswith("_tol") or f.name in ("ode_atol", "eps_max", "eps_mu", "dtau_min", "dtau_max"):
                if not (isinstance(v, (int, float)) and v > 0):
                    raise ConfigError(f"{f.name} must be positive, got {v!r}")
        if self.c_apriori is not None and self.c_apriori <= 0:
            raise ConfigError("c_apriori must be positive")
        if self.grid < 16:
            raise ConfigError("grid must have at least 16 nodes")
        if self.contour_nodes < 4 or self.contour_max_nodes < self.contour_nodes:
            raise ConfigError("invalid contour node counts")
        if self.tau_steps < 1 or self.workers < 1:
            raise ConfigError("tau_steps and workers must be >= 1")
        if self.dtau_min > self.dtau_max:
            raise ConfigError("dtau_min exceeds dtau_max")

    def apriori_constant(self, strip_c: float) -> float:
        return self.c_apriori if self.c_apriori is not None else 4.0 * (strip_c + 1.0)

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = SolverConfig()
