"""Run and sweep configuration: flat key=value files plus overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ConfigError
from .model import ClassicalState, ModelParams, initial_state
from .quantum import DEFAULT_LEAKAGE_TOL, default_n_max
from .semiclassical import IntegratorConfig

__all__ = ["RunConfig", "AxisSpec", "SweepConfig", "parse_config_file", "parse_axis"]

_MODES = ("classical", "quantum")


@dataclass(frozen=True)
class RunConfig:
    """One simulation, classical or quantum.

    gamma is the dimensionless interaction strength; the bare nonlinearity
    is derived as gamma*J/N0.  The classical initial state is
    (sqrt(n0), sqrt(n1)*e^{-i*phi0}) with n0 - n1 = rho0*N0; the quantum
    initial state is the Fock product |N0> x |0>.
    """

    mode: str = "classical"
    theta: int = 0
    omega: float = 2.0
    j_coupling: float = 1.0
    gamma: float = 0.0
    n0_initial: float = 1.0
    rho0: float = 1.0
    phi0: float = 0.0
    t_end: float = 100.0
    dt_sample: Optional[float] = None  # per-mode default: 0.01 classical, 0.05 quantum
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    n_max: Optional[int] = None
    leakage_tol: float = DEFAULT_LEAKAGE_TOL

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.theta not in (0, 1):
            raise ConfigError("theta must be 0 or 1")
        for name in ("omega", "j_coupling", "gamma", "n0_initial", "rho0", "phi0",
                     "t_end", "rel_tol", "abs_tol", "leakage_tol"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        if self.t_end <= 0:
            raise ConfigError("t_end must be > 0")
        if self.dt_sample is not None and self.dt_sample <= 0:
            raise ConfigError("dt_sample must be > 0")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ConfigError("tolerances must be > 0")
        if self.n0_initial <= 0:
            raise ConfigError("n0_initial must be > 0")
        if not -1.0 <= self.rho0 <= 1.0:
            raise ConfigError("rho0 must lie in [-1, 1]")
        if self.mode == "quantum":
            if self.n0_initial != int(self.n0_initial):
                raise ConfigError("quantum n0_initial must be an integer")
            if self.n_max is not None and self.n_max < int(self.n0_initial):
                raise ConfigError("n_max must be >= n0_initial")
        if self.leakage_tol <= 0:
            raise ConfigError("leakage_tol must be > 0")

    def model_params(self) -> ModelParams:
        return ModelParams.from_gamma(
            omega=self.omega,
            gamma=self.gamma,
            n0_initial=self.n0_initial,
            theta=self.theta,
            j_coupling=self.j_coupling,
        )

    def classical_initial(self) -> ClassicalState:
        return initial_state(self.n0_initial, rho0=self.rho0, phi0=self.phi0)

    def resolved_dt_sample(self) -> float:
        if self.dt_sample is not None:
            return self.dt_sample
        return 0.05 if self.mode == "quantum" else 0.01

    def integrator_config(self, keep_dense=True) -> IntegratorConfig:
        return IntegratorConfig(
            t_end=self.t_end,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            dt_sample=self.resolved_dt_sample(),
            keep_dense=keep_dense,
        )

    def effective_n_max(self) -> int:
        if self.n_max is not None:
            return self.n_max
        return default_n_max(int(self.n0_initial), self.theta)

    def with_values(self, **kv) -> "RunConfig":
        return replace(self, **kv)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key == "mode":
        return raw.strip()
    if key in ("theta", "n_max"):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from exc


def parse_config_file(path=None, overrides=()) -> RunConfig:
    """Build a RunConfig from a key=value file and --set style overrides.

    Later assignments win; unknown keys are rejected.
    """
    values: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line.rstrip()!r}")
            key, raw = (part.strip() for part in body.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r} in --set")
        values[key] = _coerce(key, raw)
    return RunConfig(**values)


@dataclass(frozen=True)
class AxisSpec:
    """A swept parameter: name plus an inclusive linear grid."""

    name: str
    minimum: float
    maximum: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("axis count must be >= 2")
        if not (math.isfinite(self.minimum) and math.isfinite(self.maximum)):
            raise ConfigError("axis bounds must be finite")
        if self.maximum <= self.minimum:
            raise ConfigError("axis maximum must exceed minimum")

    def values(self):
        step = (self.maximum - self.minimum) / (self.count - 1)
        return [self.minimum + i * step for i in range(self.count)]


# axis name -> how it maps onto RunConfig fields
SWEEPABLE = ("gamma", "j_over_omega", "omega", "n0_initial", "rho0", "phi0")


def parse_axis(text: str) -> AxisSpec:
    """Parse name:min:max:count (the range form min:max:count is also used
    standalone for gamma ranges)."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"axis must be name:min:max:count, got {text!r}")
    name = parts[0].strip()
    if name not in SWEEPABLE:
        raise ConfigError(f"axis name must be one of {SWEEPABLE}, got {name!r}")
    try:
        lo, hi = float(parts[1]), float(parts[2])
        count = int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"bad axis specification {text!r}") from exc
    return AxisSpec(name, lo, hi, count)


def apply_axis_value(cfg: RunConfig, name: str, value: float) -> RunConfig:
    """Return a copy of cfg with one swept parameter applied."""
    if name == "j_over_omega":
        if value <= 0:
            raise ConfigError("j_over_omega must be > 0")
        return cfg.with_values(omega=cfg.j_coupling / value)
    return cfg.with_values(**{name: value})


@dataclass(frozen=True)
class SweepConfig:
    """A 2-D (or degenerate 1-D) grid of independent runs plus a reducer."""

    base: RunConfig
    axis1: AxisSpec
    axis2: Optional[AxisSpec]
    reducer: str
    workers: int = 1

    REDUCERS = ("rho_min", "spectral_density", "tau_first", "lyapunov")

    def __post_init__(self):
        if self.reducer not in self.REDUCERS:
            raise ConfigError(f"reducer must be one of {self.REDUCERS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.reducer == "spectral_density":
            if self.axis2 is not None:
                raise ConfigError("spectral_density sweeps take a single axis")
        elif self.axis2 is None:
            raise ConfigError("scalar reducers need axis1 and axis2")
