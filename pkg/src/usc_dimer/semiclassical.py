"""Time integration of the classical junction and trajectory containers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import integrator
from .errors import ConfigError, DegenerateNorm, StepSizeUnderflow
from .model import ClassicalState, ModelParams, wrap_phase

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "integrate_with_tangent",
    "rho_min",
]

NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-step controller settings and output grid.

    All times are in units of 1/J under the conventional J = 1 normalization.
    """

    t_end: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_sample: float = 0.01
    keep_dense: bool = True
    max_step: float = math.inf
    first_step: float = 0.0  # 0 selects the step automatically

    def __post_init__(self):
        if not (self.t_end > 0):
            raise ConfigError("t_end must be > 0")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be > 0")
        if not (self.dt_sample > 0):
            raise ConfigError("dt_sample must be > 0")

    def time_grid(self) -> np.ndarray:
        n = int(math.floor(self.t_end / self.dt_sample + 1e-9)) + 1
        return np.arange(n) * self.dt_sample


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution with per-sample observables.

    The amplitude arrays are aligned with `times`; `dense` (when retained)
    interpolates the underlying solution between samples, which the section
    and root refinements rely on.
    """

    params: ModelParams
    times: np.ndarray
    psi0: np.ndarray
    psi1: np.ndarray
    norm_n: np.ndarray
    imbalance_rho: np.ndarray
    phase_phi: np.ndarray
    energy_h: np.ndarray
    dense: Optional[integrator.DenseSolution] = field(default=None, repr=False)

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> ClassicalState:
        return ClassicalState(complex(self.psi0[i]), complex(self.psi1[i]), float(self.times[i]))


def _observable_arrays(params, samples):
    psi0 = samples[:, 0] + 1j * samples[:, 1]
    psi1 = samples[:, 2] + 1j * samples[:, 3]
    n0 = samples[:, 0] ** 2 + samples[:, 1] ** 2
    n1 = samples[:, 2] ** 2 + samples[:, 3] ** 2
    norm = n0 + n1
    rho = n0 - n1
    phi = wrap_phase(np.angle(psi0) - np.angle(psi1))
    w, j, gt, th = params.omega, params.j_coupling, params.gamma_tilde, params.theta
    hop = 2.0 * (psi0.conjugate() * psi1).real
    counter = 2.0 * (psi0 * psi1).real
    energy = w * norm + 0.5 * gt * (n0 * n0 + n1 * n1) - j * (hop + th * counter)
    return psi0, psi1, norm, rho, phi, energy


def integrate(initial: ClassicalState, params: ModelParams, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the equations of motion and resample on the uniform grid.

    Raises StepSizeUnderflow when the controller collapses below
    1e-14 * t_end (stiff blow-up; reported, never silently truncated).
    """
    if not initial.is_finite():
        raise ConfigError("initial state must be finite")
    t_grid = cfg.time_grid()
    status, samples, _, t_reached, dense = integrator.dp5_solve(
        initial.as_real(),
        cfg.t_end,
        cfg.rel_tol,
        cfg.abs_tol,
        t_grid,
        params.omega,
        params.j_coupling,
        params.gamma_tilde,
        params.theta,
        h_first=cfg.first_step,
        max_step=cfg.max_step,
        want_dense=cfg.keep_dense,
    )
    if status != integrator.OK:
        raise StepSizeUnderflow(
            f"step size underflow at t = {t_reached:.6g} of {cfg.t_end:.6g} "
            f"(omega={params.omega}, gamma_tilde={params.gamma_tilde}, theta={params.theta})"
        )
    if not np.all(np.isfinite(samples)):
        raise StepSizeUnderflow("integration produced non-finite amplitudes")
    psi0, psi1, norm, rho, phi, energy = _observable_arrays(params, samples)
    return Trajectory(params, t_grid, psi0, psi1, norm, rho, phi, energy, dense)


def integrate_with_tangent(
    initial: ClassicalState,
    tangent0,
    params: ModelParams,
    cfg: IntegratorConfig,
    renorm_dt: float = 1.0,
):
    """Co-integrate the variational system along the trajectory.

    tangent0 is the initial tangent displacement, either a complex pair
    (dpsi0, dpsi1) or its four real components; it must be nonzero.  The
    tangent is renormalized to unit length every renorm_dt, accumulating
    sum(log growth); the maximal Lyapunov exponent is sum_log / t_end.

    Returns (Trajectory, sum_log).
    """
    v0 = np.asarray(tangent0)
    if v0.size == 2:
        v0 = np.array([v0[0].real, v0[0].imag, v0[1].real, v0[1].imag], dtype=np.float64)
    elif v0.size == 4:
        v0 = v0.real.astype(np.float64)
    else:
        raise ConfigError("tangent0 must have 2 complex or 4 real components")
    nrm = float(np.linalg.norm(v0))
    if nrm == 0.0 or not np.isfinite(nrm):
        raise ConfigError("tangent0 must be nonzero and finite")
    if renorm_dt <= 0:
        raise ConfigError("renorm_dt must be > 0")
    y0 = np.concatenate([initial.as_real(), v0 / nrm])
    t_grid = cfg.time_grid()
    status, samples, sum_log, t_reached, _ = integrator.dp5_solve(
        y0,
        cfg.t_end,
        cfg.rel_tol,
        cfg.abs_tol,
        t_grid,
        params.omega,
        params.j_coupling,
        params.gamma_tilde,
        params.theta,
        h_first=cfg.first_step,
        max_step=cfg.max_step,
        renorm_dt=renorm_dt,
        want_dense=False,
    )
    if status != integrator.OK:
        raise StepSizeUnderflow(
            f"step size underflow at t = {t_reached:.6g} during tangent co-integration"
        )
    psi0, psi1, norm, rho, phi, energy = _observable_arrays(params, samples[:, :4])
    traj = Trajectory(params, t_grid, psi0, psi1, norm, rho, phi, energy, None)
    return traj, float(sum_log)


def rho_min(traj: Trajectory) -> float:
    """Minimal normalized imbalance min_t rho(t)/N(t) over the sampled grid.

    The self-trapping witness: close to -1 for full tunneling, locked near +1
    when the initial imbalance never reverses.
    """
    if len(traj) == 0:
        raise ConfigError("empty trajectory")
    if np.any(traj.norm_n < NORM_FLOOR):
        raise DegenerateNorm(f"total norm fell below {NORM_FLOOR:g}")
    return float(np.min(traj.imbalance_rho / traj.norm_n))
