"""Parallel evaluation of parameter grids.

Every cell is an independent pure simulation; results are collected by cell
index and merged in row-major order, so the output is byte-identical no
matter how many workers executed the grid.  A failing cell becomes NaN plus
one line in the warnings sidecar; it never aborts the sweep.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from . import analysis, quantum
from .config import RunConfig, SweepConfig, apply_axis_value
from .errors import ConfigError, UscDimerError
from .semiclassical import integrate, rho_min

__all__ = ["evaluate_cell", "run_grid", "run_spectral_sweep"]


def _classical_trajectory(cfg: RunConfig, keep_dense=False):
    return integrate(cfg.classical_initial(), cfg.model_params(), cfg.integrator_config(keep_dense))


def _quantum_evolution(cfg: RunConfig):
    params = cfg.model_params()
    basis = quantum.FockBasis(cfg.effective_n_max())
    h = quantum.build_hamiltonian(params, basis)
    times = cfg.integrator_config().time_grid()
    return quantum.evolve(h, (int(cfg.n0_initial), 0), times, leakage_tol=cfg.leakage_tol)


def _reduce_scalar(cfg: RunConfig, reducer: str) -> float:
    if reducer == "rho_min":
        if cfg.mode != "classical":
            raise ConfigError("rho_min reduces classical runs")
        return rho_min(_classical_trajectory(cfg))
    if reducer == "lyapunov":
        if cfg.mode != "classical":
            raise ConfigError("lyapunov reduces classical runs")
        return analysis.lyapunov_max(
            cfg.classical_initial(),
            cfg.model_params(),
            cfg.integrator_config(keep_dense=False),
            renorm_dt=1.0 / abs(cfg.j_coupling),
        )
    if reducer == "tau_first":
        j = abs(cfg.j_coupling)
        if cfg.mode == "classical":
            traj = _classical_trajectory(cfg)
            stats = analysis.tunneling_stats(j * traj.times, traj.imbalance_rho)
        else:
            ev = _quantum_evolution(cfg)
            stats = analysis.tunneling_stats(j * ev.times, ev.rho_t)
        return stats.tau_first if stats.reached else math.inf
    raise ConfigError(f"unknown scalar reducer {reducer!r}")


def _cell_spectrum(cfg: RunConfig) -> analysis.SpectralDensity:
    if cfg.mode == "classical":
        traj = _classical_trajectory(cfg)
        return analysis.spectral_density(
            traj.psi0, traj.psi1, cfg.resolved_dt_sample(), gamma=cfg.gamma
        )
    ev = _quantum_evolution(cfg)
    return analysis.spectral_density(
        ev.n0_t, ev.n1_t, cfg.resolved_dt_sample(), gamma=cfg.gamma, subtract_mean=True
    )


def evaluate_cell(task):
    """Run one grid cell; returns (index, payload, warning_or_None).

    Module-level so process pools can pickle it.  Payload is a float for
    scalar reducers or (frequencies, density) for spectral cells; failures
    yield NaN payloads plus a warning string.
    """
    index, cfg, assignments, reducer = task
    try:
        for name, value in assignments:
            cfg = apply_axis_value(cfg, name, value)
        if reducer == "spectral_density":
            sd = _cell_spectrum(cfg)
            return index, (sd.frequencies, sd.density), None
        return index, _reduce_scalar(cfg, reducer), None
    except (UscDimerError, FloatingPointError) as exc:
        label = ", ".join(f"{n}={v:.17g}" for n, v in assignments)
        warning = f"cell {index} ({label}): {type(exc).__name__}: {exc}"
        if reducer == "spectral_density":
            return index, (np.array([math.nan]), np.array([math.nan])), warning
        return index, math.nan, warning


def _run_tasks(tasks, workers: int):
    if workers <= 1:
        return [evaluate_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate_cell, tasks, chunksize=1))


def run_grid(sweep: SweepConfig):
    """Evaluate a scalar reducer over the full 2-D grid.

    Returns (axis1_values, axis2_values, value_grid, warnings).
    """
    a1 = sweep.axis1.values()
    a2 = sweep.axis2.values()
    tasks = []
    idx = 0
    for v1 in a1:
        for v2 in a2:
            tasks.append(
                (idx, sweep.base, ((sweep.axis1.name, v1), (sweep.axis2.name, v2)), sweep.reducer)
            )
            idx += 1
    results = _run_tasks(tasks, sweep.workers)
    grid = np.full((len(a1), len(a2)), math.nan)
    warnings = []
    for index, value, warning in results:
        grid[index // len(a2), index % len(a2)] = value
        if warning:
            warnings.append(warning)
    return a1, a2, grid, warnings


def run_spectral_sweep(sweep: SweepConfig):
    """Evaluate spectral densities along a single axis.

    Returns (axis1_values, [(value, SpectralDensity-like tuple)], warnings);
    failed cells carry single-NaN placeholders.
    """
    a1 = sweep.axis1.values()
    tasks = [
        (i, sweep.base, ((sweep.axis1.name, v),), "spectral_density") for i, v in enumerate(a1)
    ]
    results = _run_tasks(tasks, sweep.workers)
    by_index: dict = {}
    warnings = []
    for index, payload, warning in results:
        by_index[index] = payload
        if warning:
            warnings.append(warning)
    spectra = [(a1[i], by_index[i]) for i in range(len(a1))]
    return a1, spectra, warnings
