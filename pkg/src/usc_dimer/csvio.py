"""CSV writers for every export schema.

All files are UTF-8 with Unix newlines and a mandatory header row; floats
carry 17 significant digits so that values round-trip losslessly.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "fmt",
    "write_rows",
    "write_trajectory",
    "write_evolution",
    "write_eigenvalues",
    "write_spectral_rows",
    "write_modes_table",
    "write_poincare",
    "write_tunneling",
    "write_histogram",
    "write_sweep",
]


def fmt(x) -> str:
    """Render one scalar: floats with 17 significant digits, ints verbatim."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def write_trajectory(traj, path):
    header = ["t", "re_psi0", "im_psi0", "re_psi1", "im_psi1", "N", "rho", "phi", "H"]
    rows = zip(
        traj.times,
        traj.psi0.real,
        traj.psi0.imag,
        traj.psi1.real,
        traj.psi1.imag,
        traj.norm_n,
        traj.imbalance_rho,
        traj.phase_phi,
        traj.energy_h,
    )
    write_rows(path, header, rows)


def write_evolution(ev, path):
    header = ["t", "n0", "n1", "rho", "N", "leakage"]
    rows = zip(ev.times, ev.n0_t, ev.n1_t, ev.rho_t, ev.total_t, ev.leakage_t)
    write_rows(path, header, rows)


def write_eigenvalues(eigenvalues, path):
    write_rows(path, ["index", "eigenvalue"], enumerate(eigenvalues))


def write_spectral_rows(path, labeled_densities, label_name="gamma", positive_only=False):
    """Long-format spectral map: one row per (label, frequency) cell."""

    def rows():
        for label, sd in labeled_densities:
            for nu, g in zip(sd.frequencies, sd.density):
                if positive_only and nu < 0.0:
                    continue
                yield (label, nu, g)

    write_rows(path, [label_name, "nu", "g"], rows())


def write_modes_table(path, gammas, modes):
    """Mode-continuation table; branches are NaN where the mode is missing."""
    header = [
        "gamma",
        "nu_sym_plus",
        "nu_sym_minus",
        "nu_anti_plus",
        "nu_anti_minus",
        "sym_exists",
        "anti_exists",
    ]

    def rows():
        for g, m in zip(gammas, modes):
            sym = m.nu_sym.real if m.sym_exists else math.nan
            anti = m.nu_anti.real if m.anti_exists else math.nan
            yield (g, sym, -sym, anti, -anti, int(m.sym_exists), int(m.anti_exists))

    write_rows(path, header, rows())


def write_poincare(section, path):
    write_rows(path, ["rho_over_N", "phi"], ((p[0], p[1]) for p in section.points))


def write_tunneling(stats, path):
    """Crossing list; the final crossing has no following interval (NaN)."""

    def rows():
        n = stats.crossings.size
        for i in range(n):
            delta = stats.intervals[i] if i < n - 1 else math.nan
            yield (i, stats.crossings[i], delta)

    write_rows(path, ["i", "tau_i", "delta_tau_i"], rows())


def write_histogram(stats, path):
    def rows():
        for i in range(stats.probabilities.size):
            yield (stats.bin_edges[i], stats.bin_edges[i + 1], stats.probabilities[i])

    write_rows(path, ["bin_left", "bin_right", "p"], rows())


def write_sweep(path, axis1_values, axis2_values, values):
    """Row-major long-format grid: axis1 outer, axis2 inner."""

    def rows():
        for i, a1 in enumerate(axis1_values):
            for k, a2 in enumerate(axis2_values):
                yield (a1, a2, values[i, k])

    write_rows(path, ["axis1", "axis2", "value"], rows())
