"""Simulation toolkit for the ultra-strongly coupled two-site bosonic junction.

Classical (mean-field) and quantum dynamics of two nonlinear bosonic modes,
with and without the counter-rotating coupling terms: self-trapping maps,
spectral densities, mode continuations, Poincare sections, Lyapunov
exponents and tunneling-time statistics.
"""

from .analysis import (
    ModeFrequencies,
    PoincareSection,
    SpectralDensity,
    TunnelingStats,
    chaos_window,
    lyapunov_max,
    mode_frequencies,
    poincare_section,
    spectral_density,
    tunneling_stats,
)
from .errors import (
    ConfigError,
    DegenerateNorm,
    EmptySeries,
    NotApplicable,
    StepSizeUnderflow,
    UnconvergedCutoff,
    UscDimerError,
)
from .model import (
    ClassicalObservables,
    ClassicalState,
    ModelParams,
    classical_energy,
    eom_rhs,
    initial_state,
    observables,
)
from .quantum import (
    FockBasis,
    HamiltonianMatrix,
    QuantumEvolution,
    build_hamiltonian,
    convergence_scan,
    default_n_max,
    eigensystem,
    evolve,
)
from .semiclassical import (
    IntegratorConfig,
    Trajectory,
    integrate,
    integrate_with_tangent,
    rho_min,
)

__version__ = "0.1.0"

__all__ = [
    "ClassicalObservables",
    "ClassicalState",
    "ConfigError",
    "DegenerateNorm",
    "EmptySeries",
    "FockBasis",
    "HamiltonianMatrix",
    "IntegratorConfig",
    "ModeFrequencies",
    "ModelParams",
    "NotApplicable",
    "PoincareSection",
    "QuantumEvolution",
    "SpectralDensity",
    "StepSizeUnderflow",
    "Trajectory",
    "TunnelingStats",
    "UnconvergedCutoff",
    "UscDimerError",
    "build_hamiltonian",
    "chaos_window",
    "classical_energy",
    "convergence_scan",
    "default_n_max",
    "eigensystem",
    "eom_rhs",
    "evolve",
    "initial_state",
    "integrate",
    "integrate_with_tangent",
    "lyapunov_max",
    "mode_frequencies",
    "observables",
    "poincare_section",
    "rho_min",
    "spectral_density",
    "tunneling_stats",
]
