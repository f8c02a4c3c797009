"""Core model: parameters, classical state, observables and equations of motion.

The system is a pair of nonlinear bosonic modes with amplitudes psi_0, psi_1
evolving under

    dpsi_k/dt = -i*omega*psi_k + i*J*(psi_{1-k} + theta*conj(psi_{1-k}))
                - i*gamma_tilde*|psi_k|^2*psi_k           (k = 0, 1)

theta = 0 drops the counter-rotating coupling (the integrable two-site
nonlinear Schroedinger dimer); theta = 1 keeps it, which breaks both the
norm conservation and the integrability of the dimer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "ModelParams",
    "ClassicalState",
    "ClassicalObservables",
    "eom_rhs",
    "classical_energy",
    "observables",
    "initial_state",
    "wrap_phase",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameter set.

    omega        bare mode frequency
    j_coupling   hopping amplitude J; nonzero (J = 1 is the conventional unit)
    gamma_tilde  bare onsite nonlinearity
    theta        counter-rotating switch, exactly 0 or 1
    n0_initial   initial excitation number N0 (real >= 0 classically,
                 integer >= 0 for the quantum model)

    The dimensionless interaction strength gamma = gamma_tilde*N0/J is always
    derived, never stored, so that (gamma_tilde, n0_initial, j_coupling)
    cannot fall out of sync with it.
    """

    omega: float
    j_coupling: float = 1.0
    gamma_tilde: float = 0.0
    theta: int = 0
    n0_initial: float = 1.0

    def __post_init__(self):
        for name in ("omega", "j_coupling", "gamma_tilde", "n0_initial"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v!r}")
        if self.j_coupling == 0.0:
            raise ConfigError("j_coupling must be nonzero")
        if self.theta not in (0, 1):
            raise ConfigError(f"theta must be exactly 0 or 1, got {self.theta!r}")
        if self.n0_initial < 0:
            raise ConfigError("n0_initial must be >= 0")

    @property
    def gamma(self) -> float:
        """Dimensionless interaction strength gamma_tilde * N0 / J."""
        return self.gamma_tilde * self.n0_initial / self.j_coupling

    @classmethod
    def from_gamma(cls, omega, gamma, n0_initial, theta, j_coupling=1.0):
        """Build a parameter set from the dimensionless interaction strength.

        Inverts gamma = gamma_tilde*N0/J, which requires n0_initial > 0.
        """
        if n0_initial <= 0:
            raise ConfigError("n0_initial must be > 0 to convert gamma")
        return cls(
            omega=omega,
            j_coupling=j_coupling,
            gamma_tilde=gamma * j_coupling / n0_initial,
            theta=theta,
            n0_initial=n0_initial,
        )


@dataclass(frozen=True)
class ClassicalState:
    """Pair of complex mode amplitudes at a given time (units of 1/J)."""

    psi0: complex
    psi1: complex
    time: float = 0.0

    def as_real(self) -> np.ndarray:
        """(Re psi0, Im psi0, Re psi1, Im psi1) as a float64 vector."""
        return np.array(
            [self.psi0.real, self.psi0.imag, self.psi1.real, self.psi1.imag],
            dtype=np.float64,
        )

    @classmethod
    def from_real(cls, y, time=0.0):
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), time)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.psi0.real, self.psi0.imag, self.psi1.real, self.psi1.imag)
        )


@dataclass(frozen=True)
class ClassicalObservables:
    """Derived scalars of a classical state.

    norm_n         N = |psi0|^2 + |psi1|^2
    imbalance_rho  rho = n0 - n1
    phase_phi      phi = arg(psi0) - arg(psi1), wrapped to (-pi, pi];
                   arg(0) := 0 so the map is total
    energy_h       value of the classical Hamiltonian
    """

    norm_n: float
    imbalance_rho: float
    phase_phi: float
    energy_h: float


def wrap_phase(phi):
    """Wrap an angle (scalar or array) to the interval (-pi, pi]."""
    w = np.mod(np.asarray(phi) + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    if np.ndim(phi) == 0:
        return float(w)
    return w


def eom_rhs(state: ClassicalState, params: ModelParams):
    """Right-hand side of the equations of motion, (dpsi0/dt, dpsi1/dt).

    Total on finite inputs; equals -i d/d(conj(psi_k)) of classical_energy.
    """
    p0, p1 = state.psi0, state.psi1
    w, j, gt, th = params.omega, params.j_coupling, params.gamma_tilde, params.theta
    d0 = -1j * w * p0 + 1j * j * (p1 + th * p1.conjugate()) - 1j * gt * abs(p0) ** 2 * p0
    d1 = -1j * w * p1 + 1j * j * (p0 + th * p0.conjugate()) - 1j * gt * abs(p1) ** 2 * p1
    return d0, d1


def classical_energy(state: ClassicalState, params: ModelParams) -> float:
    """Mean-field Hamiltonian generating eom_rhs.

    H = sum_k [omega*n_k + (gamma_tilde/2)*n_k^2]
        - J*(2*Re(conj(psi0)*psi1) + 2*theta*Re(psi0*psi1))

    Note n_k^2 here: the classical limit replaces n_k*(n_k - 1) by n_k^2.
    """
    p0, p1 = state.psi0, state.psi1
    w, j, gt, th = params.omega, params.j_coupling, params.gamma_tilde, params.theta
    n0 = abs(p0) ** 2
    n1 = abs(p1) ** 2
    hop = 2.0 * (p0.conjugate() * p1).real
    counter = 2.0 * (p0 * p1).real
    return w * (n0 + n1) + 0.5 * gt * (n0 * n0 + n1 * n1) - j * (hop + th * counter)


def observables(state: ClassicalState, params: ModelParams) -> ClassicalObservables:
    """Norm, imbalance, phase difference and energy of a classical state."""
    n0 = abs(state.psi0) ** 2
    n1 = abs(state.psi1) ** 2
    # np.angle(0) == 0, which realizes the arg(0) := 0 convention
    phi = wrap_phase(np.angle(state.psi0) - np.angle(state.psi1))
    return ClassicalObservables(
        norm_n=n0 + n1,
        imbalance_rho=n0 - n1,
        phase_phi=phi,
        energy_h=classical_energy(state, params),
    )


def initial_state(n0_initial, rho0=1.0, phi0=0.0) -> ClassicalState:
    """Classical initial condition with total norm N0 and imbalance rho0*N0.

    rho0 = 1 is the conventional fully imbalanced start (sqrt(N0), 0).
    phi0 is the initial phase difference arg(psi0) - arg(psi1); it is carried
    by psi1 so that psi0 stays real and positive.
    """
    if not -1.0 <= rho0 <= 1.0:
        raise ConfigError("rho0 must lie in [-1, 1]")
    if n0_initial < 0:
        raise ConfigError("n0_initial must be >= 0")
    n0 = n0_initial * (1.0 + rho0) / 2.0
    n1 = n0_initial * (1.0 - rho0) / 2.0
    return ClassicalState(
        psi0=complex(math.sqrt(n0), 0.0),
        psi1=math.sqrt(n1) * complex(math.cos(phi0), -math.sin(phi0)),
        time=0.0,
    )
