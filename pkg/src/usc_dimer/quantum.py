"""Two-mode quantum model: truncated Fock basis, dense diagonalization, evolution.

The Hamiltonian is

    H = sum_k [omega*n_k + (gamma_tilde/2)*n_k*(n_k-1)]
        - J*(a0^dag a1 + h.c.) - J*theta*(a0^dag a1^dag + h.c.)

assembled in the product basis |n0> x |n1> with a per-mode cutoff n_max.
Evolution of an initial Fock state goes through one full Hermitian
eigendecomposition, so a single factorization serves every output time.
Probability reaching the boundary shells n_k = n_max ("leakage") measures
the truncation error and is never silently accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import ConfigError, UnconvergedCutoff
from .model import ModelParams

__all__ = [
    "FockBasis",
    "HamiltonianMatrix",
    "QuantumEvolution",
    "ScanRow",
    "clipped_boundary_mask",
    "default_n_max",
    "build_hamiltonian",
    "eigensystem",
    "evolve",
    "convergence_scan",
    "converged_at",
]

DEFAULT_LEAKAGE_TOL = 1e-6
_TIME_CHUNK = 4000


@dataclass(frozen=True)
class FockBasis:
    """Product Fock basis {|n0> x |n1> : 0 <= n0, n1 <= n_max}.

    Flat index = n0*(n_max+1) + n1, a bijection onto 0..dim-1.
    """

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** 2

    def index(self, n0: int, n1: int) -> int:
        if not (0 <= n0 <= self.n_max and 0 <= n1 <= self.n_max):
            raise ConfigError(f"occupation ({n0}, {n1}) outside basis with n_max={self.n_max}")
        return n0 * (self.n_max + 1) + n1

    def occupations(self, i: int):
        m = self.n_max + 1
        return divmod(int(i), m)

    def occupation_arrays(self):
        """(n0, n1) occupation numbers of every flat index, as float arrays."""
        m = self.n_max + 1
        n = np.arange(m, dtype=np.float64)
        return np.repeat(n, m), np.tile(n, m)


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hermitian operator in a FockBasis.

    Hermitian by construction: only the lower triangle is assembled and then
    mirrored, so max|H - H^dag| is exactly zero.
    """

    basis: FockBasis
    params: ModelParams
    entries: np.ndarray = field(repr=False)


def clipped_boundary_mask(basis: FockBasis, theta: int) -> np.ndarray:
    """Boundary-shell states whose couplings get clipped by the truncation.

    For theta = 1 the pair terms connect every shell state outward, so the
    mask is the full shells n0 = n_max or n1 = n_max.  For theta = 0 the two
    corner states (n_max, 0) and (0, n_max) only couple outward with zero
    amplitude and are excluded; number conservation then makes a cutoff at
    n_max = N0 exact, with identically zero leakage.
    """
    n0, n1 = basis.occupation_arrays()
    m = basis.n_max
    shell = (n0 == m) | (n1 == m)
    if theta == 1:
        return shell
    corners = ((n0 == m) & (n1 == 0)) | ((n0 == 0) & (n1 == m))
    return shell & ~corners


def default_n_max(n0_initial: int, theta: int) -> int:
    """Cutoff policy: exactly N0 suffices when the total number is conserved;
    the counter-rotating terms need headroom for pair creation."""
    n0 = int(n0_initial)
    if theta == 0:
        return max(n0, 1)
    return max(2 * n0, n0 + 10)


def build_hamiltonian(params: ModelParams, basis: FockBasis) -> HamiltonianMatrix:
    """Assemble the dense Hamiltonian.

    Nonzero elements:
      <n0,n1|H|n0,n1>       = sum_k [omega*n_k + (gamma_tilde/2)*n_k*(n_k-1)]
      <n0+1,n1-1|H|n0,n1>   = -J*sqrt((n0+1)*n1)
      <n0+1,n1+1|H|n0,n1>   = -J*theta*sqrt((n0+1)*(n1+1))
    """
    w, j, gt, th = params.omega, params.j_coupling, params.gamma_tilde, params.theta
    m = basis.n_max + 1
    dim = basis.dim
    n0, n1 = basis.occupation_arrays()
    h = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    h[idx, idx] = w * (n0 + n1) + 0.5 * gt * (n0 * (n0 - 1.0) + n1 * (n1 - 1.0))

    # hopping, lower triangle rows (n0+1, n1-1)
    mask = (n0 < basis.n_max) & (n1 >= 1)
    rows = ((n0[mask] + 1) * m + (n1[mask] - 1)).astype(np.intp)
    cols = (n0[mask] * m + n1[mask]).astype(np.intp)
    h[rows, cols] = -j * np.sqrt((n0[mask] + 1.0) * n1[mask])

    if th == 1:
        # counter-rotating pair terms, lower triangle rows (n0+1, n1+1)
        mask = (n0 < basis.n_max) & (n1 < basis.n_max)
        rows = ((n0[mask] + 1) * m + (n1[mask] + 1)).astype(np.intp)
        cols = (n0[mask] * m + n1[mask]).astype(np.intp)
        h[rows, cols] = -j * np.sqrt((n0[mask] + 1.0) * (n1[mask] + 1.0))

    # mirror the strictly lower triangle
    h = np.tril(h) + np.tril(h, -1).conj().T
    return HamiltonianMatrix(basis=basis, params=params, entries=h)


def eigensystem(h: HamiltonianMatrix):
    """Full Hermitian eigendecomposition (eigenvalues, eigenvectors).

    All matrix elements here are real, so the symmetric real path is taken
    when possible; eigenvectors then come back as float64.
    """
    m = h.entries
    if np.all(m.imag == 0.0):
        return scipy.linalg.eigh(m.real)
    return scipy.linalg.eigh(m)


@dataclass(frozen=True)
class QuantumEvolution:
    """Expectation-value series of an initial Fock state.

    norm_t stays at 1 to within the eigendecomposition roundoff (unitary
    evolution); leakage_t is the probability mass in the boundary-shell
    states whose couplings are clipped by the truncation (see
    clipped_boundary_mask) at each sample.
    """

    times: np.ndarray
    n0_t: np.ndarray
    n1_t: np.ndarray
    norm_t: np.ndarray
    leakage_t: np.ndarray
    n_max: int
    leakage_tol: float = DEFAULT_LEAKAGE_TOL

    @property
    def rho_t(self) -> np.ndarray:
        return self.n0_t - self.n1_t

    @property
    def total_t(self) -> np.ndarray:
        return self.n0_t + self.n1_t

    @property
    def max_leakage(self) -> float:
        return float(self.leakage_t.max())

    @property
    def converged(self) -> bool:
        return self.max_leakage < self.leakage_tol


def evolve(
    h: HamiltonianMatrix,
    initial,
    times,
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
    check_convergence: bool = True,
    eig=None,
) -> QuantumEvolution:
    """Evolve the product Fock state |n0(0)> x |n1(0)> and record expectations.

    |psi(t)> = V exp(-i*Lambda*t) V^dag |psi(0)> from the full
    eigendecomposition (precomputable via `eig`).  Raises UnconvergedCutoff
    when the boundary-shell leakage exceeds leakage_tol, unless
    check_convergence is off (the truncated model is then taken as the
    defined object and the leakage series reports the truncation error).
    """
    basis = h.basis
    n0_in, n1_in = int(initial[0]), int(initial[1])
    start = basis.index(n0_in, n1_in)
    times = np.ascontiguousarray(times, dtype=np.float64)
    if eig is None:
        eig = eigensystem(h)
    lam, vecs = eig

    n0_occ, n1_occ = basis.occupation_arrays()
    boundary = clipped_boundary_mask(basis, h.params.theta)

    coeff = vecs.conj().T[:, start] if np.iscomplexobj(vecs) else vecs.T[:, start]
    weighted = vecs * coeff[np.newaxis, :]

    nt = times.size
    n0_t = np.empty(nt)
    n1_t = np.empty(nt)
    norm_t = np.empty(nt)
    leak_t = np.empty(nt)
    real_vecs = not np.iscomplexobj(weighted)
    for s in range(0, nt, _TIME_CHUNK):
        tb = times[s : s + _TIME_CHUNK]
        if real_vecs:
            # two real GEMMs on contiguous cos/sin blocks beat one complex
            # GEMM for a real eigenbasis (and avoid strided .real views,
            # which fall off the BLAS fast path)
            arg = lam[:, np.newaxis] * tb[np.newaxis, :]
            re = weighted @ np.cos(arg)
            im = weighted @ np.sin(arg)
            prob = re * re + im * im
        else:
            phase = np.exp(-1j * lam[:, np.newaxis] * tb[np.newaxis, :])
            amp = weighted @ phase
            prob = amp.real**2 + amp.imag**2
        n0_t[s : s + _TIME_CHUNK] = n0_occ @ prob
        n1_t[s : s + _TIME_CHUNK] = n1_occ @ prob
        norm_t[s : s + _TIME_CHUNK] = prob.sum(axis=0)
        leak_t[s : s + _TIME_CHUNK] = prob[boundary].sum(axis=0)

    out = QuantumEvolution(
        times=times,
        n0_t=n0_t,
        n1_t=n1_t,
        norm_t=norm_t,
        leakage_t=leak_t,
        n_max=basis.n_max,
        leakage_tol=leakage_tol,
    )
    if check_convergence and not out.converged:
        raise UnconvergedCutoff(
            f"boundary-shell leakage {out.max_leakage:.3e} exceeds {leakage_tol:g} "
            f"at n_max={basis.n_max}; raise n_max and retry"
        )
    return out


@dataclass(frozen=True)
class ScanRow:
    """One cutoff of a convergence scan."""

    n_max: int
    dim: int
    max_leakage: float
    drift: float  # max |<n0(t)> difference| against the previous cutoff
    converged: bool


def convergence_scan(
    params: ModelParams,
    initial,
    times,
    n_max_list: Sequence[int],
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
) -> list[ScanRow]:
    """Re-run the evolution at increasing cutoffs and report stability.

    A cutoff is declared converged when both its own max leakage and the
    max |<n0(t)>| drift against the previous cutoff fall below leakage_tol.
    """
    n_max_list = list(n_max_list)
    if any(a >= b for a, b in zip(n_max_list, n_max_list[1:])):
        raise ConfigError("n_max list must be strictly increasing")
    rows = []
    prev_n0 = None
    for n_max in n_max_list:
        basis = FockBasis(n_max)
        h = build_hamiltonian(params, basis)
        ev = evolve(h, initial, times, leakage_tol=leakage_tol, check_convergence=False)
        drift = math.inf if prev_n0 is None else float(np.max(np.abs(ev.n0_t - prev_n0)))
        rows.append(
            ScanRow(
                n_max=n_max,
                dim=basis.dim,
                max_leakage=ev.max_leakage,
                drift=drift,
                converged=(ev.max_leakage < leakage_tol and drift < leakage_tol),
            )
        )
        prev_n0 = ev.n0_t
    return rows


def converged_at(rows: Sequence[ScanRow], leakage_tol: float = DEFAULT_LEAKAGE_TOL):
    """Smallest scanned cutoff that is already sufficient.

    A cutoff qualifies when its own leakage is below tolerance and the next
    scanned cutoff moves <n0(t)> by less than the tolerance.  Returns None
    when no scanned cutoff qualifies.
    """
    for row, nxt in zip(rows, rows[1:]):
        if row.max_leakage < leakage_tol and nxt.drift < leakage_tol:
            return row.n_max
    return None
