"""Derived diagnostics: spectra, mode continuations, sections, chaos, tunneling.

Everything here is a pure function over immutable inputs, safe to evaluate
from parallel sweep workers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, EmptySeries, NotApplicable
from .model import ClassicalState, ModelParams, wrap_phase
from .semiclassical import IntegratorConfig, Trajectory, integrate_with_tangent

__all__ = [
    "SpectralDensity",
    "ModeFrequencies",
    "PoincareSection",
    "TunnelingStats",
    "spectral_density",
    "mode_frequencies",
    "chaos_window",
    "poincare_section",
    "lyapunov_max",
    "tunneling_stats",
]


@dataclass(frozen=True)
class SpectralDensity:
    """Normalized distribution of spectral weight over angular frequency.

    density sums to 1 and is >= 0 bin by bin; frequencies are the full
    (fftshifted, ascending) discrete grid.  A series exp(-i*nu0*t) puts its
    weight in the bin at -nu0.
    """

    frequencies: np.ndarray
    density: np.ndarray
    gamma: float = math.nan


def spectral_density(
    series0,
    series1,
    dt_sample: float,
    gamma: float = math.nan,
    subtract_mean: bool = False,
    hann: bool = False,
) -> SpectralDensity:
    """Combined normalized power spectrum of two equal-length series.

    g(nu) = (|f0(nu)|^2 + |f1(nu)|^2) / sum_nu (|f0|^2 + |f1|^2)

    with f_k the discrete Fourier transform of series k.  Classical usage
    transforms the complex amplitudes as they are; for expectation-value
    series the time mean should be subtracted first (subtract_mean=True),
    otherwise the zero-frequency bin swamps the distribution.  The window is
    rectangular unless hann is set (presentation runs only).
    """
    s0 = np.asarray(series0)
    s1 = np.asarray(series1)
    if s0.size < 2 or s1.size < 2:
        raise EmptySeries("need at least two samples per series")
    if s0.shape != s1.shape:
        raise ConfigError("series must have equal length")
    if dt_sample <= 0:
        raise ConfigError("dt_sample must be > 0")
    if subtract_mean:
        s0 = s0 - s0.mean()
        s1 = s1 - s1.mean()
    if hann:
        w = np.hanning(s0.size)
        s0 = s0 * w
        s1 = s1 * w
    f0 = np.fft.fft(s0)
    f1 = np.fft.fft(s1)
    power = np.abs(f0) ** 2 + np.abs(f1) ** 2
    total = power.sum()
    if total == 0.0:
        raise EmptySeries("series carry no spectral weight")
    nu = 2.0 * math.pi * np.fft.fftfreq(s0.size, d=dt_sample)
    return SpectralDensity(
        frequencies=np.fft.fftshift(nu),
        density=np.fft.fftshift(power / total),
        gamma=float(gamma),
    )


@dataclass(frozen=True)
class ModeFrequencies:
    """Nonlinear continuations of the linear normal modes.

    nu_sym / nu_anti are the principal square roots of the symmetric and
    antisymmetric radicands (imaginary when the mode has ceased to exist);
    the exists flags are radicand >= 0.
    """

    nu_sym: complex
    nu_anti: complex
    sym_exists: bool
    anti_exists: bool
    radicand_sym: float
    radicand_anti: float


def mode_frequencies(params: ModelParams, gamma: float) -> ModeFrequencies:
    """Continuation frequencies at dimensionless interaction strength gamma.

    nu_sym  = +-sqrt([omega + gamma*J/2 - J*(1-theta)] * [omega + gamma*J/2 - J*(1+theta)])
    nu_anti = +-sqrt([omega + gamma*J/2 + J*(1-theta)] * [omega + gamma*J/2 + J*(1+theta)])
    """
    w, j, th = params.omega, params.j_coupling, params.theta
    base = w + gamma * j / 2.0
    rad_sym = (base - j * (1.0 - th)) * (base - j * (1.0 + th))
    rad_anti = (base + j * (1.0 - th)) * (base + j * (1.0 + th))
    return ModeFrequencies(
        nu_sym=cmath.sqrt(rad_sym),
        nu_anti=cmath.sqrt(rad_anti),
        sym_exists=rad_sym >= 0.0,
        anti_exists=rad_anti >= 0.0,
        radicand_sym=rad_sym,
        radicand_anti=rad_anti,
    )


def chaos_window(params: ModelParams) -> Optional[tuple[float, float]]:
    """Interval of gamma in which at least one mode family is missing.

        -(2*omega/J + 4) < gamma < 4 - 2*omega/J

    Only the counter-rotating model loses modes; for theta = 0 the window is
    undefined (NotApplicable).  Returns None when the interval is empty.
    """
    if params.theta != 1:
        raise NotApplicable("the mode-existence window requires theta = 1")
    ratio = 2.0 * params.omega / params.j_coupling
    lo = -(ratio + 4.0)
    hi = 4.0 - ratio
    if lo >= hi:
        return None
    return (lo, hi)


@dataclass(frozen=True)
class PoincareSection:
    """Section points in the reduced (rho/N, phi) plane.

    For the norm-conserving model the section degenerates and all samples
    are returned; otherwise points sit on N(t) = <N> crossings taken in the
    direction of increasing N.
    """

    points: np.ndarray  # shape (n, 2): columns rho/N, phi
    section_level: float


def poincare_section(traj: Trajectory, refine_tol: float = 1e-9) -> PoincareSection:
    """Section of a trajectory through its mean-norm level set.

    Crossings are bracketed on the sampling grid and refined by bisection on
    the integrator's continuous output until the emitted points satisfy
    |N(t*) - <N>| < 1e-8 * <N>.
    """
    n_avg = float(traj.norm_n.mean())
    if traj.params.theta == 0:
        pts = np.column_stack([traj.imbalance_rho / traj.norm_n, traj.phase_phi])
        return PoincareSection(points=pts, section_level=n_avg)

    if traj.dense is None:
        raise ConfigError("poincare_section needs a trajectory with dense output")

    g = traj.norm_n - n_avg
    up = (g[:-1] < 0.0) & (g[1:] >= 0.0)
    idxs = np.nonzero(up)[0]
    pts = []
    for i in idxs:
        a, b = traj.times[i], traj.times[i + 1]
        t_star = None
        for _ in range(200):
            mtime = 0.5 * (a + b)
            y = traj.dense(mtime)
            gm = (y[0] ** 2 + y[1] ** 2 + y[2] ** 2 + y[3] ** 2) - n_avg
            if (b - a) <= refine_tol and abs(gm) <= 1e-8 * n_avg:
                t_star = mtime
                break
            if gm < 0.0:
                a = mtime
            else:
                b = mtime
        if t_star is None:
            t_star = 0.5 * (a + b)
        y = traj.dense(t_star)
        n0 = y[0] ** 2 + y[1] ** 2
        n1 = y[2] ** 2 + y[3] ** 2
        phi = wrap_phase(math.atan2(y[1], y[0]) - math.atan2(y[3], y[2]))
        pts.append(((n0 - n1) / (n0 + n1), phi))
    pts_arr = np.array(pts, dtype=np.float64).reshape(-1, 2)
    return PoincareSection(points=pts_arr, section_level=n_avg)


def lyapunov_max(
    initial: ClassicalState,
    params: ModelParams,
    cfg: IntegratorConfig,
    tangent0=(1.0 + 0.0j, 0.0 + 0.0j),
    renorm_dt: float = 1.0,
) -> float:
    """Maximal Lyapunov exponent from tangent co-integration.

    lambda_max = sum(log growth) / t_end, in units of J; positive values
    certify exponential sensitivity, values compatible with zero indicate
    regular (periodic or quasiperiodic) motion.
    """
    _, sum_log = integrate_with_tangent(initial, tangent0, params, cfg, renorm_dt=renorm_dt)
    return sum_log / cfg.t_end


@dataclass(frozen=True)
class TunnelingStats:
    """Zero crossings of the population imbalance and their statistics.

    tau_first is None when the imbalance never changes sign before the
    horizon (self-trapped dynamics: "not reached").  Times are dimensionless
    (multiplied by J by the caller when J != 1).
    """

    tau_first: Optional[float]
    crossings: np.ndarray
    intervals: np.ndarray
    bin_edges: np.ndarray
    probabilities: np.ndarray

    @property
    def reached(self) -> bool:
        return self.tau_first is not None


def tunneling_stats(times, rho_series, horizon=None, bins: int = 60, bin_width=None) -> TunnelingStats:
    """Locate imbalance sign changes and histogram the intervals between them.

    Roots are taken where the sampled imbalance changes sign, refined by
    linear interpolation between the two bracketing samples.  The histogram
    holds probability mass per bin (sums to 1); by default 60 equal bins
    span [0, max interval], or a fixed bin_width overrides the count.
    """
    t = np.asarray(times, dtype=np.float64)
    r = np.asarray(rho_series, dtype=np.float64)
    if t.size < 2 or r.size != t.size:
        raise EmptySeries("need two or more aligned samples")
    if r[0] <= 0.0:
        raise ConfigError("initial imbalance must be positive")
    if horizon is not None:
        keep = t <= horizon
        t, r = t[keep], r[keep]
        if t.size < 2:
            raise EmptySeries("horizon leaves fewer than two samples")

    s = np.sign(r)
    flip = np.nonzero(s[:-1] * s[1:] < 0.0)[0]
    roots = t[flip] + (t[flip + 1] - t[flip]) * r[flip] / (r[flip] - r[flip + 1])
    exact = np.nonzero(r == 0.0)[0]
    if exact.size:
        roots = np.unique(np.concatenate([roots, t[exact]]))

    tau_first = float(roots[0]) if roots.size else None
    intervals = np.diff(roots)
    if intervals.size:
        upper = float(intervals.max())
        if bin_width is not None:
            if bin_width <= 0:
                raise ConfigError("bin_width must be > 0")
            nbins = max(1, int(math.ceil(upper / bin_width)))
            edges = np.arange(nbins + 1) * bin_width
        else:
            if bins < 1:
                raise ConfigError("bins must be >= 1")
            edges = np.linspace(0.0, upper, bins + 1)
        counts, edges = np.histogram(intervals, bins=edges)
        prob = counts / counts.sum()
    else:
        edges = np.empty(0)
        prob = np.empty(0)
    return TunnelingStats(
        tau_first=tau_first,
        crossings=roots,
        intervals=intervals,
        bin_edges=edges,
        probabilities=prob,
    )
