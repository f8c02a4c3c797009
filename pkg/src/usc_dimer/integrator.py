"""Adaptive embedded Runge-Kutta 5(4) kernels (Dormand-Prince pair).

The classical equations of motion are integrated in the real representation
y = (Re psi0, Im psi0, Re psi1, Im psi1); the tangent-augmented system
appends the four real components of a tangent displacement.  Both variants
run through one JIT-compiled kernel so that stiff runs (omega >> J,
requiring ~1e6 accepted steps over t = 100/J) stay in the seconds range.

Dense output uses the standard quartic continuous extension of the pair;
per-step interpolation coefficients are retained on request so that section
crossings can later be refined far below the sampling resolution.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Butcher tableau of the Dormand-Prince 5(4) pair
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.zeros((6, 5))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# embedded error coefficients (7 entries; the last stage is the FSAL stage)
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# quartic interpolant coefficients
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0

# kernel exit status
OK = 0
STEP_UNDERFLOW = 1
NEED_CAPACITY = 2


@njit(cache=True)
def _rhs(y, out, omega, j, gt, theta):
    """Equations of motion in real components; out has the same size as y.

    For size-8 vectors the last four components carry a tangent displacement
    propagated by the Jacobian of the flow.
    """
    a, b = y[0], y[1]
    c, d = y[2], y[3]
    n0 = a * a + b * b
    n1 = c * c + d * d
    jm = j * (1.0 - theta)
    jp = j * (1.0 + theta)
    out[0] = omega * b - jm * d + gt * n0 * b
    out[1] = -omega * a + jp * c - gt * n0 * a
    out[2] = omega * d - jm * b + gt * n1 * d
    out[3] = -omega * c + jp * a - gt * n1 * c
    if y.size == 8:
        va, vb, vc, vd = y[4], y[5], y[6], y[7]
        out[4] = 2.0 * gt * a * b * va + (omega + gt * (n0 + 2.0 * b * b)) * vb - jm * vd
        out[5] = -(omega + gt * (n0 + 2.0 * a * a)) * va - 2.0 * gt * a * b * vb + jp * vc
        out[6] = -jm * vb + 2.0 * gt * c * d * vc + (omega + gt * (n1 + 2.0 * d * d)) * vd
        out[7] = jp * va - (omega + gt * (n1 + 2.0 * c * c)) * vc - 2.0 * gt * c * d * vd


@njit(cache=True)
def _rms_scaled(e, y0, y1, atol, rtol):
    s = 0.0
    for i in range(e.size):
        m = abs(y0[i])
        if abs(y1[i]) > m:
            m = abs(y1[i])
        sc = atol + rtol * m
        r = e[i] / sc
        s += r * r
    return np.sqrt(s / e.size)


@njit(cache=True)
def _initial_step(y0, f0, t_end, atol, rtol, omega, j, gt, theta):
    n = y0.size
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d0 += (y0[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = np.empty(n)
    _rhs(y1, f1, omega, j, gt, theta)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y0[i])
        d2 += ((f1[i] - f0[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, t_end)


@njit(cache=True)
def _dp5_run(
    y0,
    t_end,
    rtol,
    atol,
    t_grid,
    samples,
    omega,
    j,
    gt,
    theta,
    h_first,
    max_step,
    renorm_dt,
    want_dense,
    dense_t,
    dense_h,
    dense_y,
    dense_q,
):
    """Integrate from t = 0 to t_end, filling `samples` on the uniform grid.

    renorm_dt > 0 turns on tangent renormalization (8-dim vectors only):
    whenever t reaches a multiple of renorm_dt, and at t_end, the tangent
    block is rescaled to unit norm and log(norm) is accumulated.

    Returns (status, n_steps, sum_log, t_reached).
    """
    n = y0.size
    y = y0.copy()
    t = 0.0
    nsamp = t_grid.size
    isamp = 0
    while isamp < nsamp and t_grid[isamp] <= 0.0:
        for d in range(n):
            samples[isamp, d] = y[d]
        isamp += 1

    K = np.empty((7, n))
    f0 = np.empty(n)
    _rhs(y, f0, omega, j, gt, theta)
    for d in range(n):
        K[0, d] = f0[d]

    sum_log = 0.0
    k_renorm = 1

    h = h_first
    if h <= 0.0:
        h = _initial_step(y, f0, t_end, atol, rtol, omega, j, gt, theta)
    if h > max_step:
        h = max_step

    underflow = 1e-14 * t_end
    ytmp = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)
    nsteps = 0
    cap = dense_t.size

    while t < t_end:
        if h < underflow:
            return STEP_UNDERFLOW, nsteps, sum_log, t
        # next event: tangent renormalization boundary or the final time
        t_event = t_end
        if renorm_dt > 0.0:
            rboundary = renorm_dt * k_renorm
            if rboundary < t_event:
                t_event = rboundary
        h_pre = h
        h_try = h
        hit_event = False
        if t + h_try >= t_event:
            h_try = t_event - t
            hit_event = True

        for s in range(1, 6):
            for d in range(n):
                acc = 0.0
                for q in range(s):
                    acc += _A[s, q] * K[q, d]
                ytmp[d] = y[d] + h_try * acc
            _rhs(ytmp, K[s], omega, j, gt, theta)
        for d in range(n):
            acc = 0.0
            for q in range(6):
                acc += _B[q] * K[q, d]
            ynew[d] = y[d] + h_try * acc
        _rhs(ynew, K[6], omega, j, gt, theta)
        for d in range(n):
            acc = 0.0
            for q in range(7):
                acc += _E[q] * K[q, d]
            err[d] = h_try * acc
        enorm = _rms_scaled(err, y, ynew, atol, rtol)

        if not np.isfinite(enorm) or enorm > 1.0:
            if np.isfinite(enorm) and enorm > 0.0:
                fac = _SAFETY * enorm**-0.2
                if fac < _MIN_FACTOR:
                    fac = _MIN_FACTOR
                if fac > 1.0:
                    fac = 1.0
            else:
                fac = _MIN_FACTOR
            h = h_try * fac
            continue

        t_new = t_event if hit_event else t + h_try

        if want_dense:
            if nsteps >= cap:
                return NEED_CAPACITY, nsteps, sum_log, t
            dense_t[nsteps] = t
            dense_h[nsteps] = h_try
            for d in range(n):
                dense_y[nsteps, d] = y[d]
                for p in range(4):
                    acc = 0.0
                    for q in range(7):
                        acc += K[q, d] * _P[q, p]
                    dense_q[nsteps, d, p] = acc

        while isamp < nsamp and t_grid[isamp] <= t_new + 1e-12:
            sg = (t_grid[isamp] - t) / h_try
            s2 = sg * sg
            for d in range(n):
                acc = 0.0
                for q in range(7):
                    acc += K[q, d] * (
                        _P[q, 0] * sg + _P[q, 1] * s2 + _P[q, 2] * s2 * sg + _P[q, 3] * s2 * s2
                    )
                samples[isamp, d] = y[d] + h_try * acc
            isamp += 1

        for d in range(n):
            y[d] = ynew[d]
            K[0, d] = K[6, d]
        t = t_new
        nsteps += 1

        if renorm_dt > 0.0 and (t >= renorm_dt * k_renorm or t >= t_end):
            g = 0.0
            for d in range(4, 8):
                g += y[d] * y[d]
            g = np.sqrt(g)
            if g <= 0.0 or not np.isfinite(g):
                return STEP_UNDERFLOW, nsteps, sum_log, t
            sum_log += np.log(g)
            for d in range(4, 8):
                y[d] /= g
                K[0, d] /= g  # tangent RHS is linear in the tangent block
            while renorm_dt * k_renorm <= t:
                k_renorm += 1

        if enorm == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * enorm**-0.2
            if fac > _MAX_FACTOR:
                fac = _MAX_FACTOR
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
        h = h_try * fac
        if hit_event and h < h_pre:
            # an event-clamped step must not shrink the controller state
            h = h_pre
        if h > max_step:
            h = max_step

    while isamp < nsamp:
        for d in range(n):
            samples[isamp, d] = y[d]
        isamp += 1
    return OK, nsteps, sum_log, t


class DenseSolution:
    """Piecewise-quartic continuous extension over the accepted steps."""

    def __init__(self, t_starts, h_steps, y_starts, q_coeffs, t_end):
        self.t_starts = t_starts
        self.h_steps = h_steps
        self.y_starts = y_starts
        self.q_coeffs = q_coeffs
        self.t_end = t_end

    def __call__(self, t):
        """Evaluate the interpolated real state vector at scalar time t."""
        i = int(np.searchsorted(self.t_starts, t, side="right")) - 1
        if i < 0:
            i = 0
        if i >= self.t_starts.size:
            i = self.t_starts.size - 1
        h = self.h_steps[i]
        sg = (t - self.t_starts[i]) / h
        powers = np.array([sg, sg**2, sg**3, sg**4])
        return self.y_starts[i] + h * (self.q_coeffs[i] @ powers)


def rhs_real(y, omega, j, gt, theta):
    """Python-callable view of the compiled RHS (4 or 8 components)."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty_like(y)
    _rhs(y, out, omega, j, gt, theta)
    return out


def dp5_solve(
    y0,
    t_end,
    rtol,
    atol,
    t_grid,
    omega,
    j,
    gt,
    theta,
    h_first=0.0,
    max_step=np.inf,
    renorm_dt=0.0,
    want_dense=False,
):
    """Driver around the compiled kernel; grows dense storage as needed.

    Returns (status, samples, sum_log, t_reached, dense_or_none) with status
    OK or STEP_UNDERFLOW.
    """
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    n = y0.size
    t_grid = np.ascontiguousarray(t_grid, dtype=np.float64)
    samples = np.empty((t_grid.size, n))
    cap = 65536 if want_dense else 0
    while True:
        dense_t = np.empty(cap)
        dense_h = np.empty(cap)
        dense_y = np.empty((cap, n))
        dense_q = np.empty((cap, n, 4))
        status, nsteps, sum_log, t_reached = _dp5_run(
            y0,
            float(t_end),
            float(rtol),
            float(atol),
            t_grid,
            samples,
            float(omega),
            float(j),
            float(gt),
            float(theta),
            float(h_first),
            float(max_step),
            float(renorm_dt),
            want_dense,
            dense_t,
            dense_h,
            dense_y,
            dense_q,
        )
        if status == NEED_CAPACITY:
            cap *= 4
            continue
        break
    dense = None
    if want_dense and status == OK:
        dense = DenseSolution(
            dense_t[:nsteps].copy(),
            dense_h[:nsteps].copy(),
            dense_y[:nsteps].copy(),
            dense_q[:nsteps].copy(),
            float(t_end),
        )
    return status, samples, sum_log, t_reached, dense
