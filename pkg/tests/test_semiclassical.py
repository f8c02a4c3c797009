"""Integration tests: conservation, oracles, symmetry maps, determinism."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from usc_dimer import (
    ClassicalState,
    ConfigError,
    DegenerateNorm,
    IntegratorConfig,
    ModelParams,
    StepSizeUnderflow,
    initial_state,
    integrate,
    integrate_with_tangent,
    rho_min,
)


def linear_counter_rotating_matrix(w, j):
    """Real-form generator of the gamma_tilde = 0, theta = 1 system."""
    return np.array(
        [
            [0.0, w, 0.0, 0.0],
            [-w, 0.0, 2.0 * j, 0.0],
            [0.0, 0.0, 0.0, w],
            [2.0 * j, 0.0, -w, 0.0],
        ]
    )


class TestLinearBeating:
    def test_imbalance_cosine_and_first_zero(self):
        # gamma=0, theta=0: rho(t)/N = cos(2Jt) exactly, first zero at pi/4
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        cfg = IntegratorConfig(t_end=10.0, dt_sample=0.001, keep_dense=False)
        tr = integrate(initial_state(1.0), p, cfg)
        assert np.max(np.abs(tr.imbalance_rho / tr.norm_n - np.cos(2 * tr.times))) < 1e-9
        sign_flip = np.nonzero(np.sign(tr.imbalance_rho[:-1]) * np.sign(tr.imbalance_rho[1:]) < 0)[0][0]
        i0, i1 = sign_flip, sign_flip + 1
        r0, r1 = tr.imbalance_rho[i0], tr.imbalance_rho[i1]
        root = tr.times[i0] + (tr.times[i1] - tr.times[i0]) * r0 / (r0 - r1)
        assert abs(root - math.pi / 4) < 1e-8

    def test_norm_growth_needs_counter_rotating_terms(self):
        # theta=1 linear system: N(t) is not conserved; matrix exponential oracle
        w, j = 2.0, 1.0
        p = ModelParams(omega=w, j_coupling=j, gamma_tilde=0.0, theta=1)
        cfg = IntegratorConfig(t_end=20.0, dt_sample=0.05, keep_dense=False)
        tr = integrate(ClassicalState(1.0 + 0j, 0j), p, cfg)
        assert np.max(tr.norm_n) > 1.0 + 1e-3
        a = linear_counter_rotating_matrix(w, j)
        worst = 0.0
        for i in range(0, len(tr), 25):
            y = expm(a * tr.times[i]) @ np.array([1.0, 0.0, 0.0, 0.0])
            got = np.array(
                [tr.psi0[i].real, tr.psi0[i].imag, tr.psi1[i].real, tr.psi1[i].imag]
            )
            worst = max(worst, np.max(np.abs(y - got)))
        assert worst < 1e-8


class TestConservation:
    def test_theta0_conserves_norm_and_energy(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=1.5, theta=0)
        st = ClassicalState(complex(0.9, 0.1), complex(0.3, -0.2))
        tr = integrate(st, p, IntegratorConfig(t_end=100.0, keep_dense=False))
        assert np.max(np.abs(tr.norm_n - tr.norm_n[0])) / tr.norm_n[0] < 1e-8
        assert np.max(np.abs(tr.energy_h - tr.energy_h[0])) / max(abs(tr.energy_h[0]), 1.0) < 1e-8

    def test_theta1_conserves_energy_but_not_norm(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=1)
        tr = integrate(ClassicalState(1.0 + 0j, 0j), p, IntegratorConfig(t_end=100.0, keep_dense=False))
        assert np.max(np.abs(tr.energy_h - tr.energy_h[0])) / max(abs(tr.energy_h[0]), 1.0) < 1e-7
        assert np.max(np.abs(tr.norm_n - tr.norm_n[0])) > 1e-3

    def test_trajectory_grid_is_uniform(self):
        p = ModelParams(omega=2.0, gamma_tilde=0.7, theta=1)
        tr = integrate(initial_state(1.0, rho0=0.4), p, IntegratorConfig(t_end=5.0, keep_dense=False))
        dt = np.diff(tr.times)
        assert np.all(dt > 0)
        assert np.max(np.abs(dt - dt[0])) < 1e-12 * dt[0] + 1e-15
        assert len(tr) == tr.psi0.size == tr.norm_n.size


class TestSymmetryMap:
    """The staggered-conjugate map sends theta=0 solutions at +gamma_tilde to
    solutions at -gamma_tilde (up to the exp(-2i*omega*t) rotating phase);
    the counter-rotating terms destroy this symmetry."""

    W = 2.0
    STATE = ClassicalState(complex(0.8, 0.1), complex(0.45, -0.3))
    CFG = IntegratorConfig(t_end=20.0, rel_tol=1e-12, abs_tol=1e-14, keep_dense=False)

    def _pair(self, theta):
        gt = 1.3
        plus = ModelParams(omega=self.W, j_coupling=1.0, gamma_tilde=gt, theta=theta)
        minus = ModelParams(omega=self.W, j_coupling=1.0, gamma_tilde=-gt, theta=theta)
        tr_plus = integrate(self.STATE, plus, self.CFG)
        mapped_start = ClassicalState(self.STATE.psi0.conjugate(), -self.STATE.psi1.conjugate())
        tr_minus = integrate(mapped_start, minus, self.CFG)
        phase = np.exp(-2j * self.W * tr_plus.times)
        mapped0 = phase * np.conj(tr_plus.psi0)
        mapped1 = -phase * np.conj(tr_plus.psi1)
        return np.max(np.abs(mapped0 - tr_minus.psi0) + np.abs(mapped1 - tr_minus.psi1))

    def test_holds_for_rwa(self):
        assert self._pair(theta=0) < 1e-8

    def test_fails_with_counter_rotating_terms(self):
        assert self._pair(theta=1) > 1e-2

    def test_literal_map_at_zero_omega(self):
        # without the omega term the mapped state solves the flipped system as is
        gt = 0.9
        cfg = IntegratorConfig(t_end=20.0, rel_tol=1e-12, abs_tol=1e-14, keep_dense=False)
        plus = ModelParams(omega=0.0, j_coupling=1.0, gamma_tilde=gt, theta=0)
        minus = ModelParams(omega=0.0, j_coupling=1.0, gamma_tilde=-gt, theta=0)
        tr_plus = integrate(self.STATE, plus, cfg)
        start = ClassicalState(self.STATE.psi0.conjugate(), -self.STATE.psi1.conjugate())
        tr_minus = integrate(start, minus, cfg)
        err = np.max(
            np.abs(np.conj(tr_plus.psi0) - tr_minus.psi0)
            + np.abs(-np.conj(tr_plus.psi1) - tr_minus.psi1)
        )
        assert err < 1e-8


class TestIntegratorQuality:
    def test_time_reversal_on_regular_orbit(self):
        # conjugation reverses the Hamiltonian flow; a regular orbit returns
        p = ModelParams.from_gamma(omega=2.0, gamma=7.0, n0_initial=1.0, theta=1)
        st = initial_state(1.0, rho0=0.3, phi0=0.0)
        cfg = IntegratorConfig(t_end=50.0, keep_dense=False)
        fwd = integrate(st, p, cfg)
        turn = ClassicalState(fwd.psi0[-1].conjugate(), fwd.psi1[-1].conjugate())
        back = integrate(turn, p, cfg)
        final0 = back.psi0[-1].conjugate()
        final1 = back.psi1[-1].conjugate()
        assert abs(final0 - st.psi0) + abs(final1 - st.psi1) < 1e-6

    def test_fixed_step_order_at_least_four(self):
        # forcing the step via max_step turns the pair into a fixed-step
        # method; halving h must shrink the endpoint error by >= 2^4
        w = 2.0
        p = ModelParams(omega=w, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        st = ClassicalState(1.0 + 0j, 0j)
        t_end = 2.0

        def endpoint_error(h):
            cfg = IntegratorConfig(
                t_end=t_end, rel_tol=1e6, abs_tol=1e6, dt_sample=t_end,
                keep_dense=False, max_step=h, first_step=h,
            )
            tr = integrate(st, p, cfg)
            # exact solution of the linear beating system
            exact0 = np.cos(t_end) * np.exp(-1j * w * t_end)
            exact1 = 1j * np.sin(t_end) * np.exp(-1j * w * t_end)
            return abs(tr.psi0[-1] - exact0) + abs(tr.psi1[-1] - exact1)

        e1, e2 = endpoint_error(0.02), endpoint_error(0.01)
        assert e1 / e2 > 2**4

    def test_tolerance_tightening_reduces_error(self):
        p = ModelParams.from_gamma(omega=2.0, gamma=3.0, n0_initial=1.0, theta=1)
        st = initial_state(1.0, rho0=0.2)
        ref = integrate(st, p, IntegratorConfig(t_end=20.0, rel_tol=1e-13, abs_tol=1e-15, keep_dense=False))
        errs = []
        for rtol in (1e-6, 5e-7, 2.5e-7):
            tr = integrate(st, p, IntegratorConfig(t_end=20.0, rel_tol=rtol, abs_tol=rtol * 1e-2, keep_dense=False))
            errs.append(abs(tr.psi0[-1] - ref.psi0[-1]) + abs(tr.psi1[-1] - ref.psi1[-1]))
        assert errs[0] > errs[1] > errs[2]

    def test_bit_identical_reruns(self):
        p = ModelParams.from_gamma(omega=2.0, gamma=-7.0, n0_initial=1.0, theta=1)
        st = initial_state(1.0, rho0=0.8, phi0=math.pi)
        cfg = IntegratorConfig(t_end=30.0, keep_dense=False)
        a = integrate(st, p, cfg)
        b = integrate(st, p, cfg)
        assert np.array_equal(a.psi0, b.psi0) and np.array_equal(a.psi1, b.psi1)

    def test_dense_output_matches_exact_solution(self):
        w = 2.0
        p = ModelParams(omega=w, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        tr = integrate(ClassicalState(1.0 + 0j, 0j), p, IntegratorConfig(t_end=10.0))
        for t in (0.37, 2.111, 9.999):
            y = tr.dense(t)
            exact = np.cos(t) * np.exp(-1j * w * t)
            assert abs(complex(y[0], y[1]) - exact) < 1e-9

    def test_underflow_reported(self):
        # the controller floor is 1e-14 * t_end; a horizon so long that the
        # resolvable step falls below it must be reported, not truncated
        p = ModelParams(omega=1.0, j_coupling=1.0, gamma_tilde=-80.0, theta=1)
        st = ClassicalState(complex(40.0, 0.0), complex(0.0, 30.0))
        with pytest.raises(StepSizeUnderflow):
            integrate(st, p, IntegratorConfig(t_end=1e12, dt_sample=1e9, keep_dense=False))


class TestTangent:
    def test_linear_flow_has_zero_exponent(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        st = initial_state(1.0, rho0=0.5)
        cfg = IntegratorConfig(t_end=1000.0, dt_sample=1.0, keep_dense=False)
        _, sum_log = integrate_with_tangent(st, (1.0 + 0j, 0j), p, cfg)
        assert abs(sum_log / cfg.t_end) < 1e-3

    def test_zero_tangent_rejected(self):
        p = ModelParams(omega=2.0)
        with pytest.raises(ConfigError):
            integrate_with_tangent(initial_state(1.0), (0j, 0j), p, IntegratorConfig(t_end=1.0))

    def test_real_and_complex_tangent_forms_agree(self):
        p = ModelParams.from_gamma(omega=2.0, gamma=-7.0, n0_initial=1.0, theta=1)
        st = initial_state(1.0, rho0=0.8, phi0=math.pi)
        cfg = IntegratorConfig(t_end=50.0, dt_sample=0.5, keep_dense=False)
        _, s1 = integrate_with_tangent(st, (1.0 + 0j, 0j), p, cfg)
        _, s2 = integrate_with_tangent(st, np.array([1.0, 0.0, 0.0, 0.0]), p, cfg)
        assert s1 == pytest.approx(s2, rel=1e-12)


class TestRhoMin:
    def test_full_tunneling_reaches_minus_one(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        tr = integrate(initial_state(1.0), p, IntegratorConfig(t_end=100.0, keep_dense=False))
        assert rho_min(tr) == pytest.approx(-1.0, abs=1e-6)

    def test_self_trapped_stays_positive(self):
        # weak-coupling limit with strong repulsion: imbalance locked high
        p = ModelParams.from_gamma(omega=100.0, gamma=7.0, n0_initial=1.0, theta=0)
        tr = integrate(initial_state(1.0), p, IntegratorConfig(t_end=100.0, keep_dense=False))
        assert rho_min(tr) > 0.5

    def test_trapped_just_past_threshold(self):
        # gamma = 5 > 4: the imbalance never reverses sign
        p = ModelParams.from_gamma(omega=100.0, gamma=5.0, n0_initial=1.0, theta=0)
        tr = integrate(initial_state(1.0), p, IntegratorConfig(t_end=100.0, keep_dense=False))
        value = rho_min(tr)
        assert value > 0.0
        # trapped-branch turning point of the integrable dimer
        assert value == pytest.approx(math.sqrt(1 - 16 / 25), abs=1e-6)

    def test_intermediate_usc_regression(self):
        # J/omega = 0.1, gamma = -4.5, theta = 1: frozen regression value
        p = ModelParams.from_gamma(omega=10.0, gamma=-4.5, n0_initial=1.0, theta=1)
        tr = integrate(initial_state(1.0), p, IntegratorConfig(t_end=100.0, keep_dense=False))
        assert rho_min(tr) == pytest.approx(-0.999994132, abs=1e-6)

    def test_degenerate_norm_rejected(self):
        p = ModelParams(omega=2.0)
        tr = integrate(initial_state(1.0), p, IntegratorConfig(t_end=1.0, keep_dense=False))
        broken = type(tr)(
            params=tr.params,
            times=tr.times,
            psi0=tr.psi0 * 0,
            psi1=tr.psi1 * 0,
            norm_n=tr.norm_n * 0,
            imbalance_rho=tr.imbalance_rho * 0,
            phase_phi=tr.phase_phi,
            energy_h=tr.energy_h,
        )
        with pytest.raises(DegenerateNorm):
            rho_min(broken)
