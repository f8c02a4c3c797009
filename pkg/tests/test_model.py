"""Unit tests for parameters, observables and the equations of motion."""

import math

import numpy as np
import pytest

from usc_dimer import (
    ClassicalState,
    ConfigError,
    ModelParams,
    classical_energy,
    eom_rhs,
    initial_state,
    observables,
)


def random_state(rng):
    re0, im0, re1, im1 = rng.uniform(-1.5, 1.5, size=4)
    return ClassicalState(complex(re0, im0), complex(re1, im1))


class TestModelParams:
    def test_gamma_is_derived(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.5, theta=0, n0_initial=8.0)
        assert p.gamma == pytest.approx(4.0)

    def test_from_gamma_round_trip(self):
        p = ModelParams.from_gamma(omega=2.0, gamma=-7.0, n0_initial=17.0, theta=1)
        assert p.gamma == pytest.approx(-7.0)
        assert p.gamma_tilde == pytest.approx(-7.0 / 17.0)

    def test_zero_coupling_rejected(self):
        with pytest.raises(ConfigError):
            ModelParams(omega=1.0, j_coupling=0.0)

    def test_theta_must_be_binary(self):
        with pytest.raises(ConfigError):
            ModelParams(omega=1.0, theta=2)

    def test_nonfinite_rejected(self):
        with pytest.raises(ConfigError):
            ModelParams(omega=math.inf)


class TestEomRhs:
    def test_zero_state_is_fixed_point(self):
        p = ModelParams(omega=3.0, gamma_tilde=2.0, theta=1)
        d0, d1 = eom_rhs(ClassicalState(0j, 0j), p)
        assert d0 == 0 and d1 == 0

    def test_direct_substitution(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        d0, d1 = eom_rhs(ClassicalState(1.0 + 0j, 0j), p)
        assert d0 == pytest.approx(-2j)
        assert d1 == pytest.approx(1j)

    def test_matches_energy_gradient(self):
        # dpsi_k/dt must equal -i * d(energy)/d(conj psi_k); in real
        # components: d(re)/dt = dH/d(im)/2, d(im)/dt = -dH/d(re)/2
        rng = np.random.default_rng(7)
        p = ModelParams(omega=1.3, j_coupling=0.8, gamma_tilde=-2.1, theta=1)
        st = random_state(rng)
        d0, d1 = eom_rhs(st, p)
        got = np.array([d0.real, d0.imag, d1.real, d1.imag])
        eps = 1e-6
        y = st.as_real()
        grad = np.empty(4)
        for k in range(4):
            yp, ym = y.copy(), y.copy()
            yp[k] += eps
            ym[k] -= eps
            grad[k] = (
                classical_energy(ClassicalState.from_real(yp), p)
                - classical_energy(ClassicalState.from_real(ym), p)
            ) / (2 * eps)
        expected = 0.5 * np.array([grad[1], -grad[0], grad[3], -grad[2]])
        assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) < 1e-6

    def test_gradient_consistency_ensemble(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            p = ModelParams(
                omega=rng.uniform(0.2, 5.0),
                j_coupling=rng.uniform(0.3, 2.0),
                gamma_tilde=rng.uniform(-8.0, 8.0),
                theta=int(rng.integers(0, 2)),
            )
            st = random_state(rng)
            d0, d1 = eom_rhs(st, p)
            got = np.array([d0.real, d0.imag, d1.real, d1.imag])
            eps = 1e-6
            y = st.as_real()
            grad = np.empty(4)
            for k in range(4):
                yp, ym = y.copy(), y.copy()
                yp[k] += eps
                ym[k] -= eps
                grad[k] = (
                    classical_energy(ClassicalState.from_real(yp), p)
                    - classical_energy(ClassicalState.from_real(ym), p)
                ) / (2 * eps)
            expected = 0.5 * np.array([grad[1], -grad[0], grad[3], -grad[2]])
            scale = max(np.max(np.abs(expected)), 1e-3)
            assert np.max(np.abs(got - expected)) / scale < 1e-5


class TestEnergy:
    def test_zero_state(self):
        p = ModelParams(omega=2.0, gamma_tilde=1.0, theta=1)
        assert classical_energy(ClassicalState(0j, 0j), p) == 0.0

    def test_single_occupied_site(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=1.0, theta=1)
        assert classical_energy(ClassicalState(1.0 + 0j, 0j), p) == pytest.approx(2.5)

    def test_balanced_real_state(self):
        p = ModelParams(omega=2.0, j_coupling=1.0, gamma_tilde=0.0, theta=0)
        assert classical_energy(ClassicalState(1.0 + 0j, 1.0 + 0j), p) == pytest.approx(2.0)


class TestObservables:
    def test_single_site(self):
        p = ModelParams(omega=1.0)
        obs = observables(ClassicalState(1.0 + 0j, 0j), p)
        assert obs.norm_n == pytest.approx(1.0)
        assert obs.imbalance_rho == pytest.approx(1.0)
        assert obs.phase_phi == 0.0  # arg(0) := 0

    def test_quarter_phase(self):
        p = ModelParams(omega=1.0)
        s = ClassicalState(complex(1 / math.sqrt(2), 0), complex(0, -1 / math.sqrt(2)))
        obs = observables(s, p)
        assert obs.norm_n == pytest.approx(1.0)
        assert obs.imbalance_rho == pytest.approx(0.0, abs=1e-15)
        assert obs.phase_phi == pytest.approx(math.pi / 2)

    def test_large_imbalanced_start(self):
        p = ModelParams(omega=2.0, n0_initial=17)
        obs = observables(ClassicalState(complex(math.sqrt(17), 0), 0j), p)
        assert obs.norm_n == pytest.approx(17.0)
        assert obs.imbalance_rho == pytest.approx(17.0)

    def test_bounds(self):
        rng = np.random.default_rng(3)
        p = ModelParams(omega=1.0, gamma_tilde=0.4, theta=1)
        for _ in range(50):
            obs = observables(random_state(rng), p)
            assert abs(obs.imbalance_rho) <= obs.norm_n + 1e-15
            assert obs.norm_n >= 0.0
            assert -math.pi < obs.phase_phi <= math.pi


class TestInitialState:
    def test_full_imbalance(self):
        s = initial_state(17.0)
        assert s.psi0 == pytest.approx(complex(math.sqrt(17), 0))
        assert s.psi1 == 0j

    def test_partial_imbalance_with_phase(self):
        s = initial_state(1.0, rho0=0.5, phi0=math.pi)
        p = ModelParams(omega=1.0)
        obs = observables(s, p)
        assert obs.norm_n == pytest.approx(1.0)
        assert obs.imbalance_rho == pytest.approx(0.5)
        assert obs.phase_phi == pytest.approx(math.pi)

    def test_rho0_out_of_range(self):
        with pytest.raises(ConfigError):
            initial_state(1.0, rho0=1.5)
