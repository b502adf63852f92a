import math

import mpmath
import numpy as np
import pytest

from colored_ito.errors import WrongOracleError
from colored_ito.experiment import l2_error
from colored_ito.integrators import reference_solve
from colored_ito.noise import NoiseSpec, sample_ensemble, sample_realization
from colored_ito.oracle import (
    MatrixExponentialParams,
    exact_constant_velocity,
    exact_solution,
    exact_varying_velocity,
    matrix_exponential,
    split_gap,
)
from colored_ito.spectral import ModelConfig, build_operators, initial_state


def taylor_oracle(M, terms=30):
    """exp(M) as a 30-term Taylor series in 40-digit arithmetic."""
    mpmath.mp.dps = 40
    A = mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in M])
    n = A.rows
    total = mpmath.eye(n)
    term = mpmath.eye(n)
    for j in range(1, terms):
        term = term * A / j
        total += term
    return np.array([[complex(total[i, j]) for j in range(n)] for i in range(n)])


class TestMatrixExponential:
    def test_zero(self):
        np.testing.assert_array_equal(matrix_exponential(np.zeros((3, 3))), np.eye(3))

    def test_nilpotent(self):
        np.testing.assert_allclose(matrix_exponential([[0.0, 1.0], [0.0, 0.0]]), [[1, 1], [0, 1]], atol=1e-15)

    def test_diagonal(self):
        d = np.array([-3.0 + 1j, 0.5, 2.0j, -0.1 - 0.2j])
        np.testing.assert_allclose(matrix_exponential(np.diag(d)), np.diag(np.exp(d)), rtol=1e-14, atol=1e-14)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_against_extended_precision_series(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(11, 11)) + 1j * rng.normal(size=(11, 11))
        M /= np.max(np.sum(np.abs(M), axis=0))
        np.testing.assert_allclose(matrix_exponential(M), taylor_oracle(M), rtol=0, atol=1e-10)

    def test_large_norm_against_scipy(self):
        from scipy.linalg import expm

        rng = np.random.default_rng(5)
        M = 3 * (rng.normal(size=(11, 11)) + 1j * rng.normal(size=(11, 11)))
        ref = expm(M)
        assert np.max(np.abs(matrix_exponential(M) - ref)) / np.max(np.abs(ref)) < 1e-11

    def test_non_square(self):
        with pytest.raises(ValueError):
            matrix_exponential(np.zeros((2, 3)))

    def test_term_budget(self):
        with pytest.raises(ArithmeticError):
            matrix_exponential(np.ones((2, 2)), MatrixExponentialParams(max_terms=2))


class TestConstantVelocity:
    def test_deterministic_decay(self):
        cfg = ModelConfig(rho=0.0, n_x=1)
        noise = sample_realization(NoiseSpec.for_step(0.0, 1 / 10), 0)
        F = exact_constant_velocity(cfg, noise, 2.0).F
        assert abs(F[2]) == pytest.approx(0.5 * math.exp(-0.2), abs=1e-15)
        assert abs(F[2]) == pytest.approx(0.409365, abs=1e-6)

    def test_time_zero_is_initial_state(self):
        cfg = ModelConfig(n_x=3)
        noise = sample_realization(NoiseSpec.for_step(0.0, 1 / 10), 0)
        np.testing.assert_array_equal(exact_constant_velocity(cfg, noise, 0.0).F, initial_state(cfg).F)

    def test_modulus_independent_of_noise(self):
        cfg = ModelConfig(n_x=1)
        members = sample_ensemble(NoiseSpec.for_step(0.0, 1 / 94), 3, 100)
        mods = np.array([np.abs(exact_constant_velocity(cfg, m, 2.0).F) for m in members])
        assert np.max(mods.max(axis=0) - mods.min(axis=0)) < 1e-12

    def test_rejects_coupled_model(self):
        cfg = ModelConfig(epsilon=1e-3, n_x=5)
        noise = sample_realization(NoiseSpec.for_step(0.0, 1 / 10), 0)
        with pytest.raises(WrongOracleError):
            exact_constant_velocity(cfg, noise, 1.0)


class TestVaryingVelocity:
    def test_agrees_with_constant_velocity_without_coupling(self):
        cfg = ModelConfig(n_x=5)
        ops = build_operators(cfg)
        for m in sample_ensemble(NoiseSpec.for_step(1e-5, 1 / 94), 1, 5):
            a = exact_varying_velocity(cfg, ops, m, 2.0).F
            b = exact_constant_velocity(cfg, m, 2.0).F
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_no_noise_matches_richardson_heun(self):
        cfg = ModelConfig(rho=0.0, epsilon=1e-3, n_x=5)
        ops = build_operators(cfg)
        noise = sample_realization(NoiseSpec.for_step(1.0, 1 / 10), 0)
        coarse = reference_solve(cfg, ops, noise, dt_ref=0.002).F
        fine = reference_solve(cfg, ops, noise, dt_ref=0.001).F
        richardson = (4 * fine - coarse) / 3
        exact = exact_varying_velocity(cfg, ops, noise, 2.0).F
        assert np.max(np.abs(richardson - exact)) < 0.1 * np.max(np.abs(fine - exact))
        assert np.max(np.abs(richardson - exact)) < 1e-9

    def test_coupled_smooth_noise_matches_reference(self):
        cfg = ModelConfig(epsilon=1e-3, n_x=5)
        ops = build_operators(cfg)
        noise = sample_realization(NoiseSpec.for_step(1.0, 1 / 766), 12)
        ref = reference_solve(cfg, ops, noise, dt_ref=1e-5)
        assert l2_error(ref, exact_varying_velocity(cfg, ops, noise, 2.0)) < 1e-5

    def test_split_composition_consistent_without_coupling(self):
        cfg = ModelConfig(n_x=5)
        ops = build_operators(cfg)
        noise = sample_realization(NoiseSpec.for_step(0.0, 1 / 94), 6)
        assert split_gap(cfg, ops, noise, 2.0) < 1e-12

    def test_split_gap_exposes_commutator_with_coupling(self):
        cfg = ModelConfig(epsilon=1e-3, n_x=5)
        ops = build_operators(cfg)
        noise = sample_realization(NoiseSpec.for_step(1e-4, 1 / 94), 6)
        # halves of two unit noise periods carry equal integrals and commute
        assert split_gap(cfg, ops, noise, 2.0) < 1e-12
        assert 1e-7 < split_gap(cfg, ops, noise, 2.0, split=0.3) < 1e-3
        with pytest.raises(ValueError):
            split_gap(cfg, ops, noise, 2.0, split=1.0)

    def test_dispatch(self):
        noise = sample_realization(NoiseSpec.for_step(1e-4, 1 / 22), 0)
        flat = ModelConfig(n_x=2)
        coupled = ModelConfig(epsilon=1e-3, n_x=2)
        np.testing.assert_array_equal(exact_solution(flat, build_operators(flat), noise, 1.0).F,
                                      exact_constant_velocity(flat, noise, 1.0).F)
        np.testing.assert_array_equal(exact_solution(coupled, build_operators(coupled), noise, 1.0).F,
                                      exact_varying_velocity(coupled, build_operators(coupled), noise, 1.0).F)
