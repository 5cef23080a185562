import numpy as np
import pytest

from src.engine.counting_stats import cumulants, steady_state
from src.engine.model import IDX_A, IDX_B, EngineParams, build_generator, zero_bias_hot_temperature
from src.engine.trajectory import (
    JumpProcess,
    _simulate_counts,
    compare_with_analytic,
    default_t_final,
    simulate,
)
from src.exceptions import DomainError


@pytest.fixture
def process(reference_params):
    return JumpProcess.from_generator(build_generator(reference_params))


class TestJumpProcess:

    def test_rejects_coherent_generator(self, coherent_params):
        with pytest.raises(DomainError):
            JumpProcess.from_generator(build_generator(coherent_params))

    def test_rejects_negative_rates(self):
        rates = np.ones((4, 4))
        rates[0, 1] = -1.0
        with pytest.raises(DomainError):
            JumpProcess(rate_matrix=rates, weights=np.zeros((4, 4)))

    def test_generator_columns_sum_to_zero(self, process):
        np.testing.assert_allclose(process.generator().sum(axis=0), 0.0, atol=1e-14)

    def test_counting_weights(self, process):
        assert process.weights[IDX_A, IDX_B] == 1.0
        assert process.weights[IDX_B, IDX_A] == -1.0
        assert np.count_nonzero(process.weights) == 2

    def test_stationary_matches_steady_state(self, reference_params, process):
        rho = steady_state(build_generator(reference_params))
        np.testing.assert_allclose(process.stationary(), rho.populations, atol=1e-12)

    def test_jump_table_rows_end_at_one(self, process):
        np.testing.assert_allclose(process.jump_table()[:, -1], 1.0)

    def test_default_t_final(self, process):
        smallest = process.rate_matrix[process.rate_matrix > 0].min()
        assert default_t_final(process) == pytest.approx(1e4 / smallest)


class TestSimulate:

    def test_trajectory_independent_of_batch(self, process):
        five = _simulate_counts(process, 200.0, 5, seed=4)
        three = _simulate_counts(process, 200.0, 3, seed=4)
        np.testing.assert_array_equal(five[:3], three)

    def test_reproducible(self, process):
        a = simulate(process, t_final=200.0, n_traj=10, seed=1)
        b = simulate(process, t_final=200.0, n_traj=10, seed=1)
        assert a == b

    def test_needs_two_trajectories(self, process):
        with pytest.raises(DomainError):
            simulate(process, t_final=10.0, n_traj=1)

    def test_positive_time(self, process):
        with pytest.raises(DomainError):
            simulate(process, t_final=0.0, n_traj=5)

    def test_mean_rate_agrees_with_analytic(self, reference_params, process):
        j1 = cumulants(build_generator(reference_params))[0]
        stats = simulate(process, t_final=3000.0, n_traj=40, seed=2)
        assert abs(stats.mean_rate - j1) < 5 * stats.mean_rate_se

    def test_standard_error_shrinks_with_trajectories(self, process):
        few = simulate(process, t_final=500.0, n_traj=50, seed=3)
        many = simulate(process, t_final=500.0, n_traj=200, seed=3)
        # Quatro vezes mais trajetorias: erro padrao cai pela metade
        assert many.mean_rate_se / few.mean_rate_se == pytest.approx(0.5, abs=0.15)

    def test_zero_bias_mean_rate_vanishes(self, reference_params):
        balanced = EngineParams(t_h=zero_bias_hot_temperature(reference_params))
        proc = JumpProcess.from_generator(build_generator(balanced))
        stats = simulate(proc, t_final=2000.0, n_traj=40, seed=5)
        assert abs(stats.mean_rate) < 3 * stats.mean_rate_se


class TestCompareWithAnalytic:

    def test_row_fields(self, coherent_params):
        row = compare_with_analytic(coherent_params, t_final=500.0, n_traj=10, seed=0)
        assert set(row) >= {"j1_analytic", "j1_empirical", "j1_z", "j2_analytic", "j2_empirical", "j2_z"}
        expected = cumulants(build_generator(coherent_params.classical()))
        assert row["j1_analytic"] == expected[0]
