"""
Tests for runs, regret accounting, moving averages, comparisons and export
"""

import numpy as np
import pandas as pd
import pytest

from src.agents import AgentSpec
from src.analytics.harness import (
    RunConfig,
    RunMetrics,
    compare,
    comparison_table,
    moving_average,
    repeat_configs,
    run,
    run_repeats,
    summarize,
)
from src.analytics.reporting import export_csv, export_histogram_plot, export_plot, histogram_table
from src.environment.reward import RewardHistogram
from src.errors import ConfigError, PreconditionError
from src.utils.rng import derive_seed


class TestRunConfig:

    def test_window_cannot_exceed_steps(self):
        with pytest.raises(ConfigError):
            RunConfig(num_steps=10, moving_average_window=11)

    def test_positive_steps(self):
        with pytest.raises(ConfigError):
            RunConfig(num_steps=0, moving_average_window=1)


class TestMovingAverage:

    def test_expanding_head(self):
        result = moving_average([1.0, 2.0, 3.0, 4.0], 2)
        np.testing.assert_allclose(result, [1.0, 1.5, 2.5, 3.5])

    def test_window_one_is_identity(self):
        np.testing.assert_array_equal(moving_average([3.0, 1.0], 1), [3.0, 1.0])

    def test_errors(self):
        with pytest.raises(ConfigError):
            moving_average([1.0], 0)
        with pytest.raises(PreconditionError):
            moving_average([], 3)


class TestRun:

    def test_oracle_has_zero_regret(self, small_env):
        metrics = run(small_env, RunConfig(num_steps=300, agent=AgentSpec('oracle'), moving_average_window=50))
        assert metrics.summary['total_regret'] == 0.0
        assert np.all(metrics.regret_series == 0.0)

    @pytest.mark.parametrize('name', ['uniform', 'egreedy', 'linucb', 'softmax'])
    def test_reward_plus_regret_is_oracle_total(self, small_env, name):
        metrics = run(small_env, RunConfig(num_steps=500, seed=3, agent=AgentSpec(name), moving_average_window=50))
        total = metrics.reward_series.sum() + metrics.summary['total_regret']
        assert abs(total - metrics.oracle_series.sum()) <= 1e-9
        assert np.all(np.diff(metrics.regret_series) >= 0)

    def test_deterministic(self, small_env):
        config = RunConfig(num_steps=200, seed=5, agent=AgentSpec('softmax'), moving_average_window=20)
        first = run(small_env, config)
        second = run(small_env, config)
        np.testing.assert_array_equal(first.reward_series, second.reward_series)
        assert first.interactions == second.interactions

    def test_interactions_logged(self, small_env):
        metrics = run(small_env, RunConfig(num_steps=10, agent=AgentSpec('uniform'), moving_average_window=5))
        assert [i.step_index for i in metrics.interactions] == list(range(10))
        for interaction in metrics.interactions:
            assert interaction.reward == small_env.step(interaction.state_index, interaction.action_index)

    def test_summary_recomputable(self, small_env):
        metrics = run(small_env, RunConfig(num_steps=100, agent=AgentSpec('egreedy'), moving_average_window=30))
        assert metrics.summary == summarize(metrics.reward_series, metrics.regret_series, 30)
        assert metrics.summary['mean_reward_last_window'] == pytest.approx(metrics.reward_series[-30:].mean())

    def test_uniform_mean_matches_exhaustive_mean(self, movielens_env):
        metrics = run(movielens_env, RunConfig(num_steps=1000, seed=8, agent=AgentSpec('uniform')))
        bound = 3 * movielens_env.exhaustive_std() / np.sqrt(1000)
        assert abs(metrics.reward_series.mean() - movielens_env.exhaustive_mean()) <= bound

    def test_frame_columns(self, small_env):
        metrics = run(small_env, RunConfig(num_steps=20, agent=AgentSpec('uniform'), moving_average_window=5))
        frame = metrics.to_frame()
        assert list(frame.columns) == ['step', 'reward', 'moving_avg', 'cumulative_regret']
        assert len(frame) == 20


class TestCompare:

    def test_repeat_seeds(self):
        configs = repeat_configs(RunConfig(num_steps=10, seed=9, moving_average_window=5), 3)
        assert [c.seed for c in configs] == [derive_seed(9, r) for r in range(3)]

    def test_results_independent_of_workers(self, small_env):
        configs = [
            RunConfig(num_steps=100, seed=1, agent=AgentSpec('uniform'), moving_average_window=10),
            RunConfig(num_steps=100, seed=1, agent=AgentSpec('linucb'), moving_average_window=10),
        ]
        serial = run_repeats(small_env, configs, repeats=3, workers=1)
        pooled = run_repeats(small_env, configs, repeats=3, workers=4)
        assert set(serial) == {(i, r) for i in range(2) for r in range(3)}
        for key in serial:
            np.testing.assert_array_equal(serial[key].reward_series, pooled[key].reward_series)
        pd.testing.assert_frame_equal(
            comparison_table(configs, serial, 3),
            comparison_table(configs, pooled, 3),
        )

    def test_table_statistics(self, small_env):
        configs = [RunConfig(num_steps=50, seed=2, agent=AgentSpec('uniform'), moving_average_window=10)]
        results = run_repeats(small_env, configs, repeats=4, workers=2)
        table = comparison_table(configs, results, 4)
        overall = [results[(0, r)].summary['mean_reward_overall'] for r in range(4)]
        assert table.loc[0, 'mean_reward_overall_mean'] == pytest.approx(np.mean(overall))
        assert table.loc[0, 'mean_reward_overall_std'] == pytest.approx(np.std(overall))
        assert table.loc[0, 'agent'] == 'uniform'

    def test_oracle_beats_uniform(self, small_env):
        configs = [
            RunConfig(num_steps=400, agent=AgentSpec('oracle'), moving_average_window=100),
            RunConfig(num_steps=400, agent=AgentSpec('uniform'), moving_average_window=100),
        ]
        table = compare(small_env, configs, repeats=2, workers=2)
        assert table.loc[0, 'mean_reward_overall_mean'] >= table.loc[1, 'mean_reward_overall_mean']
        assert table.loc[0, 'total_regret_mean'] == 0.0

    def test_needs_configs(self, small_env):
        with pytest.raises(ConfigError):
            run_repeats(small_env, [], repeats=2, workers=1)


class TestReporting:

    def test_export_csv(self, tmp_path, small_env):
        metrics = run(small_env, RunConfig(num_steps=30, agent=AgentSpec('uniform'), moving_average_window=5))
        path = export_csv(metrics, tmp_path / 'run' / 'metrics.csv')
        frame = pd.read_csv(path)
        assert list(frame.columns) == ['step', 'reward', 'moving_avg', 'cumulative_regret']
        np.testing.assert_allclose(frame['reward'], metrics.reward_series)

    def test_export_csv_without_steps(self, tmp_path):
        empty = RunMetrics([], np.array([]), np.array([]), np.array([]), window=1)
        path = export_csv(empty, tmp_path / 'empty.csv')
        assert path.read_text() == 'step,reward,moving_avg,cumulative_regret\n'

    def test_svg_has_one_group_per_series(self, tmp_path):
        path = export_plot({'a': [1.0, 2.0, 3.0], 'b': [3.0, 2.0, 1.0]}, tmp_path / 'curves.svg')
        text = path.read_text()
        assert text.count('id="series-') == 2

    def test_svg_is_reproducible(self, tmp_path):
        first = export_plot({'a': [1.0, 2.0]}, tmp_path / 'one.svg').read_bytes()
        second = export_plot({'a': [1.0, 2.0]}, tmp_path / 'two.svg').read_bytes()
        assert first == second

    def test_histogram_table_aligns_bins(self, tmp_path):
        env_hist = RewardHistogram((1.0, 2.0), (3, 1), 4)
        data_hist = RewardHistogram((2.0, 3.0), (2, 2), 4)
        table = histogram_table(env_hist, data_hist)
        assert list(table['value']) == [1.0, 2.0, 3.0]
        assert list(table['dataset_count']) == [0, 2, 2]
        assert list(table['environment_count']) == [3, 1, 0]
        assert export_histogram_plot(table, tmp_path / 'hist.svg').exists()
