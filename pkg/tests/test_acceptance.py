"""
End-to-end properties of the preset environments built from the bundled
MovieLens and IMDb fixtures, the agents run on them and the classification
adapter
"""

import time

import numpy as np
import pytest

from conftest import (
    CLASSIFICATION_EXAMPLES,
    IMDB_BASICS,
    IMDB_RATINGS,
    IMDB_TEST_USERS,
    MOVIELENS_MOVIES,
    MOVIELENS_RATINGS,
)
from src.agents import AgentSpec
from src.analytics.harness import RunConfig, run, run_repeats
from src.data.parsers import parse_imdb, parse_movielens
from src.data.truncation import ranked_items
from src.environment.encoder import build_vocabulary, encode_actions
from src.environment.env_file import dumps, loads
from src.environment.reward import (
    AffineClip,
    ImdbSqrtRound,
    MovieLensClipRound,
    RewardHistogram,
    apply_transform,
    calibrate_alpha,
    cosine,
    feedback_histogram,
    reward_histogram,
    reward_matrix,
    tv_distance,
)
from src.environment.synth_users import SynthConfig, simulate_feedback
from src.errors import ChecksumError
from src.presets import (
    IMDB_PRESET,
    MOVIELENS_PRESET,
    build_classification_env,
    build_imdb_env,
    build_movielens_env,
    normalize_dataset_features,
)

HALF_STARS = {k / 2.0 for k in range(1, 11)}
TEN_STARS = {float(k) for k in range(1, 11)}

# Floors from a baseline run on the fixtures (tv 0.351; last-1000 means uniform 2.44-2.53, linucb 3.60-4.25)
LINUCB_RELATIVE_MARGIN = 0.35
TV_DISTANCE_CEILING = 0.40


def _imdb_catalog(env):
    """Catalog rows the synthetic users rated, rebuilt from the raw files"""
    raw = parse_imdb(IMDB_BASICS, IMDB_RATINGS, title_types=IMDB_PRESET.title_types)
    dataset = normalize_dataset_features(raw, IMDB_PRESET.normalizer())
    vocab = build_vocabulary(dataset, IMDB_PRESET.vocabulary)
    catalog, _ = encode_actions(ranked_items(dataset), vocab).without_zero_rows()
    return catalog.subset(env.provenance.notes['catalog_size'])


def _synth_feedback(env):
    synth = env.provenance.synth
    config = SynthConfig(
        num_users=synth['num_users'],
        num_nonzero=synth['num_nonzero'],
        rating_support=tuple(tuple(pair) for pair in synth['rating_support']),
        seed=synth['seed'],
    )
    return simulate_feedback(env.provenance.notes['catalog_size'], config)


class TestMovieLensStructure:

    def test_actions_dimension_and_codomain(self, movielens_env):
        assert movielens_env.num_actions == 100
        assert movielens_env.dimension == 18
        assert movielens_env.actions.vocabulary.features == MOVIELENS_PRESET.vocabulary
        assert set(np.unique(movielens_env.reward_matrix).tolist()) <= HALF_STARS

    def test_build_time(self):
        start = time.perf_counter()
        env, _ = build_movielens_env(str(MOVIELENS_RATINGS), str(MOVIELENS_MOVIES))
        _ = env.reward_matrix
        assert time.perf_counter() - start < 5.0

    def test_featureless_movie_reported(self, movielens_build):
        _, report = movielens_build
        assert report.dropped_items == ('77',)


class TestImdbStructure:

    def test_dimension_and_codomain(self, imdb_env):
        assert imdb_env.dimension == 27
        assert imdb_env.num_states == IMDB_TEST_USERS
        assert imdb_env.num_actions == 100
        assert set(np.unique(imdb_env.reward_matrix).tolist()) <= TEN_STARS

    def test_minimum_cosine_clamps_to_one(self):
        assert apply_transform(-1.0, ImdbSqrtRound()) == 1.0

    def test_fifty_ratings_per_user(self, imdb_env):
        for user in _synth_feedback(imdb_env):
            assert len(set(user.item_indices.tolist())) == 50
            assert np.all(user.values != 0)

    def test_actions_are_most_voted_catalog_items(self, imdb_env):
        catalog = _imdb_catalog(imdb_env)
        assert imdb_env.actions.item_ids == catalog.item_ids[:100]

    def test_build_time(self, imdb_preset):
        start = time.perf_counter()
        env, _ = build_imdb_env(str(IMDB_BASICS), str(IMDB_RATINGS), imdb_preset, seed=1)
        _ = env.reward_matrix
        assert time.perf_counter() - start < 10.0


class TestTransformPoints:

    def test_movielens(self):
        t = MovieLensClipRound()
        assert [apply_transform(c, t) for c in (-1.0, 0.0, 1.0)] == [0.5, 1.0, 5.0]

    def test_imdb(self):
        t = ImdbSqrtRound()
        assert [apply_transform(c, t) for c in (0.0, 1.0)] == [8.0, 10.0]


class TestStateRecomputation:

    def test_movielens_rows_match_raw_feedback(self, movielens_env):
        dataset = parse_movielens(MOVIELENS_RATINGS, MOVIELENS_MOVIES)
        rows = {item_id: row for row, item_id in enumerate(movielens_env.actions.item_ids)}
        actions = movielens_env.actions.matrix
        by_user = {}
        for interaction in dataset.interactions:
            if interaction.item_id in rows:
                by_user.setdefault(interaction.user_id, []).append(interaction)

        for row, user_id in enumerate(movielens_env.states.user_ids):
            expected = [0.0] * actions.shape[1]
            for interaction in by_user[user_id]:
                weight = (interaction.feedback - 0.5) / 4.5
                for j in range(actions.shape[1]):
                    expected[j] += weight * actions[rows[interaction.item_id], j]
            np.testing.assert_allclose(movielens_env.states.matrix[row], expected, rtol=0, atol=1e-12)

    def test_imdb_rows_match_logged_feedback(self, imdb_env):
        catalog = _imdb_catalog(imdb_env).matrix
        feedback = {f'synth-{user.user_index:06d}': user for user in _synth_feedback(imdb_env)}
        for row, user_id in enumerate(imdb_env.states.user_ids):
            user = feedback[user_id]
            expected = [0.0] * catalog.shape[1]
            for index, rating in zip(user.item_indices.tolist(), user.values.tolist()):
                weight = -1.0 + (rating - 1.0) * 2.0 / 9.0
                for j in range(catalog.shape[1]):
                    expected[j] += weight * catalog[index, j]
            np.testing.assert_allclose(imdb_env.states.matrix[row], expected, rtol=0, atol=1e-12)


class TestCosineInvariances:

    @pytest.mark.parametrize('factor', [1e-3, 0.5, 2.0, 1e3])
    def test_state_scale_invariance(self, movielens_env, factor):
        states = movielens_env.states.matrix[:20]
        actions = movielens_env.actions.matrix
        for s in states:
            for a in actions[:10]:
                assert abs(cosine(factor * s, a) - cosine(s, a)) <= 1e-9

    def test_symmetry_on_environment_rows(self, imdb_env):
        for s in imdb_env.states.matrix[:20]:
            for a in imdb_env.actions.matrix[:20]:
                assert cosine(s, a) == cosine(a, s)

    @pytest.mark.parametrize('transform', [MovieLensClipRound(), ImdbSqrtRound()])
    def test_monotone_transforms(self, transform):
        values = apply_transform(np.linspace(-1.0, 1.0, 10001), transform)
        assert np.all(np.diff(values) >= 0)


class TestRegretIdentities:

    @pytest.mark.parametrize('name', ['uniform', 'egreedy', 'linucb', 'softmax', 'oracle'])
    def test_reward_plus_regret(self, movielens_env, name):
        metrics = run(movielens_env, RunConfig(num_steps=20000, seed=11, agent=AgentSpec(name)))
        total = metrics.reward_series.sum() + metrics.summary['total_regret']
        assert abs(total - metrics.oracle_series.sum()) <= 1e-9 * max(1.0, metrics.oracle_series.sum())
        if name == 'oracle':
            assert metrics.summary['total_regret'] == 0.0


class TestLearningSignal:

    def test_linucb_beats_uniform_on_every_repeat(self, movielens_env):
        configs = [
            RunConfig(num_steps=20000, seed=0, agent=AgentSpec('uniform'), moving_average_window=1000),
            RunConfig(num_steps=20000, seed=0, agent=AgentSpec('linucb'), moving_average_window=1000),
        ]
        results = run_repeats(movielens_env, configs, repeats=5, workers=2)
        for r in range(5):
            uniform = results[(0, r)].summary['mean_reward_last_window']
            linucb = results[(1, r)].summary['mean_reward_last_window']
            assert linucb >= uniform * (1.0 + LINUCB_RELATIVE_MARGIN)


class TestDistributionFidelity:

    def test_tv_distance_reported_and_bounded(self, movielens_env):
        dataset = parse_movielens(MOVIELENS_RATINGS, MOVIELENS_MOVIES)
        data_hist = feedback_histogram(dataset)
        env_hist = reward_histogram(movielens_env.states, movielens_env.actions, movielens_env.transform)
        tv = tv_distance(data_hist, env_hist)
        assert np.isfinite(tv)
        assert 0.0 <= tv < TV_DISTANCE_CEILING

    def test_calibration_recovers_planted_alpha(self, movielens_env):
        states, actions = movielens_env.states, movielens_env.actions
        planted = AffineClip(scale=2.0, offset=0.0, round_step=0.5, clip_low=0.5, clip_high=5.0)
        target = RewardHistogram.from_values(reward_matrix(states.matrix, actions.matrix, planted))
        assert calibrate_alpha(states, actions, target, [0.5, 1.0, 2.0, 5.0, 10.0], 0.5, (0.5, 5.0)) == 2.0


class TestSerialization:

    def test_round_trip_rewards_bit_identical(self, imdb_env):
        loaded = loads(dumps(imdb_env))
        rng = np.random.default_rng(5)
        states = rng.integers(0, imdb_env.num_states, 1000)
        actions = rng.integers(0, imdb_env.num_actions, 1000)
        for s, a in zip(states.tolist(), actions.tolist()):
            assert loaded.pair_reward(s, a) == imdb_env.pair_reward(s, a)

    def test_corruption_rejected(self, movielens_env):
        data = bytearray(dumps(movielens_env))
        data[-10] = ord('0') if data[-10] != ord('0') else ord('1')
        with pytest.raises(ChecksumError):
            loads(bytes(data))


class TestClassificationAdapter:

    def test_binary_rewards_and_perfect_oracle(self):
        env, _ = build_classification_env(str(CLASSIFICATION_EXAMPLES))
        assert set(np.unique(env.reward_matrix).tolist()) <= {0.0, 1.0}
        metrics = run(env, RunConfig(num_steps=200, agent=AgentSpec('oracle'), moving_average_window=50))
        assert metrics.summary['mean_reward_overall'] == 1.0

    def test_each_example_rewards_only_its_label(self):
        env, _ = build_classification_env(str(CLASSIFICATION_EXAMPLES))
        np.testing.assert_array_equal(env.reward_matrix.sum(axis=1), np.ones(env.num_states))
