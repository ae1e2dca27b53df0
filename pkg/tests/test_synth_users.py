"""
Tests for synthetic user simulation
"""

import math

import numpy as np
import pytest

from src.data.dataset import Dataset, FeedbackScale, RawItem
from src.environment.encoder import ActionSet, FeatureVocabulary
from src.environment.synth_users import (
    SynthConfig,
    generate_states,
    imdb_histogram_support,
    simulate_feedback,
    synthetic_user_id,
    uniform_support,
)
from src.errors import ConfigError

TEN_STARS = FeedbackScale(1.0, 10.0, 1.0)


@pytest.fixture
def catalog():
    vocab = FeatureVocabulary(('a', 'b', 'c', 'd'))
    rng = np.random.default_rng(3)
    matrix = (rng.random((60, 4)) < 0.4).astype(float)
    matrix[:, 0] = 1.0
    return ActionSet(
        matrix=matrix,
        item_ids=tuple(f'i{k}' for k in range(60)),
        titles=tuple(f'Item {k}' for k in range(60)),
        vocabulary=vocab,
    )


class TestSupports:

    def test_uniform_support_sums_to_one(self):
        support = uniform_support(TEN_STARS)
        assert [value for value, _ in support] == [float(v) for v in range(1, 11)]
        assert math.fsum(p for _, p in support) == 1.0

    def test_histogram_support(self):
        items = (
            RawItem('a', 'A', ('x',), mean_feedback=7.2),
            RawItem('b', 'B', ('x',), mean_feedback=6.8),
            RawItem('c', 'C', ('x',), mean_feedback=2.4),
            RawItem('d', 'D', ('x',)),
        )
        dataset = Dataset(items=items, interactions=(), scale=TEN_STARS, source_tag='imdb')
        support = dict(imdb_histogram_support(dataset, TEN_STARS))
        assert support[7.0] == pytest.approx(2 / 3)
        assert support[2.0] == pytest.approx(1 / 3)
        assert support[5.0] == 0.0

    def test_config_rejects_bad_probabilities(self):
        with pytest.raises(ConfigError):
            SynthConfig(num_users=1, rating_support=((1.0, 0.5), (2.0, 0.4)))
        with pytest.raises(ConfigError):
            SynthConfig(num_users=1, rating_support=())


class TestSimulateFeedback:

    def test_exact_nonzero_count_and_distinct_items(self):
        config = SynthConfig(num_users=40, num_nonzero=15, rating_support=uniform_support(TEN_STARS), seed=11)
        for user in simulate_feedback(60, config):
            assert len(user.item_indices) == 15
            assert len(set(user.item_indices.tolist())) == 15
            assert set(user.values.tolist()) <= set(float(v) for v in range(1, 11))

    def test_deterministic_per_seed(self):
        config = SynthConfig(num_users=5, num_nonzero=10, rating_support=uniform_support(TEN_STARS), seed=2)
        first = simulate_feedback(60, config)
        second = simulate_feedback(60, config)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.item_indices, b.item_indices)
            np.testing.assert_array_equal(a.values, b.values)

    def test_users_do_not_depend_on_population_size(self):
        support = uniform_support(TEN_STARS)
        small = simulate_feedback(60, SynthConfig(num_users=3, num_nonzero=10, rating_support=support, seed=5))
        large = simulate_feedback(60, SynthConfig(num_users=30, num_nonzero=10, rating_support=support, seed=5))
        for a, b in zip(small, large):
            np.testing.assert_array_equal(a.item_indices, b.item_indices)

    def test_rating_marginal_matches_support(self):
        config = SynthConfig(num_users=1000, num_nonzero=50, rating_support=uniform_support(TEN_STARS), seed=17)
        values = np.concatenate([user.values for user in simulate_feedback(200, config)])
        draws = len(values)
        assert draws == 50000
        bound = 3 * math.sqrt(0.1 * 0.9 / draws)
        for rating in range(1, 11):
            assert abs(np.mean(values == float(rating)) - 0.1) <= bound

    def test_whole_catalog_rated_once(self):
        config = SynthConfig(num_users=20, num_nonzero=60, rating_support=uniform_support(TEN_STARS), seed=4)
        for user in simulate_feedback(60, config):
            assert sorted(user.item_indices.tolist()) == list(range(60))

    def test_catalog_too_small(self):
        config = SynthConfig(num_users=1, num_nonzero=61, rating_support=uniform_support(TEN_STARS))
        with pytest.raises(ConfigError):
            simulate_feedback(60, config)


class TestGenerateStates:

    def test_states_match_logged_feedback(self, catalog):
        config = SynthConfig(num_users=10, num_nonzero=12, rating_support=uniform_support(TEN_STARS), seed=9)
        feedback = simulate_feedback(len(catalog), config)
        states = generate_states(catalog, TEN_STARS, (-1.0, 1.0), config, feedback=feedback)

        assert states.user_ids == tuple(synthetic_user_id(u) for u in range(10))
        for row, user in enumerate(feedback):
            expected = np.zeros(catalog.dimension)
            for index, rating in zip(user.item_indices, user.values):
                expected += (-1.0 + (rating - 1.0) * 2.0 / 9.0) * catalog.matrix[index]
            np.testing.assert_allclose(states.matrix[row], expected, rtol=0, atol=1e-12)

    def test_sampling_path_equals_logged_path(self, catalog):
        config = SynthConfig(num_users=4, num_nonzero=8, rating_support=uniform_support(TEN_STARS), seed=1)
        direct = generate_states(catalog, TEN_STARS, (-1.0, 1.0), config)
        logged = generate_states(catalog, TEN_STARS, (-1.0, 1.0), config, feedback=simulate_feedback(60, config))
        np.testing.assert_array_equal(direct.matrix, logged.matrix)
