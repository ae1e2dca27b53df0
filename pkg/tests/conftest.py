"""
Shared fixtures: bundled dataset paths, the two preset environments built
from them, and a small hand-made environment for agent and harness tests
"""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.data.dataset import Dataset, FeedbackScale, RawInteraction, RawItem
from src.environment.bandit_env import build
from src.environment.encoder import ActionSet, FeatureVocabulary, StateSet
from src.environment.reward import MovieLensClipRound
from src.presets import IMDB_PRESET, MOVIELENS_PRESET, build_imdb_env, build_movielens_env

FIXTURES = Path(__file__).resolve().parent.parent / 'data' / 'fixtures'

MOVIELENS_RATINGS = FIXTURES / 'movielens' / 'ratings.csv'
MOVIELENS_MOVIES = FIXTURES / 'movielens' / 'movies.csv'
IMDB_BASICS = FIXTURES / 'imdb' / 'title.basics.tsv'
IMDB_RATINGS = FIXTURES / 'imdb' / 'title.ratings.tsv'
CLASSIFICATION_EXAMPLES = FIXTURES / 'classification' / 'examples.csv'
MOVIELENS_SCHEMA_FILE = FIXTURES / 'generic' / 'movielens_schema.env'

IMDB_TEST_USERS = 1000


@pytest.fixture(scope='session')
def movielens_build():
    return build_movielens_env(str(MOVIELENS_RATINGS), str(MOVIELENS_MOVIES), MOVIELENS_PRESET, seed=0)


@pytest.fixture(scope='session')
def movielens_env(movielens_build):
    env, _ = movielens_build
    return env


@pytest.fixture(scope='session')
def imdb_preset():
    return replace(IMDB_PRESET, synth_users=IMDB_TEST_USERS)


@pytest.fixture(scope='session')
def imdb_build(imdb_preset):
    return build_imdb_env(str(IMDB_BASICS), str(IMDB_RATINGS), imdb_preset, seed=7)


@pytest.fixture(scope='session')
def imdb_env(imdb_build):
    env, _ = imdb_build
    return env


@pytest.fixture
def genre_vocab():
    return FeatureVocabulary(('Action', 'Comedy', 'Drama'))


@pytest.fixture
def tiny_dataset():
    """Three users, four items on the half-star scale"""
    items = (
        RawItem('m1', 'Alpha', ('Action',), popularity=3.0),
        RawItem('m2', 'Beta', ('Comedy', 'Drama'), popularity=2.0),
        RawItem('m3', 'Gamma', ('Drama',), popularity=2.0),
        RawItem('m4', 'Delta', ('Action', 'Comedy'), popularity=1.0),
    )
    interactions = (
        RawInteraction('u1', 'm1', 5.0, 10),
        RawInteraction('u1', 'm2', 0.5, 11),
        RawInteraction('u2', 'm1', 3.0, 12),
        RawInteraction('u2', 'm3', 4.5, 13),
        RawInteraction('u3', 'm1', 1.0, 14),
        RawInteraction('u3', 'm2', 2.5, 15),
        RawInteraction('u3', 'm4', 4.0, 16),
    )
    return Dataset(items=items, interactions=interactions, scale=FeedbackScale(0.5, 5.0, 0.5), source_tag='movielens')


@pytest.fixture
def small_env(genre_vocab):
    """Four states that each prefer a different action"""
    actions = ActionSet(
        matrix=np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
        ]),
        item_ids=('a0', 'a1', 'a2', 'a3'),
        titles=('Zero', 'One', 'Two', 'Three'),
        vocabulary=genre_vocab,
    )
    states = StateSet(
        matrix=np.array([
            [0.9, 0.1, 0.0],
            [0.1, 0.8, 0.1],
            [0.0, 0.2, 0.9],
            [0.6, 0.6, 0.1],
        ]),
        user_ids=('s0', 's1', 's2', 's3'),
        norm_range=(0.0, 1.0),
        vocabulary=genre_vocab,
    )
    return build(states, actions, MovieLensClipRound())
