"""
Tests for the sealed bandit environment, its sampler and the .cbe file format
"""

import numpy as np
import pytest

from src.environment.bandit_env import Provenance, SamplerConfig, build
from src.environment.encoder import ActionSet, FeatureVocabulary, StateSet
from src.environment.env_file import dumps, load, loads, save
from src.environment.reward import AffineClip, ScaledCosine
from src.errors import (
    ChecksumError,
    ConfigError,
    DimensionMismatchError,
    EnvironmentFileError,
    FormatVersionError,
    PreconditionError,
    TruncatedFileError,
    ZeroNormRowError,
)


def _sets(states, actions, features=('x', 'y')):
    vocab = FeatureVocabulary(features)
    state_set = StateSet(np.array(states, dtype=float), tuple(f's{i}' for i in range(len(states))), (0.0, 1.0), vocab)
    action_set = ActionSet(
        np.array(actions, dtype=float),
        tuple(f'a{i}' for i in range(len(actions))),
        tuple(f'A{i}' for i in range(len(actions))),
        vocab,
    )
    return state_set, action_set


class TestBuild:

    def test_summary(self, small_env):
        summary = small_env.summary()
        assert summary['states'] == 4
        assert summary['actions'] == 4
        assert summary['dimension'] == 3
        assert summary['transform']['kind'] == 'movielens_clip_round'

    def test_needs_two_actions(self):
        states, actions = _sets([[1.0, 0.0]], [[1.0, 0.0]])
        with pytest.raises(PreconditionError):
            build(states, actions, ScaledCosine())

    def test_zero_rows_rejected(self):
        states, actions = _sets([[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ZeroNormRowError) as excinfo:
            build(states, actions, ScaledCosine())
        assert excinfo.value.kind == 'state'
        assert excinfo.value.indices == [1]

    def test_vocabulary_mismatch(self):
        states, _ = _sets([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
        _, actions = _sets([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]], features=('y', 'x'))
        with pytest.raises(DimensionMismatchError):
            build(states, actions, ScaledCosine())

    def test_unknown_sampler(self):
        with pytest.raises(ConfigError):
            SamplerConfig(kind='weighted')


class TestStepAndOracle:

    def test_step_equals_pair_reward(self, small_env):
        for s in range(small_env.num_states):
            for a in range(small_env.num_actions):
                assert small_env.step(s, a) == small_env.pair_reward(s, a)

    def test_oracle_dominates_every_action(self, small_env):
        for s in range(small_env.num_states):
            best_action, best = small_env.best_action(s)
            assert small_env.step(s, best_action) == best
            for a in range(small_env.num_actions):
                assert best >= small_env.step(s, a)

    def test_oracle_ties_take_smallest_index(self):
        states, actions = _sets([[1.0, 1.0]], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        env = build(states, actions, AffineClip(scale=1.0, round_step=1.0))
        # cosines 0.707, 0.707, 1.0 all round up to 1
        assert env.best_action(0) == (0, 1.0)

    def test_out_of_range_indices(self, small_env):
        with pytest.raises(PreconditionError):
            small_env.step(4, 0)
        with pytest.raises(PreconditionError):
            small_env.step(0, -1)

    def test_reward_table_read_only(self, small_env):
        with pytest.raises(ValueError):
            small_env.reward_matrix[0, 0] = 0.0

    def test_exhaustive_statistics(self, small_env):
        table = small_env.reward_matrix
        assert small_env.exhaustive_mean() == pytest.approx(float(table.mean()))
        assert small_env.exhaustive_std() == pytest.approx(float(table.std()))


class TestSampler:

    def test_round_robin(self, small_env):
        env = build(small_env.states, small_env.actions, small_env.transform, SamplerConfig('round_robin'))
        cursor = env.cursor()
        assert [env.observe(cursor)[0] for _ in range(9)] == [0, 1, 2, 3, 0, 1, 2, 3, 0]

    def test_uniform_iid_seeded(self, small_env):
        first = small_env.cursor(seed=42)
        second = small_env.cursor(seed=42)
        draws = [small_env.observe(first)[0] for _ in range(50)]
        assert draws == [small_env.observe(second)[0] for _ in range(50)]
        assert set(draws) == {0, 1, 2, 3}

    def test_uniform_iid_frequencies(self):
        states, actions = _sets([[1.0, float(i)] for i in range(10)], [[1.0, 0.0], [0.0, 1.0]])
        env = build(states, actions, ScaledCosine(), SamplerConfig('uniform_iid', seed=21))
        cursor = env.cursor()
        draws = 10000
        counts = np.bincount([env.observe(cursor)[0] for _ in range(draws)], minlength=10)
        bound = 3 * np.sqrt(0.1 * 0.9 / draws)
        assert np.all(np.abs(counts / draws - 0.1) <= bound)

    def test_observe_returns_state_row(self, small_env):
        index, state = small_env.observe(small_env.cursor(seed=1))
        np.testing.assert_array_equal(state, small_env.states.matrix[index])


class TestEnvironmentFile:

    def test_round_trip_bit_identical(self, tmp_path, movielens_env):
        path = save(movielens_env, tmp_path / 'ml.cbe')
        loaded = load(path)
        np.testing.assert_array_equal(loaded.states.matrix, movielens_env.states.matrix)
        np.testing.assert_array_equal(loaded.actions.matrix, movielens_env.actions.matrix)
        assert loaded.transform == movielens_env.transform
        assert loaded.provenance == movielens_env.provenance

        rng = np.random.default_rng(0)
        for s, a in zip(rng.integers(0, loaded.num_states, 1000), rng.integers(0, loaded.num_actions, 1000)):
            assert loaded.pair_reward(int(s), int(a)) == movielens_env.pair_reward(int(s), int(a))

    def test_resave_reproduces_bytes(self, imdb_env):
        data = dumps(imdb_env)
        assert dumps(loads(data)) == data

    def test_layout(self, small_env):
        lines = dumps(small_env).split(b'\n')
        assert lines[0] == b'CBE 1'
        assert lines[2].startswith(b'sha256:')
        assert lines[3] == b''

    def test_corrupted_payload(self, small_env):
        data = bytearray(dumps(small_env))
        position = data.index(b'"titles"') + 2
        data[position] = ord('T')
        with pytest.raises(ChecksumError):
            loads(bytes(data))

    def test_bad_magic_and_version(self, small_env):
        data = dumps(small_env)
        with pytest.raises(FormatVersionError):
            loads(b'XYZ 1' + data[5:])
        with pytest.raises(FormatVersionError):
            loads(b'CBE 2' + data[5:])

    def test_truncated(self, small_env):
        data = dumps(small_env)
        with pytest.raises(TruncatedFileError):
            loads(data[:len(data) // 2])
        with pytest.raises(TruncatedFileError):
            loads(b'')

    def test_missing_file(self, tmp_path):
        with pytest.raises(EnvironmentFileError):
            load(tmp_path / 'absent.cbe')

    def test_provenance_round_trip(self, small_env):
        provenance = Provenance(source_tag='generic', preset=None, seed=3, notes={'k': [1, 2]})
        env = build(small_env.states, small_env.actions, small_env.transform, provenance=provenance)
        assert loads(dumps(env)).provenance == provenance
