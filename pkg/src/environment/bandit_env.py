"""
Bandit Environment
Immutable (S, A, r) contextual bandit: state sampling, single-step rewards
and the exact oracle used for regret
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from ..errors import ConfigError, DimensionMismatchError, PreconditionError, ZeroNormRowError
from ..utils.rng import make_rng
from .encoder import ActionSet, StateSet
from .reward import RewardTransform, reward, reward_matrix, transform_to_dict

logger = logging.getLogger(__name__)

SAMPLER_KINDS = ('uniform_iid', 'round_robin')


@dataclass(frozen=True)
class SamplerConfig:
    """How states are drawn during a run"""
    kind: str = 'uniform_iid'
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ConfigError(f"Unknown sampler '{self.kind}', expected one of {SAMPLER_KINDS}")

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'seed': self.seed}


@dataclass(frozen=True)
class Provenance:
    """Build metadata carried into the environment file"""
    source_tag: str = 'generic'
    preset: Optional[str] = None
    seed: Optional[int] = None
    synth: Optional[Dict[str, Any]] = None
    notes: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'source_tag': self.source_tag,
            'preset': self.preset,
            'seed': self.seed,
            'synth': self.synth,
            'notes': dict(self.notes),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "Provenance":
        return cls(
            source_tag=payload.get('source_tag', 'generic'),
            preset=payload.get('preset'),
            seed=payload.get('seed'),
            synth=payload.get('synth'),
            notes=dict(payload.get('notes') or {}),
        )


@dataclass(frozen=True)
class Interaction:
    """One observe -> act -> reward round"""
    step_index: int
    state_index: int
    action_index: int
    reward: float


class SamplerCursor:
    """Per-run position of a state sampler; owned by a single run"""

    def __init__(self, kind: str, num_states: int, seed: int):
        self.kind = kind
        self.num_states = num_states
        self.seed = seed
        self.steps = 0
        self._rng = make_rng(seed)

    def next_index(self) -> int:
        if self.kind == 'round_robin':
            index = self.steps % self.num_states
        else:
            index = int(self._rng.integers(0, self.num_states))
        self.steps += 1
        return index


@dataclass(frozen=True)
class BanditEnvironment:
    """Validated contextual bandit (S, A, r); safe to share across threads"""
    states: StateSet
    actions: ActionSet
    transform: RewardTransform
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    provenance: Provenance = field(default_factory=Provenance)

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @property
    def dimension(self) -> int:
        return self.actions.dimension

    def cursor(self, seed: Optional[int] = None) -> SamplerCursor:
        """New sampler cursor (seed defaults to the configured sampler seed)"""
        return SamplerCursor(
            kind=self.sampler.kind,
            num_states=self.num_states,
            seed=self.sampler.seed if seed is None else seed,
        )

    def observe(self, cursor: SamplerCursor) -> Tuple[int, np.ndarray]:
        """Draw the next state; returns (state_index, state vector)"""
        index = cursor.next_index()
        return index, self.states.matrix[index]

    def _check_state(self, state_index: int) -> None:
        if not 0 <= state_index < self.num_states:
            raise PreconditionError(f"State index {state_index} out of range [0, {self.num_states})")

    def _check_action(self, action_index: int) -> None:
        if not 0 <= action_index < self.num_actions:
            raise PreconditionError(f"Action index {action_index} out of range [0, {self.num_actions})")

    def step(self, state_index: int, action_index: int) -> float:
        """
        Reward for taking action_index in state_index

        Read from the reward table, whose entries equal reward.reward() on the
        same rows bit for bit.
        """
        self._check_state(state_index)
        self._check_action(action_index)
        return float(self.reward_matrix[state_index, action_index])

    def pair_reward(self, state_index: int, action_index: int) -> float:
        """Reward recomputed from the raw rows through reward.reward()"""
        self._check_state(state_index)
        self._check_action(action_index)
        return reward(self.states.matrix[state_index], self.actions.matrix[action_index], self.transform)

    @cached_property
    def reward_matrix(self) -> np.ndarray:
        """Exact |S| x |A| reward table"""
        table = reward_matrix(self.states.matrix, self.actions.matrix, self.transform)
        table.setflags(write=False)
        return table

    def best_action(self, state_index: int) -> Tuple[int, float]:
        """Exhaustive argmax over actions; ties go to the smallest index"""
        self._check_state(state_index)
        row = self.reward_matrix[state_index]
        action_index = int(np.argmax(row))
        return action_index, float(row[action_index])

    def exhaustive_mean(self) -> float:
        """Mean reward over all state-action pairs"""
        return float(self.reward_matrix.mean())

    def exhaustive_std(self) -> float:
        """Population standard deviation of rewards over all pairs"""
        return float(self.reward_matrix.std())

    def summary(self) -> Dict[str, Any]:
        return {
            'states': self.num_states,
            'actions': self.num_actions,
            'dimension': self.dimension,
            'transform': transform_to_dict(self.transform),
            'sampler': self.sampler.to_dict(),
            'source_tag': self.provenance.source_tag,
            'preset': self.provenance.preset,
        }


def build(states: StateSet,
          actions: ActionSet,
          transform: RewardTransform,
          sampler: Optional[SamplerConfig] = None,
          provenance: Optional[Provenance] = None) -> BanditEnvironment:
    """
    Validate and seal an environment

    Args:
        states: State set
        actions: Action set
        transform: Reward transform
        sampler: State sampler config (uniform_iid, seed 0 by default)
        provenance: Build metadata

    Returns:
        BanditEnvironment

    Raises:
        DimensionMismatchError: If state and action vocabularies differ
        PreconditionError: If |S| < 1 or |A| < 2
        ZeroNormRowError: If any state or action row is all zeros
    """
    if states.dimension != actions.dimension:
        raise DimensionMismatchError(
            f"States have dimension {states.dimension} but actions have {actions.dimension}"
        )
    if states.vocabulary.features != actions.vocabulary.features:
        raise DimensionMismatchError("State and action vocabularies list different features")
    if len(states) < 1:
        raise PreconditionError("Environment needs at least one state")
    if len(actions) < 2:
        raise PreconditionError(f"Environment needs at least two actions, got {len(actions)}")
    if actions.zero_rows:
        raise ZeroNormRowError('action', actions.zero_rows)
    if states.zero_rows:
        raise ZeroNormRowError('state', states.zero_rows)

    env = BanditEnvironment(
        states=states,
        actions=actions,
        transform=transform,
        sampler=sampler or SamplerConfig(),
        provenance=provenance or Provenance(),
    )
    logger.info(
        f"Built environment: |S|={env.num_states}, |A|={env.num_actions}, "
        f"dim={env.dimension}, transform={transform.kind}, sampler={env.sampler.kind}"
    )
    return env
