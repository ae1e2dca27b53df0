"""
Context-free agents: uniform random, epsilon-greedy and the exact oracle
"""

from typing import Optional

import numpy as np

from ..environment.bandit_env import BanditEnvironment
from ..errors import ConfigError, PreconditionError
from .base import BanditAgent


class UniformAgent(BanditAgent):
    """Seeded uniform random action"""

    name = "uniform"

    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        self._check_state(state)
        return int(self.rng.integers(0, self.num_actions))


class EpsilonGreedyAgent(BanditAgent):
    """
    Per-action running means; explores uniformly with probability epsilon.

    Ignores the context, so it can only find the single best action on
    average over users.
    """

    name = "egreedy"

    def __init__(self, num_actions: int, dimension: int, seed: int = 0, epsilon: float = 0.1):
        super().__init__(num_actions, dimension, seed)
        if not 0.0 <= epsilon <= 1.0:
            raise ConfigError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.epsilon = float(epsilon)
        self.counts = np.zeros(num_actions, dtype=np.int64)
        self.means = np.zeros(num_actions, dtype=np.float64)

    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        self._check_state(state)
        if self.epsilon > 0 and self.rng.random() < self.epsilon:
            return int(self.rng.integers(0, self.num_actions))
        # np.argmax returns the first maximum
        return int(np.argmax(self.means))

    def update(self, state: np.ndarray, action: int, reward: float) -> None:
        super().update(state, action, reward)
        self.counts[action] += 1
        self.means[action] += (reward - self.means[action]) / self.counts[action]


class OracleAgent(BanditAgent):
    """Always plays the environment's best action for the observed state"""

    name = "oracle"

    def __init__(self, env: BanditEnvironment, seed: int = 0):
        super().__init__(env.num_actions, env.dimension, seed)
        self.env = env

    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        self._check_state(state)
        if state_index is None:
            raise PreconditionError("Oracle agent needs the observed state index")
        action, _ = self.env.best_action(state_index)
        return action
