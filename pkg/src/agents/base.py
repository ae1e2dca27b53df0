"""
Agent Base
Common interface and checks shared by all bandit agents
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional
import logging
import math

import numpy as np

from ..errors import AgentUpdateError, DimensionMismatchError, PreconditionError
from ..utils.rng import make_rng


@dataclass(frozen=True)
class AgentSpec:
    """Agent name plus hyperparameter overrides"""
    name: str
    params: Dict[str, Any] = field(default_factory=dict)

    def label(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({args})"


class BanditAgent(ABC):
    """
    A policy over |A| actions for d-dimensional contexts.

    Each instance is driven by exactly one run: act() then update() per step.
    """

    name = "agent"

    def __init__(self, num_actions: int, dimension: int, seed: int = 0):
        if num_actions < 1:
            raise PreconditionError(f"{self.name} needs at least one action")
        self.num_actions = num_actions
        self.dimension = dimension
        self.seed = seed
        self.rng = make_rng(seed)
        self.logger = logging.getLogger(__name__)

    def _check_state(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=np.float64)
        if state.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"{self.name} expects states of dimension {self.dimension}, got shape {state.shape}"
            )
        return state

    def _check_feedback(self, action: int, reward: float) -> None:
        if not 0 <= action < self.num_actions:
            raise PreconditionError(f"Action {action} out of range [0, {self.num_actions})")
        if not math.isfinite(reward):
            raise AgentUpdateError(self.name, reward, "reward is not finite")

    @abstractmethod
    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        """Choose an action index for the observed state"""

    def update(self, state: np.ndarray, action: int, reward: float) -> None:
        """Learn from the reward of the chosen action (no-op by default)"""
        self._check_state(state)
        self._check_feedback(action, reward)


def unit_context(state: np.ndarray) -> np.ndarray:
    """State scaled to unit L2 norm (zero vectors are returned unchanged)"""
    norm = float(np.sqrt(np.dot(state, state)))
    return state / norm if norm > 0 else state
