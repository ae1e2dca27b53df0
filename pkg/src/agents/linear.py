"""
Linear Contextual Agents
Disjoint linear UCB and a softmax linear policy trained by policy gradient
"""

from typing import Optional

import numpy as np

from ..errors import AgentUpdateError, ConfigError
from .base import BanditAgent, unit_context


class LinUCBAgent(BanditAgent):
    """
    Disjoint LinUCB: one ridge regression per action.

    score_a = theta_a . s + beta * sqrt(s' A_a^-1 s), theta_a = A_a^-1 b_a

    With warm_start, actions that were never played are tried first, in index
    order, so every per-action model has at least one observation before scores
    are compared. Without it act is the plain argmax of the scores.
    """

    name = "linucb"

    def __init__(self,
                 num_actions: int,
                 dimension: int,
                 seed: int = 0,
                 beta: float = 1.0,
                 ridge: float = 1.0,
                 normalize_context: bool = True,
                 warm_start: bool = True):
        super().__init__(num_actions, dimension, seed)
        if beta < 0:
            raise ConfigError(f"beta must be nonnegative, got {beta}")
        if not ridge > 0:
            raise ConfigError(f"ridge must be positive, got {ridge}")
        self.beta = float(beta)
        self.ridge = float(ridge)
        self.normalize_context = normalize_context
        self.warm_start = warm_start

        eye = np.eye(dimension, dtype=np.float64)
        self.A = np.repeat((ridge * eye)[None, :, :], num_actions, axis=0)
        self.A_inv = np.repeat((eye / ridge)[None, :, :], num_actions, axis=0)
        self.b = np.zeros((num_actions, dimension), dtype=np.float64)
        self.counts = np.zeros(num_actions, dtype=np.int64)

    def _context(self, state: np.ndarray) -> np.ndarray:
        state = self._check_state(state)
        return unit_context(state) if self.normalize_context else state

    def scores(self, state: np.ndarray) -> np.ndarray:
        """Upper confidence score of every action"""
        s = self._context(state)
        theta = np.einsum('aij,aj->ai', self.A_inv, self.b)
        width = np.einsum('i,aij,j->a', s, self.A_inv, s)
        return theta @ s + self.beta * np.sqrt(np.maximum(width, 0.0))

    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        untried = np.flatnonzero(self.counts == 0) if self.warm_start else ()
        if len(untried):
            self._check_state(state)
            return int(untried[0])
        return int(np.argmax(self.scores(state)))

    def update(self, state: np.ndarray, action: int, reward: float) -> None:
        self._check_feedback(action, reward)
        s = self._context(state)
        self.A[action] += np.outer(s, s)
        self.b[action] += reward * s
        self.counts[action] += 1
        # Sherman-Morrison rank-one update of the cached inverse
        A_inv = self.A_inv[action]
        u = A_inv @ s
        self.A_inv[action] = A_inv - np.outer(u, u) / (1.0 + s @ u)


class SoftmaxPolicyAgent(BanditAgent):
    """
    Linear softmax policy pi(a|s) = softmax(W s)_a trained with REINFORCE.

    Each update takes one gradient step on (r - baseline) * log pi(a|s), where
    the baseline is the running mean of all rewards seen so far.
    """

    name = "softmax"

    def __init__(self,
                 num_actions: int,
                 dimension: int,
                 seed: int = 0,
                 learning_rate: float = 0.1,
                 normalize_context: bool = True):
        super().__init__(num_actions, dimension, seed)
        if not learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {learning_rate}")
        self.learning_rate = float(learning_rate)
        self.normalize_context = normalize_context
        self.W = np.zeros((num_actions, dimension), dtype=np.float64)
        self.baseline = 0.0
        self.updates = 0

    def _context(self, state: np.ndarray) -> np.ndarray:
        state = self._check_state(state)
        return unit_context(state) if self.normalize_context else state

    def probabilities(self, state: np.ndarray) -> np.ndarray:
        logits = self.W @ self._context(state)
        logits = logits - logits.max()
        weights = np.exp(logits)
        return weights / weights.sum()

    def act(self, state: np.ndarray, state_index: Optional[int] = None) -> int:
        return int(self.rng.choice(self.num_actions, p=self.probabilities(state)))

    def update(self, state: np.ndarray, action: int, reward: float) -> None:
        self._check_feedback(action, reward)
        s = self._context(state)
        probs = self.probabilities(state)

        grad = -probs
        grad[action] += 1.0
        advantage = reward - self.baseline
        self.W += self.learning_rate * advantage * np.outer(grad, s)
        if not np.all(np.isfinite(self.W)):
            self.logger.warning(f"{self.name}: weights diverged after {self.updates} updates (reward {reward!r})")
            raise AgentUpdateError(self.name, reward, "policy weights diverged")

        self.updates += 1
        self.baseline += (reward - self.baseline) / self.updates
