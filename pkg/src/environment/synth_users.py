"""
Synthetic Users
Simulated sparse feedback vectors for datasets that carry no per-user
ratings (IMDb titles), turned into states with the regular state encoder
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from ..data.dataset import Dataset, FeedbackScale
from ..errors import ConfigError
from ..utils.rng import derive_seed, make_rng
from .encoder import ActionSet, Range, StateSet, encode_feedback

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    """How many users, how many ratings each, and which rating values"""
    num_users: int
    num_nonzero: int = 50
    rating_support: Tuple[Tuple[float, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, 'rating_support',
            tuple((float(value), float(prob)) for value, prob in self.rating_support),
        )
        if self.num_users < 1:
            raise ConfigError(f"num_users must be positive, got {self.num_users}")
        if self.num_nonzero < 1:
            raise ConfigError(f"num_nonzero must be positive, got {self.num_nonzero}")
        if not self.rating_support:
            raise ConfigError("rating_support must list at least one (value, probability) pair")
        values = [value for value, _ in self.rating_support]
        if len(set(values)) != len(values):
            raise ConfigError(f"rating_support repeats values: {values}")
        probs = [prob for _, prob in self.rating_support]
        if any(p < 0 for p in probs):
            raise ConfigError(f"rating_support has negative probabilities: {probs}")
        total = math.fsum(probs)
        if abs(total - 1.0) > 1e-12:
            raise ConfigError(f"rating_support probabilities sum to {total!r}, expected 1")

    @property
    def values(self) -> np.ndarray:
        return np.array([value for value, _ in self.rating_support], dtype=np.float64)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([prob for _, prob in self.rating_support], dtype=np.float64)

    def to_dict(self) -> Dict:
        return {
            'num_users': self.num_users,
            'num_nonzero': self.num_nonzero,
            'rating_support': [[value, prob] for value, prob in self.rating_support],
            'seed': self.seed,
        }


@dataclass(frozen=True)
class SparseFeedback:
    """One simulated user: distinct catalog indices and their ratings"""
    user_index: int
    item_indices: np.ndarray
    values: np.ndarray


def uniform_support(scale: FeedbackScale) -> Tuple[Tuple[float, float], ...]:
    """Equal probability on every value of a discrete scale."""
    values = scale.values()
    # Exact fractions would not sum to 1 in binary; give the remainder to the last value
    probs = [1.0 / len(values)] * len(values)
    probs[-1] = 1.0 - math.fsum(probs[:-1])
    return tuple(zip(values, probs))


def imdb_histogram_support(dataset: Dataset, scale: FeedbackScale) -> Tuple[Tuple[float, float], ...]:
    """
    Rating support weighted like the catalog's average-rating histogram

    Each item's mean rating is snapped to the nearest scale value; values no
    item snaps to get probability 0.

    Args:
        dataset: Dataset whose items carry mean_feedback
        scale: Discrete feedback scale

    Returns:
        (value, probability) pairs over the scale values
    """
    values = scale.values()
    counts = [0] * len(values)
    for item in dataset.items:
        if item.mean_feedback is None:
            continue
        snapped = min(max(item.mean_feedback, scale.min), scale.max)
        position = int(math.floor((snapped - scale.min) / scale.discrete_step + 0.5))
        counts[min(position, len(values) - 1)] += 1

    total = sum(counts)
    if total == 0:
        raise ConfigError("No item mean ratings available to build a histogram support")
    probs = [count / total for count in counts]
    last = max(i for i, count in enumerate(counts) if count > 0)
    probs[last] = 1.0 - math.fsum(p for i, p in enumerate(probs) if i != last)
    return tuple(zip(values, probs))


def simulate_feedback(catalog_size: int, config: SynthConfig) -> List[SparseFeedback]:
    """
    Sample sparse feedback vectors

    Each user draws num_nonzero distinct catalog indices uniformly without
    replacement and a rating for each from the configured support. User u
    uses its own Philox stream seeded with derive_seed(config.seed, u).

    Args:
        catalog_size: Number of catalog items
        config: Simulation config

    Returns:
        One SparseFeedback per user
    """
    if catalog_size < config.num_nonzero:
        raise ConfigError(
            f"num_nonzero {config.num_nonzero} exceeds catalog size {catalog_size}"
        )

    values = config.values
    probs = config.probabilities
    users = []
    for user_index in range(config.num_users):
        rng = make_rng(derive_seed(config.seed, user_index))
        indices = rng.choice(catalog_size, size=config.num_nonzero, replace=False)
        ratings = values[rng.choice(len(values), size=config.num_nonzero, p=probs)]
        users.append(SparseFeedback(user_index=user_index, item_indices=indices, values=ratings))

    logger.info(f"Simulated {config.num_users} users with {config.num_nonzero} ratings each")
    return users


def synthetic_user_id(user_index: int) -> str:
    return f"synth-{user_index:06d}"


def generate_states(full_action_set: ActionSet,
                    scale: FeedbackScale,
                    target: Range,
                    config: SynthConfig,
                    feedback: Optional[Sequence[SparseFeedback]] = None) -> StateSet:
    """
    Simulate feedback over the full catalog and encode it as states

    Args:
        full_action_set: Catalog rows the synthetic ratings refer to
        scale: Scale of the rating support values
        target: Normalization interval
        config: Simulation config
        feedback: Previously simulated vectors to encode instead of sampling

    Returns:
        StateSet with one row per synthetic user
    """
    if feedback is None:
        feedback = simulate_feedback(len(full_action_set), config)

    rows, cols, values = [], [], []
    for position, user in enumerate(feedback):
        rows.extend([position] * len(user.item_indices))
        cols.extend(int(i) for i in user.item_indices)
        values.extend(float(v) for v in user.values)

    user_ids = [synthetic_user_id(user.user_index) for user in feedback]
    return encode_feedback(user_ids, rows, cols, values, full_action_set, scale, target)
