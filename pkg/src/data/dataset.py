"""
Dataset Types

Common in-memory representation of a recommendation dataset: content items
described by feature lists, user feedback on those items, and the scale the
feedback is recorded on.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple
import logging
import math

import pandas as pd

from ..errors import ConfigError, ConsistencyError, FeedbackRangeError

logger = logging.getLogger(__name__)

SOURCE_TAGS = ("movielens", "imdb", "generic", "classification")


@dataclass(frozen=True)
class FeedbackScale:
    """Bounds (and optional step) of the feedback values in a dataset"""
    min: float
    max: float
    discrete_step: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min >= self.max:
            raise ConfigError(f"Feedback scale needs min < max, got [{self.min}, {self.max}]")
        if self.discrete_step is not None:
            if self.discrete_step <= 0:
                raise ConfigError(f"Feedback scale step must be positive, got {self.discrete_step}")
            steps = (self.max - self.min) / self.discrete_step
            if abs(steps - round(steps)) > 1e-9:
                raise ConfigError(
                    f"Scale range {self.max - self.min} is not a multiple of step {self.discrete_step}"
                )

    def contains(self, value: float) -> bool:
        return self.min <= value <= self.max

    def values(self) -> Tuple[float, ...]:
        """All values on a discrete scale, ascending"""
        if self.discrete_step is None:
            raise ConfigError("Continuous feedback scale has no finite value set")
        count = int(round((self.max - self.min) / self.discrete_step))
        return tuple(self.min + k * self.discrete_step for k in range(count + 1))


@dataclass(frozen=True)
class RawItem:
    """A content item and its features"""
    item_id: str
    title: str
    features: Tuple[str, ...] = ()
    popularity: float = 0.0
    mean_feedback: Optional[float] = None

    def __post_init__(self):
        # Duplicates are removed here so every parser gets the same guarantee
        deduped = tuple(dict.fromkeys(self.features))
        if deduped != tuple(self.features):
            object.__setattr__(self, 'features', deduped)
        if self.popularity < 0:
            raise ConfigError(f"Item {self.item_id} has negative popularity {self.popularity}")


@dataclass(frozen=True)
class RawInteraction:
    """Feedback of one user on one item"""
    user_id: str
    item_id: str
    feedback: float
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class Dataset:
    """Items, interactions and the feedback scale; immutable after construction"""
    items: Tuple[RawItem, ...]
    interactions: Tuple[RawInteraction, ...]
    scale: FeedbackScale
    source_tag: str = "generic"
    _item_index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'items', tuple(self.items))
        object.__setattr__(self, 'interactions', tuple(self.interactions))

        if self.source_tag not in SOURCE_TAGS:
            raise ConfigError(f"Unknown source tag '{self.source_tag}', expected one of {SOURCE_TAGS}")

        index = {}
        for position, item in enumerate(self.items):
            if item.item_id in index:
                raise ConsistencyError(f"Duplicate item_id '{item.item_id}'")
            index[item.item_id] = position
        object.__setattr__(self, '_item_index', index)

        for interaction in self.interactions:
            if interaction.item_id not in index:
                raise ConsistencyError(
                    f"Interaction of user '{interaction.user_id}' references unknown item '{interaction.item_id}'"
                )
            if not self.scale.contains(interaction.feedback):
                raise FeedbackRangeError(
                    f"Feedback {interaction.feedback} outside scale [{self.scale.min}, {self.scale.max}]"
                )

    @property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(item.item_id for item in self.items)

    def item(self, item_id: str) -> RawItem:
        return self.items[self._item_index[item_id]]

    def has_item(self, item_id: str) -> bool:
        return item_id in self._item_index

    def user_ids(self) -> Tuple[str, ...]:
        """Distinct users in order of first appearance"""
        return tuple(dict.fromkeys(i.user_id for i in self.interactions))

    def replace(self, items=None, interactions=None) -> "Dataset":
        """Copy with items and/or interactions swapped out"""
        return Dataset(
            items=self.items if items is None else items,
            interactions=self.interactions if interactions is None else interactions,
            scale=self.scale,
            source_tag=self.source_tag,
        )

    def to_frames(self) -> Tuple[pd.DataFrame, pd.DataFrame]:
        """
        Tabular view of the dataset

        Returns:
            (items DataFrame, interactions DataFrame)
        """
        items_df = pd.DataFrame(
            [
                {
                    'item_id': item.item_id,
                    'title': item.title,
                    'features': list(item.features),
                    'popularity': item.popularity,
                    'mean_feedback': item.mean_feedback,
                }
                for item in self.items
            ],
            columns=['item_id', 'title', 'features', 'popularity', 'mean_feedback'],
        )
        interactions_df = pd.DataFrame(
            [
                {
                    'user_id': i.user_id,
                    'item_id': i.item_id,
                    'feedback': i.feedback,
                    'timestamp': i.timestamp,
                }
                for i in self.interactions
            ],
            columns=['user_id', 'item_id', 'feedback', 'timestamp'],
        )
        return items_df, interactions_df
