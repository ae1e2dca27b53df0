"""
Feature Encoder
One-hot action parameterization of content items and feedback-weighted user
state parameterization built on top of it
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from ..data.dataset import Dataset, FeedbackScale, RawItem
from ..errors import (
    ConfigError,
    ConsistencyError,
    DimensionMismatchError,
    FeedbackRangeError,
    VocabularyMismatchError,
)

logger = logging.getLogger(__name__)

Range = Tuple[float, float]


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class FeatureVocabulary:
    """Ordered feature list; coordinate j of every vector is features[j]"""
    features: Tuple[str, ...]
    _positions: Dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'features', tuple(self.features))
        duplicates = sorted({f for f in self.features if self.features.count(f) > 1})
        if duplicates:
            raise ConfigError(f"Vocabulary has duplicate features: {duplicates}")
        object.__setattr__(self, '_positions', {f: j for j, f in enumerate(self.features)})

    def __len__(self) -> int:
        return len(self.features)

    def __contains__(self, feature: str) -> bool:
        return feature in self._positions

    def index(self, feature: str) -> int:
        return self._positions[feature]


@dataclass(frozen=True)
class ActionSet:
    """Binary |A| x |T| action matrix with item provenance"""
    matrix: np.ndarray
    item_ids: Tuple[str, ...]
    titles: Tuple[str, ...]
    vocabulary: FeatureVocabulary

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen(self.matrix))
        object.__setattr__(self, 'item_ids', tuple(self.item_ids))
        object.__setattr__(self, 'titles', tuple(self.titles))
        if self.matrix.ndim != 2 or self.matrix.shape != (len(self.item_ids), len(self.vocabulary)):
            raise DimensionMismatchError(
                f"Action matrix shape {self.matrix.shape} does not match "
                f"{len(self.item_ids)} items x {len(self.vocabulary)} features"
            )

    def __len__(self) -> int:
        return len(self.item_ids)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def zero_rows(self) -> Tuple[int, ...]:
        """Indices of items without any vocabulary feature"""
        return tuple(int(i) for i in np.flatnonzero(~self.matrix.any(axis=1)))

    def without_zero_rows(self) -> Tuple["ActionSet", Tuple[str, ...]]:
        """Copy without zero rows, plus the dropped item ids"""
        zero = set(self.zero_rows)
        if not zero:
            return self, ()
        keep = [i for i in range(len(self)) if i not in zero]
        dropped = tuple(self.item_ids[i] for i in sorted(zero))
        return ActionSet(
            matrix=self.matrix[keep],
            item_ids=tuple(self.item_ids[i] for i in keep),
            titles=tuple(self.titles[i] for i in keep),
            vocabulary=self.vocabulary,
        ), dropped

    def subset(self, count: int) -> "ActionSet":
        """First `count` rows (ranked catalogs put the most popular first)"""
        return ActionSet(
            matrix=self.matrix[:count],
            item_ids=self.item_ids[:count],
            titles=self.titles[:count],
            vocabulary=self.vocabulary,
        )

    def to_frame(self) -> pd.DataFrame:
        """Table of items with one 0/1 column per feature"""
        df = pd.DataFrame(self.matrix.astype(int), columns=list(self.vocabulary.features))
        df.insert(0, 'title', list(self.titles))
        df.insert(0, 'item_id', list(self.item_ids))
        return df


@dataclass(frozen=True)
class StateSet:
    """Real |S| x |T| state matrix with user provenance"""
    matrix: np.ndarray
    user_ids: Tuple[str, ...]
    norm_range: Range
    vocabulary: FeatureVocabulary

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen(self.matrix))
        object.__setattr__(self, 'user_ids', tuple(self.user_ids))
        object.__setattr__(self, 'norm_range', (float(self.norm_range[0]), float(self.norm_range[1])))
        if self.matrix.ndim != 2 or self.matrix.shape != (len(self.user_ids), len(self.vocabulary)):
            raise DimensionMismatchError(
                f"State matrix shape {self.matrix.shape} does not match "
                f"{len(self.user_ids)} users x {len(self.vocabulary)} features"
            )

    def __len__(self) -> int:
        return len(self.user_ids)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def zero_rows(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(~self.matrix.any(axis=1)))

    def without_zero_rows(self) -> Tuple["StateSet", Tuple[str, ...]]:
        """Copy without zero-norm users, plus the dropped user ids"""
        zero = set(self.zero_rows)
        if not zero:
            return self, ()
        keep = [i for i in range(len(self)) if i not in zero]
        dropped = tuple(self.user_ids[i] for i in sorted(zero))
        return StateSet(
            matrix=self.matrix[keep],
            user_ids=tuple(self.user_ids[i] for i in keep),
            norm_range=self.norm_range,
            vocabulary=self.vocabulary,
        ), dropped

    def to_frame(self) -> pd.DataFrame:
        """Table of users with one column per feature"""
        df = pd.DataFrame(self.matrix, columns=list(self.vocabulary.features))
        df.insert(0, 'user_id', list(self.user_ids))
        return df


def build_vocabulary(dataset: Dataset, explicit: Optional[Sequence[str]] = None) -> FeatureVocabulary:
    """
    Build the feature vocabulary for a dataset

    Args:
        dataset: Dataset whose item features must be covered
        explicit: Optional ordered feature list (e.g. a preset genre list)

    Returns:
        FeatureVocabulary in explicit order, else lexicographic order

    Raises:
        VocabularyMismatchError: If data features are missing from the explicit list
    """
    present = {feature for item in dataset.items for feature in item.features}
    if explicit is None:
        return FeatureVocabulary(tuple(sorted(present)))

    vocabulary = FeatureVocabulary(tuple(explicit))
    offenders = [feature for feature in present if feature not in vocabulary]
    if offenders:
        raise VocabularyMismatchError(offenders)

    unused = [feature for feature in vocabulary.features if feature not in present]
    if unused:
        logger.debug(f"Vocabulary features unused by the data: {unused}")
    return vocabulary


def encode_actions(items: Iterable[RawItem], vocab: FeatureVocabulary) -> ActionSet:
    """
    One-hot encode items: row i = sum_j delta(y_i, t_j) e(t_j)

    Args:
        items: Items in action order
        vocab: Feature vocabulary

    Returns:
        ActionSet (zero-feature items produce flagged all-zero rows)
    """
    items = list(items)
    matrix = np.zeros((len(items), len(vocab)), dtype=np.float64)
    offenders = []
    for row, item in enumerate(items):
        for feature in item.features:
            if feature not in vocab:
                offenders.append(feature)
                continue
            matrix[row, vocab.index(feature)] = 1.0
    if offenders:
        raise VocabularyMismatchError(offenders)

    action_set = ActionSet(
        matrix=matrix,
        item_ids=tuple(item.item_id for item in items),
        titles=tuple(item.title for item in items),
        vocabulary=vocab,
    )
    if action_set.zero_rows:
        logger.warning(f"{len(action_set.zero_rows)} items have no vocabulary features (zero action rows)")
    return action_set


def normalize_feedback(value: float, scale: FeedbackScale, target: Range) -> float:
    """
    Affine map of a feedback value from its scale onto the target interval

    Args:
        value: Feedback on the dataset scale
        scale: Declared feedback scale
        target: (low, high) target interval

    Returns:
        Normalized feedback

    Raises:
        FeedbackRangeError: If value lies outside the scale
    """
    low, high = _check_target(target)
    if not scale.contains(value):
        raise FeedbackRangeError(f"Feedback {value} outside scale [{scale.min}, {scale.max}]")
    if value == scale.min:
        return low
    if value == scale.max:
        return high
    return low + (value - scale.min) * (high - low) / (scale.max - scale.min)


def _check_target(target: Range) -> Range:
    low, high = float(target[0]), float(target[1])
    if not low < high:
        raise ConfigError(f"Normalization target needs low < high, got {target}")
    return low, high


def encode_feedback(user_ids: Sequence[str],
                    rows: Sequence[int],
                    cols: Sequence[int],
                    values: Sequence[float],
                    action_set: ActionSet,
                    scale: FeedbackScale,
                    target: Range) -> StateSet:
    """
    Sum normalized feedback times action rows per user (sparse COO input)

    Args:
        user_ids: Provenance id for each state row
        rows: State row of each feedback entry
        cols: Action row (catalog index) of each feedback entry
        values: Raw feedback values on `scale`
        action_set: Catalog used for state construction
        scale: Feedback scale of `values`
        target: Normalization interval

    Returns:
        StateSet with one row per user id
    """
    _check_target(target)
    normalized = np.array([normalize_feedback(float(v), scale, target) for v in values], dtype=np.float64)
    states = np.zeros((len(user_ids), action_set.dimension), dtype=np.float64)
    if len(normalized):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        # np.add.at accumulates in entry order, so results do not depend on batching
        np.add.at(states, rows, normalized[:, None] * action_set.matrix[cols])
    return StateSet(matrix=states, user_ids=tuple(user_ids), norm_range=target, vocabulary=action_set.vocabulary)


def encode_states(dataset: Dataset,
                  action_set: ActionSet,
                  scale: FeedbackScale,
                  target: Range,
                  users: Optional[Sequence[str]] = None) -> StateSet:
    """
    State of user x: s = sum_i f(x, y_i) a_i over recorded feedback only

    Args:
        dataset: Dataset with interactions
        action_set: Catalog rows used for state construction
        scale: Feedback scale
        target: Normalization interval
        users: Optional ordered user list; users without interactions are excluded

    Returns:
        StateSet (users in first-appearance order unless `users` is given)

    Raises:
        ConsistencyError: If an interaction references an item absent from action_set
    """
    catalog = {item_id: row for row, item_id in enumerate(action_set.item_ids)}

    by_user: Dict[str, List[Tuple[int, float]]] = {}
    missing = set()
    for interaction in dataset.interactions:
        row = catalog.get(interaction.item_id)
        if row is None:
            missing.add(interaction.item_id)
            continue
        by_user.setdefault(interaction.user_id, []).append((row, interaction.feedback))
    if missing:
        raise ConsistencyError(
            f"{len(missing)} interacted items are absent from the action set, e.g. {sorted(missing)[:5]}"
        )

    order = list(users) if users is not None else list(by_user)
    excluded = [user_id for user_id in order if user_id not in by_user]
    if excluded:
        logger.warning(f"Excluded {len(excluded)} users with zero interactions from the state set")
    order = [user_id for user_id in order if user_id in by_user]

    rows, cols, values = [], [], []
    for state_row, user_id in enumerate(order):
        for col, feedback in by_user[user_id]:
            rows.append(state_row)
            cols.append(col)
            values.append(feedback)

    state_set = encode_feedback(order, rows, cols, values, action_set, scale, target)
    logger.info(f"Encoded {len(state_set)} user states in R^{state_set.dimension}")
    return state_set
