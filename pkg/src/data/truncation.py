"""
Dataset Truncation
Popularity (items) and activity (users) cut-offs used to shrink a catalog to
a practical action space
"""

import logging
from collections import Counter

from ..errors import ConfigError, PreconditionError
from .dataset import Dataset

logger = logging.getLogger(__name__)


def top_k_items(dataset: Dataset, k: int) -> Dataset:
    """
    Keep the k most popular items

    Ties are broken by ascending item_id, then input order. Interactions on
    dropped items are removed. When k covers the whole catalog the dataset is
    returned unchanged.

    Args:
        dataset: Source dataset
        k: Number of items to keep (>= 1)

    Returns:
        Dataset whose items are ranked by popularity
    """
    if k < 1:
        raise ConfigError(f"top_k_items needs k >= 1, got {k}")
    if k >= len(dataset.items):
        return dataset

    kept = ranked_items(dataset)[:k]
    kept_ids = {item.item_id for item in kept}
    interactions = tuple(i for i in dataset.interactions if i.item_id in kept_ids)

    logger.info(
        f"Kept top {k} of {len(dataset.items)} items; "
        f"{len(dataset.interactions) - len(interactions)} interactions dropped"
    )
    return dataset.replace(items=kept, interactions=interactions)


def top_k_users(dataset: Dataset, k: int) -> Dataset:
    """
    Keep interactions of the k most active users

    Activity is the number of interactions; ties by ascending user_id. Items
    are untouched and retained interactions keep their input order.

    Args:
        dataset: Source dataset with interactions
        k: Number of users to keep (>= 1)

    Returns:
        Dataset restricted to the selected users
    """
    if k < 1:
        raise ConfigError(f"top_k_users needs k >= 1, got {k}")
    if not dataset.interactions:
        raise PreconditionError("top_k_users needs a dataset with interactions")

    activity = Counter(i.user_id for i in dataset.interactions)
    if k >= len(activity):
        return dataset

    ranked = sorted(activity.items(), key=lambda pair: (-pair[1], pair[0]))
    kept_users = {user_id for user_id, _ in ranked[:k]}
    interactions = tuple(i for i in dataset.interactions if i.user_id in kept_users)

    logger.info(f"Kept top {k} of {len(activity)} users ({len(interactions)} interactions)")
    return dataset.replace(interactions=interactions)


def ranked_users(dataset: Dataset, k: int) -> tuple:
    """User ids of the k most active users, most active first."""
    activity = Counter(i.user_id for i in dataset.interactions)
    ranked = sorted(activity.items(), key=lambda pair: (-pair[1], pair[0]))
    return tuple(user_id for user_id, _ in ranked[:k])


def ranked_items(dataset: Dataset) -> tuple:
    """All items, most popular first (ties by item_id, then input order)."""
    ranked = sorted(
        enumerate(dataset.items),
        key=lambda pair: (-pair[1].popularity, pair[1].item_id, pair[0]),
    )
    return tuple(item for _, item in ranked)
