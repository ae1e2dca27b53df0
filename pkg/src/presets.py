"""
Environment Presets
One-call pipelines from raw dataset files to a sealed bandit environment:
MovieLens (rating-based users), IMDb (synthetic users), generic-schema and
labeled classification data
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple
import logging

from .data.dataset import Dataset
from .data.parsers import parse_classification, parse_generic, parse_imdb, parse_movielens
from .data.truncation import ranked_items, ranked_users, top_k_items
from .environment.bandit_env import BanditEnvironment, Provenance, SamplerConfig, build
from .environment.encoder import ActionSet, Range, StateSet, build_vocabulary, encode_actions, encode_states
from .environment.reward import AffineClip, ImdbSqrtRound, MovieLensClipRound, RewardTransform
from .environment.synth_users import SynthConfig, generate_states, imdb_histogram_support, uniform_support
from .errors import ConfigError
from .utils.feature_normalizer import FeatureNormalizer

logger = logging.getLogger(__name__)

MOVIELENS_GENRES = (
    'Action', 'Adventure', 'Animation', 'Children', 'Comedy', 'Crime',
    'Documentary', 'Drama', 'Fantasy', 'Film-Noir', 'Horror', 'Musical',
    'Mystery', 'Romance', 'Sci-Fi', 'Thriller', 'War', 'Western',
)

IMDB_GENRES = (
    'Action', 'Adventure', 'Animation', 'Biography', 'Comedy', 'Crime',
    'Documentary', 'Drama', 'Family', 'Fantasy', 'Film-Noir', 'Game-Show',
    'History', 'Horror', 'Music', 'Musical', 'Mystery', 'News', 'Reality-TV',
    'Romance', 'Sci-Fi', 'Short', 'Sport', 'Talk-Show', 'Thriller', 'War', 'Western',
)

RATING_SUPPORTS = ('uniform', 'imdb_histogram')


@dataclass(frozen=True)
class PresetSpec:
    """Parameters of one dataset-to-environment pipeline"""
    name: str
    vocabulary: Tuple[str, ...]
    transform: RewardTransform
    norm_range: Range
    top_items: int = 100
    top_users: Optional[int] = None
    catalog_items: Optional[int] = None
    synth_users: Optional[int] = None
    num_nonzero: int = 50
    rating_support: str = 'uniform'
    title_types: Optional[Tuple[str, ...]] = ('movie',)
    aliases: Dict[str, str] = field(default_factory=dict)
    ignored: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.rating_support not in RATING_SUPPORTS:
            raise ConfigError(f"Unknown rating support '{self.rating_support}', expected one of {RATING_SUPPORTS}")
        for name in ('top_items', 'top_users', 'catalog_items', 'synth_users', 'num_nonzero'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"Preset {self.name}: {name} must be positive, got {value}")

    def normalizer(self) -> FeatureNormalizer:
        return FeatureNormalizer(aliases=self.aliases, ignored=self.ignored)


MOVIELENS_PRESET = PresetSpec(
    name='movielens',
    vocabulary=MOVIELENS_GENRES,
    transform=MovieLensClipRound(),
    norm_range=(0.0, 1.0),
    top_items=100,
    top_users=10000,
    aliases={"Children's": 'Children'},
    ignored=('IMAX',),
)

IMDB_PRESET = PresetSpec(
    name='imdb',
    vocabulary=IMDB_GENRES,
    transform=ImdbSqrtRound(),
    norm_range=(-1.0, 1.0),
    top_items=100,
    catalog_items=10000,
    synth_users=10000,
    num_nonzero=50,
    # 'Adult' is an IMDb genre but not one of the 27 coordinates
    ignored=('Adult',),
)

PRESETS = {preset.name: preset for preset in (MOVIELENS_PRESET, IMDB_PRESET)}


@dataclass
class BuildReport:
    """What a pipeline dropped on the way to the environment"""
    dropped_items: Tuple[str, ...] = ()
    dropped_users: Tuple[str, ...] = ()
    excluded_users: int = 0

    def warnings(self) -> List[str]:
        messages = []
        if self.dropped_items:
            messages.append(f"dropped {len(self.dropped_items)} items without vocabulary features (zero action rows)")
        if self.dropped_users:
            messages.append(f"dropped {len(self.dropped_users)} users with zero-norm states")
        if self.excluded_users:
            messages.append(f"excluded {self.excluded_users} users with no interactions on retained items")
        return messages


def normalize_dataset_features(dataset: Dataset, normalizer: FeatureNormalizer) -> Dataset:
    """Apply alias and ignore rules to every item's features"""
    items = tuple(
        replace(item, features=normalizer.normalize_features(item.features))
        for item in dataset.items
    )
    return dataset.replace(items=items)


def _drop_zero_actions(dataset: Dataset, actions: ActionSet, report: BuildReport) -> Tuple[Dataset, ActionSet]:
    actions, dropped = actions.without_zero_rows()
    if dropped:
        logger.warning(f"Dropped {len(dropped)} featureless items from the action set: {list(dropped[:5])}")
        dropped_ids = set(dropped)
        dataset = dataset.replace(
            items=tuple(item for item in dataset.items if item.item_id not in dropped_ids),
            interactions=tuple(i for i in dataset.interactions if i.item_id not in dropped_ids),
        )
        report.dropped_items = dropped
    return dataset, actions


def _drop_zero_states(states: StateSet, report: BuildReport) -> StateSet:
    states, dropped = states.without_zero_rows()
    if dropped:
        logger.warning(f"Dropped {len(dropped)} users with zero-norm states: {list(dropped[:5])}")
        report.dropped_users = dropped
    return states


def build_interaction_env(dataset: Dataset,
                          transform: RewardTransform,
                          norm_range: Range,
                          vocabulary: Optional[Sequence[str]] = None,
                          top_items: Optional[int] = None,
                          top_users: Optional[int] = None,
                          sampler: Optional[SamplerConfig] = None,
                          provenance: Optional[Provenance] = None) -> Tuple[BanditEnvironment, BuildReport]:
    """
    Environment whose states are encoded from recorded interactions

    Users are ranked by activity on the full dataset first. Items without any
    vocabulary feature are dropped, the catalog is cut to the top_items most
    popular remaining items and states are summed over that catalog only.

    Args:
        dataset: Dataset with interactions
        transform: Reward transform
        norm_range: Feedback normalization interval
        vocabulary: Explicit ordered feature list (lexicographic from data if None)
        top_items: Action count (None keeps every item)
        top_users: State count (None keeps every user)
        sampler: State sampler
        provenance: Build metadata

    Returns:
        (environment, build report)
    """
    report = BuildReport()
    vocab = build_vocabulary(dataset, vocabulary)

    active = dataset.user_ids()
    users = ranked_users(dataset, top_users if top_users is not None else len(active))
    user_set = set(users)
    dataset = dataset.replace(interactions=tuple(i for i in dataset.interactions if i.user_id in user_set))

    # Featureless items cannot be actions; drop them before the popularity cut
    dataset, _ = _drop_zero_actions(dataset, encode_actions(dataset.items, vocab), report)
    if top_items is not None:
        dataset = top_k_items(dataset, top_items)
    actions = encode_actions(ranked_items(dataset), vocab)

    interacting = set(dataset.user_ids())
    report.excluded_users = sum(1 for user_id in users if user_id not in interacting)
    states = encode_states(dataset, actions, dataset.scale, norm_range, users=users)
    states = _drop_zero_states(states, report)

    env = build(states, actions, transform, sampler=sampler, provenance=provenance)
    return env, report


def build_movielens_env(ratings_path: str,
                        movies_path: str,
                        preset: PresetSpec = MOVIELENS_PRESET,
                        sampler: Optional[SamplerConfig] = None,
                        seed: int = 0) -> Tuple[BanditEnvironment, BuildReport]:
    """
    MovieLens pipeline: 18 genres, top users by rating count, top items by
    rating count, states normalized to the preset range

    Args:
        ratings_path: ratings.csv
        movies_path: movies.csv
        preset: Preset parameters (override fields with dataclasses.replace)
        sampler: State sampler (uniform_iid with the given seed by default)
        seed: Master seed recorded in provenance

    Returns:
        (environment, build report)
    """
    dataset = parse_movielens(ratings_path, movies_path)
    dataset = normalize_dataset_features(dataset, preset.normalizer())
    provenance = Provenance(source_tag='movielens', preset=preset.name, seed=seed)
    return build_interaction_env(
        dataset,
        transform=preset.transform,
        norm_range=preset.norm_range,
        vocabulary=preset.vocabulary,
        top_items=preset.top_items,
        top_users=preset.top_users,
        sampler=sampler or SamplerConfig(seed=seed),
        provenance=provenance,
    )


def build_imdb_env(basics_path: str,
                   ratings_path: str,
                   preset: PresetSpec = IMDB_PRESET,
                   sampler: Optional[SamplerConfig] = None,
                   seed: int = 0) -> Tuple[BanditEnvironment, BuildReport]:
    """
    IMDb pipeline: most-voted catalog, synthetic users rating num_nonzero
    catalog titles each, actions = the top_items most-voted titles

    Args:
        basics_path: title.basics.tsv
        ratings_path: title.ratings.tsv
        preset: Preset parameters
        sampler: State sampler
        seed: Seed of the synthetic users (also recorded in provenance)

    Returns:
        (environment, build report)
    """
    if preset.synth_users is None:
        raise ConfigError(f"Preset {preset.name} does not define synthetic users")

    report = BuildReport()
    dataset = parse_imdb(basics_path, ratings_path, title_types=preset.title_types)
    dataset = normalize_dataset_features(dataset, preset.normalizer())
    vocab = build_vocabulary(dataset, preset.vocabulary)

    _, full_actions = _drop_zero_actions(dataset, encode_actions(ranked_items(dataset), vocab), report)
    if preset.catalog_items is not None:
        full_actions = full_actions.subset(preset.catalog_items)

    scale = dataset.scale
    if preset.rating_support == 'imdb_histogram':
        support = imdb_histogram_support(dataset, scale)
    else:
        support = uniform_support(scale)
    synth = SynthConfig(
        num_users=preset.synth_users,
        num_nonzero=preset.num_nonzero,
        rating_support=support,
        seed=seed,
    )
    states = generate_states(full_actions, scale, preset.norm_range, synth)
    states = _drop_zero_states(states, report)

    actions = full_actions.subset(preset.top_items)
    logger.info(f"IMDb catalog: {len(full_actions)} titles, {len(actions)} actions, {len(states)} synthetic users")

    provenance = Provenance(
        source_tag='imdb',
        preset=preset.name,
        seed=seed,
        synth=synth.to_dict(),
        notes={'catalog_size': len(full_actions), 'rating_support': preset.rating_support},
    )
    env = build(states, actions, preset.transform, sampler=sampler or SamplerConfig(seed=seed), provenance=provenance)
    return env, report


def build_generic_env(interactions_path: Optional[str],
                      items_path: str,
                      schema_path: str,
                      transform: RewardTransform,
                      norm_range: Range = (-1.0, 1.0),
                      top_items: Optional[int] = None,
                      top_users: Optional[int] = None,
                      sampler: Optional[SamplerConfig] = None,
                      seed: int = 0) -> Tuple[BanditEnvironment, BuildReport]:
    """Environment from files described by a generic schema (lexicographic vocabulary)"""
    dataset = parse_generic(interactions_path, items_path, schema_path)
    provenance = Provenance(source_tag=dataset.source_tag, seed=seed)
    return build_interaction_env(
        dataset,
        transform=transform,
        norm_range=norm_range,
        top_items=top_items,
        top_users=top_users,
        sampler=sampler or SamplerConfig(seed=seed),
        provenance=provenance,
    )


CLASSIFICATION_TRANSFORM = AffineClip(scale=1.0, offset=0.0, round_step=1.0, clip_low=0.0, clip_high=1.0)


def build_classification_env(examples_path: str,
                             sampler: Optional[SamplerConfig] = None,
                             seed: int = 0) -> Tuple[BanditEnvironment, BuildReport]:
    """
    Classification as a bandit: each label is an action and each example's
    state is the one-hot of its correct label, so the reward is 1 for the
    correct label and 0 otherwise

    Args:
        examples_path: CSV with example_id, label columns
        sampler: State sampler
        seed: Master seed recorded in provenance

    Returns:
        (environment, build report)
    """
    dataset = parse_classification(examples_path)
    labels = [item.item_id for item in dataset.items]
    provenance = Provenance(source_tag='classification', seed=seed, notes={'labels': labels})
    return build_interaction_env(
        dataset,
        transform=CLASSIFICATION_TRANSFORM,
        norm_range=(0.0, 1.0),
        vocabulary=labels,
        sampler=sampler or SamplerConfig(seed=seed),
        provenance=provenance,
    )
