"""
Dataset Parsers
Loads MovieLens-style CSV, IMDb-style TSV, generic column-mapped files and
labeled classification data into the common Dataset representation
"""

import csv
import io
import logging
import math
import os
from dataclasses import dataclass, fields
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from dotenv import dotenv_values

from ..errors import (
    DatasetRowError,
    EmptyDatasetError,
    SchemaError,
)
from ..utils.feature_normalizer import feature_normalizer
from .dataset import Dataset, FeedbackScale, RawInteraction, RawItem, SOURCE_TAGS

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

MOVIELENS_RATINGS_COLUMNS = ('userId', 'movieId', 'rating', 'timestamp')
MOVIELENS_MOVIES_COLUMNS = ('movieId', 'title', 'genres')
MOVIELENS_NO_GENRES = '(no genres listed)'

IMDB_BASICS_COLUMNS = ('tconst', 'titleType', 'primaryTitle', 'genres')
IMDB_RATINGS_COLUMNS = ('tconst', 'averageRating', 'numVotes')
IMDB_MISSING = '\\N'

CLASSIFICATION_COLUMNS = ('example_id', 'label')

FIELD_SEPARATORS = {'comma': ',', 'tab': '\t', 'pipe': '|', 'semicolon': ';'}

# Keys a generic schema file must define
REQUIRED_SCHEMA_KEYS = (
    'user_col', 'item_col', 'feedback_col', 'feature_col', 'feature_delim',
    'scale_min', 'scale_max', 'scale_step',
)


@dataclass(frozen=True)
class GenericSchema:
    """Column mapping for the generic parser"""
    user_col: str
    item_col: str
    feedback_col: str
    feature_col: str
    feature_delim: str
    scale: FeedbackScale
    items_item_col: Optional[str] = None
    title_col: Optional[str] = None
    timestamp_col: Optional[str] = None
    popularity_col: Optional[str] = None
    mean_feedback_col: Optional[str] = None
    empty_feature_token: Optional[str] = None
    missing_token: Optional[str] = None
    field_sep: str = ','
    source_tag: str = 'generic'

    @property
    def item_key(self) -> str:
        return self.items_item_col or self.item_col


MOVIELENS_SCHEMA = GenericSchema(
    user_col='userId',
    item_col='movieId',
    feedback_col='rating',
    feature_col='genres',
    feature_delim='|',
    scale=FeedbackScale(0.5, 5.0, 0.5),
    title_col='title',
    timestamp_col='timestamp',
    empty_feature_token=MOVIELENS_NO_GENRES,
    source_tag='movielens',
)


def load_schema(path: PathLike) -> GenericSchema:
    """
    Read a flat key=value schema file

    Args:
        path: Schema file (dotenv syntax)

    Returns:
        GenericSchema

    Raises:
        SchemaError: If a required key is missing or a value is malformed
    """
    if not os.path.exists(path):
        raise SchemaError(f"Schema file not found: {path}")

    raw = {key.strip().lower(): value for key, value in dotenv_values(path).items()}
    return schema_from_mapping(raw, origin=str(path))


def schema_from_mapping(raw: Dict[str, Optional[str]], origin: str = "<mapping>") -> GenericSchema:
    """Build a GenericSchema from string key/values (schema file contents)."""
    missing = [key for key in REQUIRED_SCHEMA_KEYS if key not in raw]
    if missing:
        raise SchemaError(f"{origin}: schema missing keys {missing}")

    def optional(key: str) -> Optional[str]:
        value = raw.get(key)
        return value if value not in (None, '') else None

    try:
        step = optional('scale_step')
        scale = FeedbackScale(
            float(raw['scale_min']),
            float(raw['scale_max']),
            float(step) if step is not None else None,
        )
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{origin}: malformed scale values: {e}") from e

    field_sep = optional('field_sep') or 'comma'
    field_sep = FIELD_SEPARATORS.get(field_sep.lower(), field_sep)
    if len(field_sep) != 1:
        raise SchemaError(f"{origin}: field_sep must be one character or one of {sorted(FIELD_SEPARATORS)}")

    source_tag = optional('source_tag') or 'generic'
    if source_tag not in SOURCE_TAGS:
        raise SchemaError(f"{origin}: unknown source_tag '{source_tag}'")

    for key in ('user_col', 'item_col', 'feedback_col', 'feature_col', 'feature_delim'):
        if not raw.get(key):
            raise SchemaError(f"{origin}: '{key}' must not be empty")

    return GenericSchema(
        user_col=raw['user_col'],
        item_col=raw['item_col'],
        feedback_col=raw['feedback_col'],
        feature_col=raw['feature_col'],
        feature_delim=raw['feature_delim'],
        scale=scale,
        items_item_col=optional('items_item_col'),
        title_col=optional('title_col'),
        timestamp_col=optional('timestamp_col'),
        popularity_col=optional('popularity_col'),
        mean_feedback_col=optional('mean_feedback_col'),
        empty_feature_token=optional('empty_feature_token'),
        missing_token=optional('missing_token'),
        field_sep=field_sep,
        source_tag=source_tag,
    )


# ---------------------------------------------------------------------------
# Low-level readers
# ---------------------------------------------------------------------------

def _read_table(path: PathLike, sep: str, quoting: int = csv.QUOTE_MINIMAL) -> pd.DataFrame:
    """Read a delimited UTF-8 file with every cell kept as a string."""
    with open(path, 'rb') as f:
        raw = f.read()

    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        line = raw[:e.start].count(b'\n') + 1
        raise DatasetRowError(path, line, f"invalid UTF-8: {e.reason}") from e

    if text.startswith('﻿'):
        text = text[1:]

    try:
        return pd.read_csv(
            io.StringIO(text),
            sep=sep,
            dtype=str,
            keep_default_na=False,
            na_filter=False,
            quoting=quoting,
        )
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"{path}: file is empty (no header row)") from e
    except pd.errors.ParserError as e:
        raise SchemaError(f"{path}: cannot split rows with separator {sep!r}: {e}") from e


def _require_columns(df: pd.DataFrame, columns: Sequence[str], path: PathLike) -> None:
    for column in columns:
        if column not in df.columns:
            raise SchemaError(f"{path}: missing required column '{column}' (found {list(df.columns)})")


def _line_number(row_position: int) -> int:
    # 1-based, header on line 1
    return row_position + 2


def _to_float(value: str, path: PathLike, position: int, column: str) -> float:
    try:
        parsed = float(value)
    except (TypeError, ValueError):
        raise DatasetRowError(path, _line_number(position), f"cannot parse {column} {value!r}")
    if not math.isfinite(parsed):
        raise DatasetRowError(path, _line_number(position), f"non-finite {column} {value!r}")
    return parsed


def _to_int(value: str, path: PathLike, position: int, column: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        try:
            parsed = float(value)
        except (TypeError, ValueError):
            parsed = math.nan
        if math.isfinite(parsed) and parsed == int(parsed):
            return int(parsed)
        raise DatasetRowError(path, _line_number(position), f"cannot parse {column} {value!r}")


def _split_features(value: str, delim: str, empty_tokens: Tuple[str, ...]) -> Tuple[str, ...]:
    if value in empty_tokens:
        return ()
    return feature_normalizer.normalize_features(value.split(delim))


def _latest_wins(records: List[dict]) -> List[dict]:
    """
    Keep one record per (user_id, item_id): the latest timestamp, or the last
    occurrence when timestamps tie or are absent. Survivors keep input order.
    """
    if not records:
        return []
    df = pd.DataFrame(records)
    df['_order'] = range(len(df))
    df['_ts'] = pd.to_numeric(df['timestamp'], errors='coerce').fillna(-math.inf)
    survivors = (
        df.sort_values(['_ts', '_order'], kind='mergesort')
        .drop_duplicates(['user_id', 'item_id'], keep='last')
        .sort_values('_order', kind='mergesort')
    )
    dropped = len(df) - len(survivors)
    if dropped:
        logger.info(f"Dropped {dropped} superseded duplicate (user, item) ratings")
    return [records[i] for i in survivors['_order']]


# ---------------------------------------------------------------------------
# Generic core (MovieLens goes through here too)
# ---------------------------------------------------------------------------

def _parse_with_schema(interactions_path: Optional[PathLike],
                       items_path: PathLike,
                       schema: GenericSchema) -> Dataset:
    empty_tokens = tuple(t for t in ('', schema.empty_feature_token, schema.missing_token) if t is not None)
    missing_tokens = tuple(t for t in ('', schema.missing_token) if t is not None)

    items_df = _read_table(items_path, schema.field_sep)
    item_columns = [schema.item_key, schema.feature_col]
    item_columns += [c for c in (schema.title_col, schema.popularity_col, schema.mean_feedback_col) if c]
    _require_columns(items_df, item_columns, items_path)

    item_rows = []
    seen_ids = set()
    for position, row in enumerate(items_df.itertuples(index=False, name=None)):
        record = dict(zip(items_df.columns, row))
        item_id = record[schema.item_key]
        if item_id in seen_ids:
            raise DatasetRowError(items_path, _line_number(position), f"duplicate item id '{item_id}'")
        seen_ids.add(item_id)

        title = record[schema.title_col] if schema.title_col else ''
        if title in missing_tokens:
            title = ''

        popularity = None
        if schema.popularity_col:
            popularity = _to_float(record[schema.popularity_col], items_path, position, schema.popularity_col)
            if popularity < 0:
                raise DatasetRowError(items_path, _line_number(position), f"negative popularity {popularity}")

        mean_feedback = None
        if schema.mean_feedback_col and record[schema.mean_feedback_col] not in missing_tokens:
            mean_feedback = _to_float(
                record[schema.mean_feedback_col], items_path, position, schema.mean_feedback_col
            )

        item_rows.append({
            'item_id': item_id,
            'title': title,
            'features': _split_features(record[schema.feature_col], schema.feature_delim, empty_tokens),
            'popularity': popularity,
            'mean_feedback': mean_feedback,
        })

    interactions = []
    if interactions_path is not None:
        ratings_df = _read_table(interactions_path, schema.field_sep)
        rating_columns = [schema.user_col, schema.item_col, schema.feedback_col]
        if schema.timestamp_col:
            rating_columns.append(schema.timestamp_col)
        _require_columns(ratings_df, rating_columns, interactions_path)

        users = ratings_df[schema.user_col].tolist()
        items = ratings_df[schema.item_col].tolist()
        feedbacks = ratings_df[schema.feedback_col].tolist()
        timestamps = ratings_df[schema.timestamp_col].tolist() if schema.timestamp_col else [''] * len(users)

        for position, (user_id, item_id, raw_feedback, raw_ts) in enumerate(zip(users, items, feedbacks, timestamps)):
            feedback = _to_float(raw_feedback, interactions_path, position, schema.feedback_col)
            if not schema.scale.contains(feedback):
                raise DatasetRowError(
                    interactions_path, _line_number(position),
                    f"{schema.feedback_col} {feedback} outside [{schema.scale.min}, {schema.scale.max}]",
                )
            timestamp = None
            if raw_ts not in missing_tokens:
                timestamp = _to_int(raw_ts, interactions_path, position, schema.timestamp_col)
            interactions.append({
                'user_id': user_id,
                'item_id': item_id,
                'feedback': feedback,
                'timestamp': timestamp,
            })

        interactions = _latest_wins(interactions)

        unknown = [r for r in interactions if r['item_id'] not in seen_ids]
        if unknown:
            logger.warning(f"Dropping {len(unknown)} interactions that reference items missing from {items_path}")
            interactions = [r for r in interactions if r['item_id'] in seen_ids]

    counts: Dict[str, int] = {}
    for record in interactions:
        counts[record['item_id']] = counts.get(record['item_id'], 0) + 1

    items = tuple(
        RawItem(
            item_id=row['item_id'],
            title=row['title'],
            features=row['features'],
            popularity=row['popularity'] if row['popularity'] is not None else float(counts.get(row['item_id'], 0)),
            mean_feedback=row['mean_feedback'],
        )
        for row in item_rows
    )
    dataset = Dataset(
        items=items,
        interactions=tuple(RawInteraction(**record) for record in interactions),
        scale=schema.scale,
        source_tag=schema.source_tag,
    )
    logger.info(
        f"Parsed {len(dataset.items)} items and {len(dataset.interactions)} interactions "
        f"({schema.source_tag}) from {items_path}"
    )
    return dataset


def parse_generic(interactions_path: Optional[PathLike],
                  items_path: PathLike,
                  schema: Union[GenericSchema, PathLike]) -> Dataset:
    """
    Parse column-mapped interaction and item files

    Args:
        interactions_path: Interactions file, or None for an items-only dataset
        items_path: Items file
        schema: GenericSchema or path to a key=value schema file

    Returns:
        Dataset

    Raises:
        SchemaError: If the schema references columns absent from the files
        DatasetRowError: If a row cannot be parsed
    """
    if not isinstance(schema, GenericSchema):
        schema = load_schema(schema)
    return _parse_with_schema(interactions_path, items_path, schema)


def parse_movielens(ratings_path: PathLike, movies_path: PathLike) -> Dataset:
    """
    Parse MovieLens ratings.csv / movies.csv

    Args:
        ratings_path: CSV with header userId,movieId,rating,timestamp
        movies_path: CSV with header movieId,title,genres (genres pipe-separated)

    Returns:
        Dataset on the 0.5-5.0 half-star scale; popularity = rating count
    """
    return _parse_with_schema(ratings_path, movies_path, MOVIELENS_SCHEMA)


def parse_imdb(basics_path: PathLike,
               ratings_path: PathLike,
               title_types: Optional[Sequence[str]] = ('movie',)) -> Dataset:
    """
    Parse IMDb title.basics / title.ratings TSV files

    Args:
        basics_path: TSV with tconst, titleType, primaryTitle, genres
        ratings_path: TSV with tconst, averageRating, numVotes
        title_types: titleType values to keep (None keeps everything)

    Returns:
        Items-only Dataset on the 1-10 scale; popularity = numVotes

    Raises:
        EmptyDatasetError: If no title survives the join and filter
    """
    basics = _read_table(basics_path, '\t', quoting=csv.QUOTE_NONE)
    _require_columns(basics, IMDB_BASICS_COLUMNS, basics_path)
    ratings = _read_table(ratings_path, '\t', quoting=csv.QUOTE_NONE)
    _require_columns(ratings, IMDB_RATINGS_COLUMNS, ratings_path)

    votes = {}
    averages = {}
    for position, (tconst, average, num_votes) in enumerate(
            zip(ratings['tconst'], ratings['averageRating'], ratings['numVotes'])):
        parsed_votes = _to_int(num_votes, ratings_path, position, 'numVotes')
        if parsed_votes < 0:
            raise DatasetRowError(ratings_path, _line_number(position), f"negative numVotes {parsed_votes}")
        votes[tconst] = parsed_votes
        averages[tconst] = (
            None if average in ('', IMDB_MISSING)
            else _to_float(average, ratings_path, position, 'averageRating')
        )

    keep_types = set(title_types) if title_types is not None else None
    items = []
    skipped_type = 0
    for tconst, title_type, title, genres in zip(
            basics['tconst'], basics['titleType'], basics['primaryTitle'], basics['genres']):
        if tconst not in votes:
            continue
        if keep_types is not None and title_type not in keep_types:
            skipped_type += 1
            continue
        items.append(RawItem(
            item_id=tconst,
            title='' if title == IMDB_MISSING else title,
            features=_split_features(genres, ',', ('', IMDB_MISSING)),
            popularity=float(votes[tconst]),
            mean_feedback=averages[tconst],
        ))

    if not items:
        raise EmptyDatasetError(
            f"No titles left after joining {basics_path} with {ratings_path} (title types {title_types})"
        )
    if skipped_type:
        logger.info(f"Skipped {skipped_type} joined titles outside title types {title_types}")

    dataset = Dataset(items=tuple(items), interactions=(), scale=FeedbackScale(1.0, 10.0, 1.0), source_tag='imdb')
    logger.info(f"Parsed {len(items)} IMDb titles from {basics_path}")
    return dataset


def parse_classification(examples_path: PathLike) -> Dataset:
    """
    Parse labeled examples into a dataset where each label is an item

    Args:
        examples_path: CSV with columns example_id, label and any payload columns

    Returns:
        Dataset with one item per label and feedback 1 for each (example, label) row

    Raises:
        SchemaError: If the label set is empty
    """
    df = _read_table(examples_path, ',')
    _require_columns(df, CLASSIFICATION_COLUMNS, examples_path)

    counts: Dict[str, int] = {}
    records = []
    for position, (example_id, label) in enumerate(zip(df['example_id'], df['label'])):
        label = label.strip()
        if not label:
            raise DatasetRowError(examples_path, _line_number(position), "blank label")
        counts[label] = counts.get(label, 0) + 1
        records.append({'user_id': example_id, 'item_id': label, 'feedback': 1.0, 'timestamp': None})

    if not counts:
        raise SchemaError(f"{examples_path}: no labels found")

    records = _latest_wins(records)
    # popularity follows the retained rows
    counts = {}
    for record in records:
        counts[record['item_id']] = counts.get(record['item_id'], 0) + 1

    items = tuple(
        RawItem(item_id=label, title=label, features=(label,), popularity=float(count))
        for label, count in counts.items()
    )
    return Dataset(
        items=items,
        interactions=tuple(RawInteraction(**record) for record in records),
        scale=FeedbackScale(0.0, 1.0, 1.0),
        source_tag='classification',
    )


def write_generic(dataset: Dataset, directory: PathLike) -> Tuple[str, str, str]:
    """
    Write a dataset in the generic format so parse_generic reproduces it

    Args:
        dataset: Dataset to write
        directory: Output directory (created if needed)

    Returns:
        (interactions_path, items_path, schema_path)
    """
    os.makedirs(directory, exist_ok=True)
    interactions_path = os.path.join(directory, 'interactions.csv')
    items_path = os.path.join(directory, 'items.csv')
    schema_path = os.path.join(directory, 'schema.env')

    # repr() keeps every float exact through the text round trip
    items_df = pd.DataFrame(
        {
            'item_id': [item.item_id for item in dataset.items],
            'title': [item.title for item in dataset.items],
            'features': ['|'.join(item.features) for item in dataset.items],
            'popularity': [repr(float(item.popularity)) for item in dataset.items],
            'mean_feedback': [
                '' if item.mean_feedback is None else repr(float(item.mean_feedback))
                for item in dataset.items
            ],
        },
        columns=['item_id', 'title', 'features', 'popularity', 'mean_feedback'],
    )
    interactions_df = pd.DataFrame(
        {
            'user_id': [i.user_id for i in dataset.interactions],
            'item_id': [i.item_id for i in dataset.interactions],
            'feedback': [repr(float(i.feedback)) for i in dataset.interactions],
            'timestamp': ['' if i.timestamp is None else str(i.timestamp) for i in dataset.interactions],
        },
        columns=['user_id', 'item_id', 'feedback', 'timestamp'],
    )
    items_df.to_csv(items_path, index=False, encoding='utf-8')
    interactions_df.to_csv(interactions_path, index=False, encoding='utf-8')

    scale = dataset.scale
    lines = [
        'user_col=user_id',
        'item_col=item_id',
        'feedback_col=feedback',
        'feature_col=features',
        'feature_delim=|',
        f'scale_min={scale.min!r}',
        f'scale_max={scale.max!r}',
        f"scale_step={'' if scale.discrete_step is None else repr(scale.discrete_step)}",
        'title_col=title',
        'timestamp_col=timestamp',
        'popularity_col=popularity',
        'mean_feedback_col=mean_feedback',
        'field_sep=comma',
        f'source_tag={dataset.source_tag}',
    ]
    with open(schema_path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')

    logger.info(f"Wrote generic dataset files to {directory}")
    return interactions_path, items_path, schema_path


def schema_keys() -> Tuple[str, ...]:
    """All keys understood in a schema file."""
    return REQUIRED_SCHEMA_KEYS + tuple(
        f.name for f in fields(GenericSchema)
        if f.name not in REQUIRED_SCHEMA_KEYS and f.name != 'scale'
    )
