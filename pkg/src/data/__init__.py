# Dataset ingestion: types, parsers and truncation

from .dataset import Dataset, FeedbackScale, RawInteraction, RawItem
from .parsers import (
    GenericSchema,
    load_schema,
    parse_classification,
    parse_generic,
    parse_imdb,
    parse_movielens,
    write_generic,
)
from .truncation import top_k_items, top_k_users

__all__ = [
    'Dataset',
    'FeedbackScale',
    'RawInteraction',
    'RawItem',
    'GenericSchema',
    'load_schema',
    'parse_classification',
    'parse_generic',
    'parse_imdb',
    'parse_movielens',
    'write_generic',
    'top_k_items',
    'top_k_users',
]
