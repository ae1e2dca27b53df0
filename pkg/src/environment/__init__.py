"""
Environment construction: encoders, synthetic users, rewards and the bandit environment
"""

from .bandit_env import (
    SAMPLER_KINDS,
    BanditEnvironment,
    Interaction,
    Provenance,
    SamplerConfig,
    SamplerCursor,
    build,
)
from .encoder import (
    ActionSet,
    FeatureVocabulary,
    StateSet,
    build_vocabulary,
    encode_actions,
    encode_feedback,
    encode_states,
    normalize_feedback,
)
from .env_file import load, save
from .reward import (
    AffineClip,
    HistogramSampling,
    ImdbSqrtRound,
    MovieLensClipRound,
    RewardHistogram,
    ScaledCosine,
    alpha_sweep,
    apply_transform,
    calibrate_alpha,
    cosine,
    feedback_histogram,
    parse_transform,
    reward,
    reward_histogram,
    reward_matrix,
    select_alpha,
    tv_distance,
)
from .synth_users import (
    SparseFeedback,
    SynthConfig,
    generate_states,
    imdb_histogram_support,
    simulate_feedback,
    uniform_support,
)

__all__ = [
    'SAMPLER_KINDS', 'BanditEnvironment', 'Interaction', 'Provenance', 'SamplerConfig',
    'SamplerCursor', 'build',
    'ActionSet', 'FeatureVocabulary', 'StateSet', 'build_vocabulary', 'encode_actions',
    'encode_feedback', 'encode_states', 'normalize_feedback',
    'load', 'save',
    'AffineClip', 'HistogramSampling', 'ImdbSqrtRound', 'MovieLensClipRound', 'RewardHistogram',
    'ScaledCosine', 'alpha_sweep', 'apply_transform', 'calibrate_alpha', 'cosine',
    'feedback_histogram', 'parse_transform', 'reward', 'reward_histogram', 'reward_matrix', 'select_alpha',
    'tv_distance',
    'SparseFeedback', 'SynthConfig', 'generate_states', 'imdb_histogram_support',
    'simulate_feedback', 'uniform_support',
]
