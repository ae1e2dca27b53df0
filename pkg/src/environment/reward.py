"""
Reward Calculator
Cosine similarity between state and action parameterizations, the transforms
that map it onto a dataset's rating scale, and distribution diagnostics used
to compare environment rewards against dataset feedback
"""

from dataclasses import dataclass, asdict
from typing import ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
import pandas as pd

from ..data.dataset import Dataset
from ..errors import ConfigError, DegenerateVectorError, DimensionMismatchError, PreconditionError
from ..utils.rng import make_rng
from .encoder import ActionSet, StateSet

logger = logging.getLogger(__name__)

# Ceiling arguments are rounded to this many decimals first so binary noise
# (10 * 0.7000000000000001 = 7.000000000000001) never moves a value into the next bin
CEIL_DECIMALS = 9

STATE_CHUNK = 2048


def _snapped_ceil(x: np.ndarray) -> np.ndarray:
    return np.ceil(np.round(x, CEIL_DECIMALS))


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledCosine:
    """r = alpha * c"""
    alpha: float = 1.0
    kind: ClassVar[str] = 'scaled_cosine'
    is_discrete: ClassVar[bool] = False

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError(f"ScaledCosine alpha must be positive, got {self.alpha}")

    def apply(self, c):
        return self.alpha * np.asarray(c, dtype=np.float64)

    def codomain(self) -> Optional[Tuple[float, ...]]:
        return None


@dataclass(frozen=True)
class MovieLensClipRound:
    """r = clip(ceil(2 + 10 c) / 2, 0.5, 5.0): the half-star scale"""
    kind: ClassVar[str] = 'movielens_clip_round'
    is_discrete: ClassVar[bool] = True

    def apply(self, c):
        c = np.asarray(c, dtype=np.float64)
        return np.clip(_snapped_ceil(2.0 + 10.0 * c) / 2.0, 0.5, 5.0)

    def codomain(self) -> Optional[Tuple[float, ...]]:
        return tuple(k / 2.0 for k in range(1, 11))


@dataclass(frozen=True)
class ImdbSqrtRound:
    """r = max(1, ceil(10 sqrt(1/2 + c/2))): the 10-star scale"""
    kind: ClassVar[str] = 'imdb_sqrt_round'
    is_discrete: ClassVar[bool] = True

    def apply(self, c):
        c = np.asarray(c, dtype=np.float64)
        raw = _snapped_ceil(10.0 * np.sqrt(np.maximum(0.5 + c / 2.0, 0.0)))
        # c = -1 gives 0, which is not an IMDb rating
        return np.maximum(raw, 1.0)

    def codomain(self) -> Optional[Tuple[float, ...]]:
        return tuple(float(k) for k in range(1, 11))


@dataclass(frozen=True)
class AffineClip:
    """r = clip(ceil_to_step(scale * c + offset), clip_low, clip_high)"""
    scale: float = 1.0
    offset: float = 0.0
    round_step: Optional[float] = None
    clip_low: float = -math.inf
    clip_high: float = math.inf
    kind: ClassVar[str] = 'affine_clip'

    def __post_init__(self):
        if self.round_step is not None and not self.round_step > 0:
            raise ConfigError(f"AffineClip round_step must be positive, got {self.round_step}")
        if self.clip_low > self.clip_high:
            raise ConfigError(f"AffineClip needs clip_low <= clip_high, got {self.clip_low} > {self.clip_high}")

    @property
    def is_discrete(self) -> bool:
        return self.round_step is not None

    def apply(self, c):
        x = self.scale * np.asarray(c, dtype=np.float64) + self.offset
        if self.round_step is not None:
            x = self.round_step * _snapped_ceil(x / self.round_step)
        return np.clip(x, self.clip_low, self.clip_high)

    def codomain(self) -> Optional[Tuple[float, ...]]:
        return None


RewardTransform = Union[ScaledCosine, MovieLensClipRound, ImdbSqrtRound, AffineClip]

TRANSFORM_TYPES = {t.kind: t for t in (ScaledCosine, MovieLensClipRound, ImdbSqrtRound, AffineClip)}


def transform_to_dict(t: RewardTransform) -> Dict:
    """Tagged dict form used by the environment file"""
    payload = {'kind': t.kind}
    for key, value in asdict(t).items():
        if isinstance(value, float) and not math.isfinite(value):
            value = 'inf' if value > 0 else '-inf'
        payload[key] = value
    return payload


def transform_from_dict(payload: Dict) -> RewardTransform:
    payload = dict(payload)
    kind = payload.pop('kind', None)
    if kind not in TRANSFORM_TYPES:
        raise ConfigError(f"Unknown reward transform '{kind}', expected one of {sorted(TRANSFORM_TYPES)}")
    args = {
        key: float(value) if isinstance(value, str) and value in ('inf', '-inf') else value
        for key, value in payload.items()
    }
    return TRANSFORM_TYPES[kind](**args)


def parse_transform(text: str) -> RewardTransform:
    """
    Parse a CLI transform spec

    Accepted forms: `movielens`, `imdb`, `scaled:<alpha>`,
    `affine:<scale>,<offset>,<step|none>,<low>,<high>`
    """
    name, _, args = text.strip().partition(':')
    name = name.lower()
    try:
        if name == 'movielens':
            return MovieLensClipRound()
        if name == 'imdb':
            return ImdbSqrtRound()
        if name in ('scaled', 'scaled_cosine'):
            return ScaledCosine(alpha=float(args) if args else 1.0)
        if name in ('affine', 'affine_clip'):
            parts = [p.strip() for p in args.split(',')]
            if len(parts) != 5:
                raise ConfigError(f"affine transform needs 5 values, got '{args}'")
            scale, offset, step, low, high = parts
            return AffineClip(
                scale=float(scale),
                offset=float(offset),
                round_step=None if step.lower() in ('', 'none') else float(step),
                clip_low=float(low),
                clip_high=float(high),
            )
    except ValueError as e:
        raise ConfigError(f"Malformed transform '{text}': {e}") from e
    raise ConfigError(f"Unknown transform '{text}' (movielens, imdb, scaled:<a>, affine:<s>,<o>,<step>,<lo>,<hi>)")


# ---------------------------------------------------------------------------
# Cosine and rewards
# ---------------------------------------------------------------------------

def _feature_sum(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sum of x * y over the feature axis, accumulated in feature order."""
    total = np.zeros(np.broadcast_shapes(x.shape, y.shape)[:-1], dtype=np.float64)
    for j in range(x.shape[-1]):
        total = total + x[..., j] * y[..., j]
    return total


def _cosine_block(states: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """
    Clamped cosine for every (state, action) pair of a block.

    Single pairs go through here as 1 x 1 blocks. Accumulation order is fixed
    per feature, so a pair's value does not depend on the block it was
    computed in and cosine(s, a) == cosine(a, s) bit for bit.
    """
    dots = _feature_sum(states[:, None, :], actions[None, :, :])
    state_norms = np.sqrt(_feature_sum(states, states))
    action_norms = np.sqrt(_feature_sum(actions, actions))
    return np.clip(dots / (state_norms[:, None] * action_norms[None, :]), -1.0, 1.0)


def _as_matrix(vectors, name: str) -> np.ndarray:
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[None, :]
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a vector or matrix, got shape {matrix.shape}")
    return matrix


def _check_norms(matrix: np.ndarray, name: str) -> None:
    zero = np.flatnonzero(~(matrix != 0).any(axis=1))
    if len(zero):
        raise DegenerateVectorError(f"{name} has zero-norm rows at {zero[:10].tolist()}")


def cosine(s: Sequence[float], a: Sequence[float]) -> float:
    """
    Cosine similarity clamped to [-1, 1]

    Raises:
        DegenerateVectorError: If either vector has zero norm
    """
    s_row = _as_matrix(s, 'state')
    a_row = _as_matrix(a, 'action')
    if s_row.shape[1] != a_row.shape[1]:
        raise DimensionMismatchError(f"State dim {s_row.shape[1]} != action dim {a_row.shape[1]}")
    _check_norms(s_row, 'state')
    _check_norms(a_row, 'action')
    return float(_cosine_block(s_row, a_row)[0, 0])


def cosine_matrix(states: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """|S| x |A| clamped cosine table, computed in state chunks"""
    states = _as_matrix(states, 'states')
    actions = _as_matrix(actions, 'actions')
    if states.shape[1] != actions.shape[1]:
        raise DimensionMismatchError(f"State dim {states.shape[1]} != action dim {actions.shape[1]}")
    _check_norms(states, 'states')
    _check_norms(actions, 'actions')

    table = np.empty((states.shape[0], actions.shape[0]), dtype=np.float64)
    for start in range(0, states.shape[0], STATE_CHUNK):
        stop = start + STATE_CHUNK
        table[start:stop] = _cosine_block(states[start:stop], actions)
    return table


def apply_transform(c, t: RewardTransform):
    """
    Map cosine similarity onto the reward scale

    Args:
        c: Cosine value(s) in [-1, 1]
        t: Reward transform

    Returns:
        float for scalar input, ndarray otherwise
    """
    values = np.asarray(c, dtype=np.float64)
    if np.any(values < -1.0) or np.any(values > 1.0) or np.any(np.isnan(values)):
        raise PreconditionError("Cosine values must lie in [-1, 1]")
    result = t.apply(values)
    return float(result) if np.ndim(result) == 0 else result


def reward(s: Sequence[float], a: Sequence[float], t: RewardTransform) -> float:
    """Reward of one (state, action) pair"""
    return float(t.apply(cosine(s, a)))


def reward_matrix(states: np.ndarray, actions: np.ndarray, t: RewardTransform) -> np.ndarray:
    """|S| x |A| reward table"""
    return t.apply(cosine_matrix(states, actions))


# ---------------------------------------------------------------------------
# Histograms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RewardHistogram:
    """Counts of discrete reward (or feedback) values"""
    bin_values: Tuple[float, ...]
    counts: Tuple[int, ...]
    total: int

    def __post_init__(self):
        object.__setattr__(self, 'bin_values', tuple(float(v) for v in self.bin_values))
        object.__setattr__(self, 'counts', tuple(int(c) for c in self.counts))
        if len(self.bin_values) != len(self.counts):
            raise ConfigError("Histogram needs one count per bin")
        if any(later <= earlier for earlier, later in zip(self.bin_values, self.bin_values[1:])):
            raise ConfigError("Histogram bin values must be strictly increasing")
        if any(c < 0 for c in self.counts):
            raise ConfigError("Histogram counts must be nonnegative")
        if sum(self.counts) != self.total:
            raise ConfigError(f"Histogram counts sum to {sum(self.counts)}, total says {self.total}")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "RewardHistogram":
        array = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
        bins, counts = np.unique(array.ravel(), return_counts=True)
        return cls(bin_values=tuple(bins.tolist()), counts=tuple(counts.tolist()), total=int(array.size))

    def as_dict(self) -> Dict[float, int]:
        return dict(zip(self.bin_values, self.counts))

    def frequencies(self) -> Dict[float, float]:
        if self.total == 0:
            raise PreconditionError("Histogram with zero total has no frequencies")
        return {value: count / self.total for value, count in zip(self.bin_values, self.counts)}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'value': list(self.bin_values), 'count': list(self.counts)})

    def to_csv(self, path) -> None:
        """Two-column CSV (value, count)"""
        self.to_frame().to_csv(path, index=False)


@dataclass(frozen=True)
class HistogramSampling:
    """Exhaustive pairs (n_pairs None) or n seeded uniform pairs"""
    n_pairs: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_pairs is not None and self.n_pairs < 1:
            raise ConfigError(f"n_pairs must be positive, got {self.n_pairs}")


EXHAUSTIVE = HistogramSampling()


def reward_histogram(states: StateSet,
                     actions: ActionSet,
                     t: RewardTransform,
                     sampling: HistogramSampling = EXHAUSTIVE,
                     bin_step: Optional[float] = None) -> RewardHistogram:
    """
    Histogram of rewards over state-action pairs

    Args:
        states: State set
        actions: Action set
        t: Reward transform
        sampling: Exhaustive or seeded uniform pair sampling
        bin_step: Ceiling bin width, required for continuous transforms

    Returns:
        RewardHistogram

    Raises:
        ConfigError: If the transform is continuous and no bin_step is given
    """
    if not t.is_discrete and bin_step is None:
        raise ConfigError(f"Transform '{t.kind}' is continuous; pass an explicit bin_step")

    if sampling.n_pairs is None:
        values = reward_matrix(states.matrix, actions.matrix, t).ravel()
    else:
        rng = make_rng(sampling.seed)
        state_idx = rng.integers(0, len(states), size=sampling.n_pairs)
        action_idx = rng.integers(0, len(actions), size=sampling.n_pairs)
        s_rows = states.matrix[state_idx]
        a_rows = actions.matrix[action_idx]
        _check_norms(s_rows, 'states')
        _check_norms(a_rows, 'actions')
        dots = _feature_sum(s_rows, a_rows)
        norms = np.sqrt(_feature_sum(s_rows, s_rows)) * np.sqrt(_feature_sum(a_rows, a_rows))
        values = t.apply(np.clip(dots / norms, -1.0, 1.0))

    if bin_step is not None:
        values = bin_step * _snapped_ceil(np.asarray(values) / bin_step)
    return RewardHistogram.from_values(values)


def feedback_histogram(dataset: Dataset) -> RewardHistogram:
    """
    Histogram of the dataset's own feedback

    Interaction feedback when present; otherwise item mean ratings snapped to
    the nearest scale step (IMDb-style catalogs).
    """
    if dataset.interactions:
        return RewardHistogram.from_values([i.feedback for i in dataset.interactions])

    means = [item.mean_feedback for item in dataset.items if item.mean_feedback is not None]
    if not means:
        raise PreconditionError("Dataset has neither interactions nor item mean ratings")
    scale = dataset.scale
    values = np.asarray(means, dtype=np.float64)
    if scale.discrete_step is not None:
        steps = np.floor((values - scale.min) / scale.discrete_step + 0.5)
        values = np.clip(scale.min + steps * scale.discrete_step, scale.min, scale.max)
    return RewardHistogram.from_values(values)


def tv_distance(h1: RewardHistogram, h2: RewardHistogram) -> float:
    """
    Total variation distance: half the L1 distance of normalized histograms

    Raises:
        PreconditionError: If either histogram is empty
    """
    if h1.total == 0 or h2.total == 0:
        raise PreconditionError("Total variation needs non-empty histograms")
    p1 = h1.frequencies()
    p2 = h2.frequencies()
    support = sorted(set(p1) | set(p2))
    return 0.5 * math.fsum(abs(p1.get(v, 0.0) - p2.get(v, 0.0)) for v in support)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

def alpha_sweep(states: StateSet,
                actions: ActionSet,
                target: RewardHistogram,
                grid: Sequence[float],
                round_step: float,
                clip: Tuple[float, float]) -> pd.DataFrame:
    """
    TV distance between the target and AffineClip{alpha, 0, round_step, clip}
    rewards over all pairs, for every alpha in the grid

    Returns:
        DataFrame with columns alpha, tv_distance (grid order)
    """
    if not grid:
        raise ConfigError("Calibration grid is empty")
    if any(not alpha > 0 for alpha in grid):
        raise ConfigError(f"Calibration grid values must be positive: {list(grid)}")

    cosines = cosine_matrix(states.matrix, actions.matrix)
    rows = []
    for alpha in grid:
        transform = AffineClip(scale=float(alpha), offset=0.0, round_step=round_step,
                               clip_low=clip[0], clip_high=clip[1])
        histogram = RewardHistogram.from_values(transform.apply(cosines))
        rows.append({'alpha': float(alpha), 'tv_distance': tv_distance(target, histogram)})
        logger.debug(f"alpha={alpha}: tv={rows[-1]['tv_distance']:.6f}")
    return pd.DataFrame(rows, columns=['alpha', 'tv_distance'])


def select_alpha(sweep: pd.DataFrame) -> pd.Series:
    """Sweep row with the smallest TV distance (ties: smallest alpha)"""
    if sweep.empty:
        raise ConfigError("Calibration sweep is empty")
    return sweep.sort_values(['tv_distance', 'alpha'], kind='mergesort').iloc[0]


def calibrate_alpha(states: StateSet,
                    actions: ActionSet,
                    target: RewardHistogram,
                    grid: Sequence[float],
                    round_step: float,
                    clip: Tuple[float, float]) -> float:
    """
    Grid alpha whose rewards best match the target histogram (ties: smallest alpha)

    Returns:
        Selected alpha
    """
    sweep = alpha_sweep(states, actions, target, grid, round_step, clip)
    best = select_alpha(sweep)
    logger.info(f"Calibrated alpha={best['alpha']} (tv={best['tv_distance']:.4f}) over {len(sweep)} grid values")
    return float(best['alpha'])
