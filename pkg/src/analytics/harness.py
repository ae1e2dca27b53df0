"""
Experiment Harness
Runs agents against an environment, records rewards and regret against the
exact oracle, and aggregates seeded repeats into a comparison table
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from ..agents import AgentSpec, make_agent
from ..config import Settings
from ..environment.bandit_env import BanditEnvironment, Interaction
from ..errors import ConfigError, InvariantViolation, PreconditionError
from ..utils.rng import derive_seed

logger = logging.getLogger(__name__)

SUMMARY_METRICS = ('mean_reward_overall', 'mean_reward_last_window', 'total_regret')


@dataclass(frozen=True)
class RunConfig:
    """One agent run: steps, master seed, agent and smoothing window"""
    num_steps: int = 20000
    seed: int = 0
    agent: AgentSpec = field(default_factory=lambda: AgentSpec('uniform'))
    moving_average_window: int = 500

    def __post_init__(self):
        if self.num_steps < 1:
            raise ConfigError(f"num_steps must be positive, got {self.num_steps}")
        if self.moving_average_window < 1:
            raise ConfigError(f"moving_average_window must be positive, got {self.moving_average_window}")
        if self.moving_average_window > self.num_steps:
            raise ConfigError(
                f"moving_average_window {self.moving_average_window} exceeds num_steps {self.num_steps}"
            )


@dataclass(eq=False)
class RunMetrics:
    """Per-step series of one run and their summary"""
    interactions: List[Interaction]
    reward_series: np.ndarray
    oracle_series: np.ndarray
    regret_series: np.ndarray
    window: int
    summary: Dict[str, float] = field(default_factory=dict)

    @property
    def num_steps(self) -> int:
        return len(self.reward_series)

    def to_frame(self) -> pd.DataFrame:
        """Columns step, reward, moving_avg, cumulative_regret"""
        moving = moving_average(self.reward_series, self.window) if self.num_steps else []
        return pd.DataFrame({
            'step': np.arange(self.num_steps, dtype=np.int64),
            'reward': self.reward_series,
            'moving_avg': moving,
            'cumulative_regret': self.regret_series,
        }, columns=['step', 'reward', 'moving_avg', 'cumulative_regret'])


def summarize(reward_series: np.ndarray, regret_series: np.ndarray, window: int) -> Dict[str, float]:
    """Summary metrics, recomputable from the series alone"""
    if len(reward_series) == 0:
        return {name: 0.0 for name in SUMMARY_METRICS}
    return {
        'mean_reward_overall': float(np.mean(reward_series)),
        'mean_reward_last_window': float(np.mean(reward_series[-window:])),
        'total_regret': float(regret_series[-1]),
    }


def moving_average(series: Sequence[float], window: int) -> np.ndarray:
    """
    Trailing moving average with an expanding head

    Element i is the mean of the last min(i + 1, window) values.

    Raises:
        ConfigError: If window < 1
        PreconditionError: If the series is empty
    """
    if window < 1:
        raise ConfigError(f"Moving-average window must be >= 1, got {window}")
    values = pd.Series(np.asarray(series, dtype=np.float64))
    if values.empty:
        raise PreconditionError("Cannot smooth an empty series")
    return values.rolling(window=window, min_periods=1).mean().to_numpy()


def run(env: BanditEnvironment, config: RunConfig) -> RunMetrics:
    """
    Drive one agent for config.num_steps observe -> act -> step -> update rounds

    The state sampler is seeded with derive_seed(seed, "sampler") and the
    agent with derive_seed(seed, "agent"), so the run is fully determined by
    (environment, config).

    Args:
        env: Environment
        config: Run configuration

    Returns:
        RunMetrics
    """
    cursor = env.cursor(derive_seed(config.seed, 'sampler'))
    agent = make_agent(config.agent, env, derive_seed(config.seed, 'agent'))

    n = config.num_steps
    rewards = np.empty(n, dtype=np.float64)
    oracle = np.empty(n, dtype=np.float64)
    interactions = []

    for t in range(n):
        state_index, state = env.observe(cursor)
        action = agent.act(state, state_index)
        r = env.step(state_index, action)
        agent.update(state, action, r)

        _, best = env.best_action(state_index)
        if best < r:
            raise InvariantViolation(
                f"Oracle reward {best} below received reward {r} at state {state_index}, action {action}"
            )
        rewards[t] = r
        oracle[t] = best
        interactions.append(Interaction(step_index=t, state_index=state_index, action_index=action, reward=r))

    regret = np.cumsum(oracle - rewards)
    metrics = RunMetrics(
        interactions=interactions,
        reward_series=rewards,
        oracle_series=oracle,
        regret_series=regret,
        window=config.moving_average_window,
        summary=summarize(rewards, regret, config.moving_average_window),
    )
    logger.info(
        f"Run {config.agent.label()} seed={config.seed}: mean reward "
        f"{metrics.summary['mean_reward_overall']:.4f}, total regret {metrics.summary['total_regret']:.2f}"
    )
    return metrics


def repeat_configs(config: RunConfig, repeats: int) -> List[RunConfig]:
    """Copies of config with child seeds derive_seed(seed, repeat_index)"""
    return [replace(config, seed=derive_seed(config.seed, r)) for r in range(repeats)]


def run_repeats(env: BanditEnvironment,
                configs: Sequence[RunConfig],
                repeats: int = 5,
                workers: Optional[int] = None) -> Dict[Tuple[int, int], RunMetrics]:
    """
    Run every config `repeats` times with derived seeds in a thread pool

    Args:
        env: Environment shared by all runs
        configs: One config per agent
        repeats: Repeats per config
        workers: Thread pool size (defaults to Settings.workers)

    Returns:
        RunMetrics keyed by (config index, repeat index)
    """
    if not configs:
        raise ConfigError("compare needs at least one run config")
    if repeats < 1:
        raise ConfigError(f"repeats must be positive, got {repeats}")
    if workers is None:
        workers = Settings.from_env().workers

    # Built once up front so worker threads only read it
    _ = env.reward_matrix

    jobs: Dict[Tuple[int, int], RunConfig] = {}
    for i, config in enumerate(configs):
        for r, child in enumerate(repeat_configs(config, repeats)):
            jobs[(i, r)] = child

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {key: pool.submit(run, env, child) for key, child in jobs.items()}
        return {key: future.result() for key, future in futures.items()}


def comparison_table(configs: Sequence[RunConfig],
                     results: Dict[Tuple[int, int], RunMetrics],
                     repeats: int) -> pd.DataFrame:
    """One row per config: agent, repeats, steps and <metric>_mean / <metric>_std (population std)"""
    rows = []
    for i, config in enumerate(configs):
        summaries = [results[(i, r)].summary for r in range(repeats)]
        row = {'agent': config.agent.label(), 'repeats': repeats, 'steps': config.num_steps}
        for name in SUMMARY_METRICS:
            values = np.array([s[name] for s in summaries], dtype=np.float64)
            row[f'{name}_mean'] = float(values.mean())
            row[f'{name}_std'] = float(values.std(ddof=0))
        rows.append(row)
        logger.info(f"{row['agent']}: mean reward {row['mean_reward_overall_mean']:.4f} over {repeats} repeats")

    columns = ['agent', 'repeats', 'steps'] + [
        f'{name}_{stat}' for name in SUMMARY_METRICS for stat in ('mean', 'std')
    ]
    return pd.DataFrame(rows, columns=columns)


def compare(env: BanditEnvironment,
            configs: Sequence[RunConfig],
            repeats: int = 5,
            workers: Optional[int] = None) -> pd.DataFrame:
    """
    Mean and standard deviation of summary metrics across seeded repeats

    Repeat r of a config runs with seed derive_seed(config.seed, r). Results
    are keyed by (config index, repeat index), so the table does not depend
    on thread completion order.

    Returns:
        Comparison table (see comparison_table)
    """
    return comparison_table(configs, run_repeats(env, configs, repeats, workers), repeats)
