"""
Command Line Interface

    build-env   dataset files -> environment file (.cbe)
    inspect     dataset feedback vs environment reward histograms, TV distance
    calibrate   alpha sweep of the scaled-cosine reward against dataset feedback
    train       one agent run -> per-step CSV and reward curve
    compare     seeded repeats of several agents -> comparison table

Exit codes: 0 success, 2 usage/config, 3 data/format, 4 internal error.
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import argparse
import logging
import sys

import numpy as np

from .agents import AGENT_NAMES, AgentSpec
from .analytics.harness import RunConfig, comparison_table, moving_average, run, run_repeats
from .analytics.reporting import export_csv, export_histogram_plot, export_plot, histogram_table
from .config import Settings
from .data.dataset import Dataset
from .data.parsers import parse_classification, parse_generic, parse_imdb, parse_movielens
from .environment.bandit_env import SAMPLER_KINDS, BanditEnvironment, SamplerConfig
from .environment.env_file import load, save
from .environment.reward import (
    HistogramSampling,
    alpha_sweep,
    feedback_histogram,
    parse_transform,
    reward_histogram,
    select_alpha,
    tv_distance,
)
from .errors import ConfigError, SimulationError
from .presets import (
    PRESETS,
    RATING_SUPPORTS,
    BuildReport,
    build_classification_env,
    build_generic_env,
    build_imdb_env,
    build_movielens_env,
)
from .utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _float_pair(text: str) -> Tuple[float, float]:
    try:
        low, high = (float(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'low,high', got '{text}'")
    return low, high


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _parse_params(pairs: Sequence[str]) -> Dict[str, str]:
    params = {}
    for pair in pairs or ():
        key, sep, value = pair.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"--param expects key=value, got '{pair}'")
        params[key.strip()] = value.strip()
    return params


def _add_dataset_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('dataset')
    group.add_argument('--preset', choices=sorted(PRESETS), help='MovieLens or IMDb pipeline')
    group.add_argument('--ratings', help='MovieLens ratings.csv, or IMDb title.ratings.tsv with --preset imdb')
    group.add_argument('--movies', help='MovieLens movies.csv')
    group.add_argument('--basics', help='IMDb title.basics.tsv')
    group.add_argument('--interactions', help='Generic interactions file')
    group.add_argument('--items', help='Generic items file')
    group.add_argument('--schema', help='Generic schema (key=value file)')
    group.add_argument('--examples', help='Labeled examples CSV (example_id,label)')


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if not getattr(args, name)]
    if missing:
        raise ConfigError(f"Missing required option(s): {', '.join(missing)}")


def _load_dataset(args: argparse.Namespace) -> Optional[Dataset]:
    """Parse whichever dataset the dataset flags describe (None if none given)"""
    if args.preset == 'movielens':
        _require(args, 'ratings', 'movies')
        return parse_movielens(args.ratings, args.movies)
    if args.preset == 'imdb':
        _require(args, 'basics', 'ratings')
        return parse_imdb(args.basics, args.ratings)
    if args.examples:
        return parse_classification(args.examples)
    if args.items or args.schema:
        _require(args, 'items', 'schema')
        return parse_generic(args.interactions, args.items, args.schema)
    return None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_build_env(args: argparse.Namespace, settings: Settings) -> int:
    seed = args.seed if args.seed is not None else settings.default_seed
    sampler = SamplerConfig(kind=args.sampler, seed=seed)

    if args.preset:
        preset = PRESETS[args.preset]
        overrides = {
            'top_items': args.top_items,
            'top_users': args.top_users,
            'catalog_items': args.catalog_items,
            'synth_users': args.synth_users,
            'num_nonzero': args.num_nonzero,
            'norm_range': args.norm_range,
            'rating_support': args.rating_support,
            'transform': parse_transform(args.transform) if args.transform else None,
        }
        preset = replace(preset, **{k: v for k, v in overrides.items() if v is not None})
        if preset.name == 'movielens':
            _require(args, 'ratings', 'movies')
            env, report = build_movielens_env(args.ratings, args.movies, preset, sampler=sampler, seed=seed)
        else:
            _require(args, 'basics', 'ratings')
            env, report = build_imdb_env(args.basics, args.ratings, preset, sampler=sampler, seed=seed)
    elif args.examples:
        env, report = build_classification_env(args.examples, sampler=sampler, seed=seed)
    elif args.items or args.schema:
        _require(args, 'items', 'schema')
        env, report = build_generic_env(
            args.interactions,
            args.items,
            args.schema,
            transform=parse_transform(args.transform or 'scaled:1'),
            norm_range=args.norm_range or (-1.0, 1.0),
            top_items=args.top_items,
            top_users=args.top_users,
            sampler=sampler,
            seed=seed,
        )
    else:
        raise ConfigError("build-env needs --preset, --examples or --items/--schema")

    save(env, args.out)
    if args.tables_dir:
        tables = Path(args.tables_dir)
        tables.mkdir(parents=True, exist_ok=True)
        env.actions.to_frame().to_csv(tables / 'actions.csv', index=False)
        env.states.to_frame().to_csv(tables / 'states.csv', index=False)

    _print_build_summary(env, report, args.out)
    return 0


def _print_build_summary(env: BanditEnvironment, report: BuildReport, out: str) -> None:
    print(f"environment: {out}")
    print(f"states |S|: {env.num_states}")
    print(f"actions |A|: {env.num_actions}")
    print(f"dimension |T|: {env.dimension}")
    print(f"transform: {env.transform}")
    for warning in report.warnings():
        print(f"warning: {warning}")


def cmd_inspect(args: argparse.Namespace, settings: Settings) -> int:
    env = load(args.env)
    dataset = _load_dataset(args)

    pairs = args.pairs if args.pairs is not None else settings.histogram_pairs
    seed = args.seed if args.seed is not None else settings.default_seed
    sampling = HistogramSampling(n_pairs=pairs or None, seed=seed)
    env_hist = reward_histogram(env.states, env.actions, env.transform, sampling, bin_step=args.bin_step)

    data_hist = feedback_histogram(dataset) if dataset is not None else None
    table = histogram_table(env_hist, data_hist)
    export_csv(table, args.out)
    if args.plot:
        export_histogram_plot(table, args.plot)

    print(f"reward values: {', '.join(f'{v:g}' for v in env_hist.bin_values)}")
    print(f"reward pairs: {env_hist.total}")
    if data_hist is not None:
        print(f"tv_distance: {tv_distance(data_hist, env_hist):.6f}")
    return 0


def cmd_calibrate(args: argparse.Namespace, settings: Settings) -> int:
    env = load(args.env)
    dataset = _load_dataset(args)
    if dataset is None:
        raise ConfigError("calibrate needs the source dataset (dataset flags) for the target histogram")

    scale = dataset.scale
    round_step = args.round_step or scale.discrete_step
    if round_step is None:
        raise ConfigError("Dataset scale is continuous; pass --round-step")
    clip = args.clip or (scale.min, scale.max)

    target = feedback_histogram(dataset)
    sweep = alpha_sweep(env.states, env.actions, target, args.grid, round_step, clip)
    best = select_alpha(sweep)
    export_csv(sweep, args.out)
    if args.plot:
        export_plot({'tv_distance': sweep['tv_distance'].to_numpy()}, args.plot,
                    title='Calibration sweep', xlabel='grid index', ylabel='TV distance')

    print(f"alpha: {best['alpha']:g}")
    print(f"tv_distance: {best['tv_distance']:.6f}")
    return 0


def _window(args: argparse.Namespace) -> int:
    return args.window if args.window is not None else min(500, args.steps)


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    env = load(args.env)
    seed = args.seed if args.seed is not None else settings.default_seed
    config = RunConfig(
        num_steps=args.steps,
        seed=seed,
        agent=AgentSpec(args.agent, _parse_params(args.param)),
        moving_average_window=_window(args),
    )
    metrics = run(env, config)
    export_csv(metrics, args.out)
    if args.plot:
        export_plot({
            config.agent.label(): moving_average(metrics.reward_series, config.moving_average_window),
            'oracle (best action)': moving_average(metrics.oracle_series, config.moving_average_window),
        }, args.plot, title=f'Training reward ({config.moving_average_window}-step moving average)')

    for name, value in metrics.summary.items():
        print(f"{name}: {value:.6f}")
    return 0


def _agent_specs(names: str, params: Dict[str, str]) -> List[AgentSpec]:
    specs = []
    agent_names = [n.strip() for n in names.split(',') if n.strip()]
    if not agent_names:
        raise ConfigError(f"--agents is empty; valid agents: {', '.join(AGENT_NAMES)}")
    for name in agent_names:
        if name not in AGENT_NAMES:
            raise ConfigError(f"Unknown agent '{name}', valid agents: {', '.join(AGENT_NAMES)}")
        own = {key.split('.', 1)[1]: value for key, value in params.items() if key.startswith(f'{name}.')}
        specs.append(AgentSpec(name, own))
    return specs


def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:
    env = load(args.env)
    seed = args.seed if args.seed is not None else settings.default_seed
    window = _window(args)
    configs = [
        RunConfig(num_steps=args.steps, seed=seed, agent=spec, moving_average_window=window)
        for spec in _agent_specs(args.agents, _parse_params(args.param))
    ]
    workers = args.workers or settings.workers
    results = run_repeats(env, configs, args.repeats, workers)
    table = comparison_table(configs, results, args.repeats)
    export_csv(table, args.out)

    if args.plot:
        curves = {}
        for i, config in enumerate(configs):
            stacked = np.vstack([results[(i, r)].reward_series for r in range(args.repeats)])
            curves[config.agent.label()] = moving_average(stacked.mean(axis=0), window)
        export_plot(curves, args.plot, title=f'Mean training reward over {args.repeats} repeats')

    print(table.to_string(index=False))
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='cbe',
        description='Contextual bandit environments from recommendation datasets',
    )
    parser.add_argument('--log-level', help='Override CBE_LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True)

    build = commands.add_parser('build-env', help='Build an environment file from a dataset')
    _add_dataset_args(build)
    build.add_argument('--out', required=True, help='Environment file to write (.cbe)')
    build.add_argument('--seed', type=int, help='Master seed (synthetic users, sampler)')
    build.add_argument('--top-items', type=int, help='Number of actions')
    build.add_argument('--top-users', type=int, help='Number of most active users kept')
    build.add_argument('--catalog-items', type=int, help='IMDb catalog size for synthetic ratings')
    build.add_argument('--synth-users', type=int, help='Number of synthetic users')
    build.add_argument('--num-nonzero', type=int, help='Ratings per synthetic user')
    build.add_argument('--rating-support', choices=RATING_SUPPORTS, help='Synthetic rating distribution')
    build.add_argument('--norm-range', type=_float_pair, help='Feedback normalization interval low,high')
    build.add_argument('--transform', help='movielens | imdb | scaled:<a> | affine:<s>,<o>,<step|none>,<lo>,<hi>')
    build.add_argument('--sampler', choices=SAMPLER_KINDS, default='uniform_iid', help='State sampler')
    build.add_argument('--tables-dir', help='Also write actions.csv and states.csv here')
    build.set_defaults(handler=cmd_build_env)

    inspect = commands.add_parser('inspect', help='Compare reward and feedback distributions')
    inspect.add_argument('--env', required=True, help='Environment file')
    _add_dataset_args(inspect)
    inspect.add_argument('--out', required=True, help='Histogram CSV to write')
    inspect.add_argument('--plot', help='Histogram SVG to write')
    inspect.add_argument('--pairs', type=int, help='Sample this many pairs (0 = exhaustive)')
    inspect.add_argument('--bin-step', type=float, help='Bin width for continuous transforms')
    inspect.add_argument('--seed', type=int, help='Pair sampling seed')
    inspect.set_defaults(handler=cmd_inspect)

    calibrate = commands.add_parser('calibrate', help='Grid-search the reward scale alpha')
    calibrate.add_argument('--env', required=True, help='Environment file (states and actions)')
    _add_dataset_args(calibrate)
    calibrate.add_argument('--grid', type=_float_list, default=[0.5, 1.0, 2.0, 5.0, 10.0], help='Alpha values')
    calibrate.add_argument('--round-step', type=float, help='Reward rounding step (default: dataset step)')
    calibrate.add_argument('--clip', type=_float_pair, help='Reward clip low,high (default: dataset scale)')
    calibrate.add_argument('--out', required=True, help='Sweep CSV (alpha, tv_distance)')
    calibrate.add_argument('--plot', help='Sweep SVG')
    calibrate.set_defaults(handler=cmd_calibrate)

    train = commands.add_parser('train', help='Run one agent')
    train.add_argument('--env', required=True, help='Environment file')
    train.add_argument('--agent', required=True, choices=AGENT_NAMES, help='Agent name')
    train.add_argument('--param', action='append', default=[], help='Agent hyperparameter key=value')
    train.add_argument('--steps', type=int, default=20000, help='Number of steps')
    train.add_argument('--window', type=int, help='Moving-average window (default 500)')
    train.add_argument('--seed', type=int, help='Run seed')
    train.add_argument('--out', required=True, help='Per-step CSV')
    train.add_argument('--plot', help='Reward curve SVG')
    train.set_defaults(handler=cmd_train)

    compare = commands.add_parser('compare', help='Compare agents over seeded repeats')
    compare.add_argument('--env', required=True, help='Environment file')
    compare.add_argument('--agents', required=True, help=f"Comma-separated subset of {','.join(AGENT_NAMES)}")
    compare.add_argument('--param', action='append', default=[], help='Agent hyperparameter agent.key=value')
    compare.add_argument('--steps', type=int, default=20000, help='Steps per run')
    compare.add_argument('--repeats', type=int, default=5, help='Seeded repeats per agent')
    compare.add_argument('--window', type=int, help='Moving-average window (default 500)')
    compare.add_argument('--seed', type=int, help='Master seed')
    compare.add_argument('--workers', type=int, help='Thread pool size (default CBE_WORKERS)')
    compare.add_argument('--out', required=True, help='Comparison table CSV')
    compare.add_argument('--plot', help='Mean reward curves SVG')
    compare.set_defaults(handler=cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        settings = Settings.from_env()
        setup_logging(args.log_level or settings.log_level)
        return args.handler(args, settings)
    except SimulationError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 4


if __name__ == '__main__':
    sys.exit(main())
