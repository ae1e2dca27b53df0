"""
Result Export
CSV tables and self-contained SVG charts for runs, comparisons and reward
histograms
"""

from pathlib import Path
from typing import Mapping, Optional, Sequence, Union
import logging

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from ..environment.reward import RewardHistogram
from .harness import RunMetrics

logger = logging.getLogger(__name__)

# Fixed salt and no Date metadata keep repeated exports byte-identical
SVG_RC = {'svg.hashsalt': 'cbe', 'svg.fonttype': 'none'}
SVG_METADATA = {'Date': None}

PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def export_csv(result: Union[RunMetrics, pd.DataFrame], path: PathLike) -> Path:
    """
    Write run metrics (step, reward, moving_avg, cumulative_regret) or a table

    Args:
        result: RunMetrics or a comparison/sweep DataFrame
        path: Destination CSV

    Returns:
        Path written
    """
    path = _prepare(path)
    frame = result.to_frame() if isinstance(result, RunMetrics) else result
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def export_plot(series: Mapping[str, Sequence[float]],
                path: PathLike,
                title: str = 'Training reward',
                xlabel: str = 'step',
                ylabel: str = 'reward') -> Path:
    """
    Line chart with one polyline per series, saved as SVG

    Each line is emitted in an SVG group with id "series-<i>" (i in insertion order).

    Args:
        series: Label -> values
        path: Destination .svg file
        title: Chart title
        xlabel: X-axis label
        ylabel: Y-axis label

    Returns:
        Path written
    """
    path = _prepare(path)
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(10, 5))
        for i, (label, values) in enumerate(series.items()):
            values = np.asarray(values, dtype=np.float64)
            ax.plot(np.arange(len(values)), values, label=label, linewidth=1.2, gid=f'series-{i}')
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        if series:
            ax.legend(loc='lower right')
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata=SVG_METADATA)
        plt.close(fig)
    logger.info(f"Wrote plot with {len(series)} series to {path}")
    return path


def histogram_table(env_hist: RewardHistogram, dataset_hist: Optional[RewardHistogram] = None) -> pd.DataFrame:
    """
    Histogram counts aligned on the union of bin values

    Returns:
        DataFrame with columns value, environment_count and, when a dataset
        histogram is given, dataset_count
    """
    env_counts = env_hist.as_dict()
    if dataset_hist is None:
        values = sorted(env_counts)
        return pd.DataFrame({
            'value': values,
            'environment_count': [env_counts[v] for v in values],
        })

    data_counts = dataset_hist.as_dict()
    values = sorted(set(env_counts) | set(data_counts))
    return pd.DataFrame({
        'value': values,
        'dataset_count': [data_counts.get(v, 0) for v in values],
        'environment_count': [env_counts.get(v, 0) for v in values],
    })


def export_histogram_plot(table: pd.DataFrame, path: PathLike, title: str = 'Rating distributions') -> Path:
    """
    Side-by-side normalized bar charts of the columns of histogram_table

    Args:
        table: Output of histogram_table
        path: Destination .svg file
        title: Figure title

    Returns:
        Path written
    """
    path = _prepare(path)
    panels = [c for c in ('dataset_count', 'environment_count') if c in table.columns]
    labels = {'dataset_count': 'Dataset feedback', 'environment_count': 'Environment rewards'}

    values = table['value'].to_numpy(dtype=np.float64)
    width = float(np.min(np.diff(values))) * 0.8 if len(values) > 1 else 0.4

    with plt.rc_context(SVG_RC):
        fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4), squeeze=False)
        for ax, column in zip(axes[0], panels):
            counts = table[column].to_numpy(dtype=np.float64)
            total = counts.sum()
            ax.bar(values, counts / total if total else counts, width=width, gid=column)
            ax.set_title(labels[column])
            ax.set_xlabel('value')
            ax.set_ylabel('frequency')
        fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata=SVG_METADATA)
        plt.close(fig)
    logger.info(f"Wrote histogram plot to {path}")
    return path
