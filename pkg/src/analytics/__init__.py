# Experiment runs, comparisons and result export

from .harness import RunConfig, RunMetrics, compare, comparison_table, moving_average, run, run_repeats
from .reporting import export_csv, export_histogram_plot, export_plot, histogram_table

__all__ = [
    'RunConfig',
    'RunMetrics',
    'compare',
    'comparison_table',
    'run_repeats',
    'moving_average',
    'run',
    'export_csv',
    'export_histogram_plot',
    'export_plot',
    'histogram_table',
]
