"""Lower-bound constructions and adaptive adversaries."""

from .adversary import (DEGENERATE, AdversaryState, RunReport, adversary_next, adversary_run,
                        format_transcript)
from .construction import LowerBoundTree, MaskDecomposition, build_tree, decompose, n_seq
from .general import MetricRunReport, general_metric_run, line_metric, metric_weights, uniform_metric

__all__ = [
    "DEGENERATE", "AdversaryState", "RunReport", "adversary_next", "adversary_run", "format_transcript",
    "LowerBoundTree", "MaskDecomposition", "build_tree", "decompose", "n_seq",
    "MetricRunReport", "general_metric_run", "line_metric", "metric_weights", "uniform_metric",
]
