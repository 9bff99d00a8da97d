"""Instance I/O, experiment orchestration and reports."""

from .experiment import COLUMNS, ExperimentConfig, ratio_str, report, run_experiment
from .instances import (Instance, SchemaError, emit_instance, gen_random, load_instance, parse_instance,
                        save_instance, style_weights)

__all__ = [
    "COLUMNS", "ExperimentConfig", "ratio_str", "report", "run_experiment",
    "Instance", "SchemaError", "emit_instance", "gen_random", "load_instance", "parse_instance",
    "save_instance", "style_weights",
]
