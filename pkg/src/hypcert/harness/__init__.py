"""Problem registry, experiment driver, metrics, tables and the command line."""

from .experiment import Bundle, run_experiment
from .metrics import HEADER, MetricsRow, compute_metrics
from .registry import BENCHMARKS, ProblemSpec, TrainingPlan, get_problem, registry
from .tables import emit_tables

__all__ = ["Bundle", "HEADER", "MetricsRow", "BENCHMARKS", "ProblemSpec", "TrainingPlan", "compute_metrics",
           "emit_tables", "get_problem", "registry", "run_experiment"]
