"""Evaluation harness: instance files, reports, Monte Carlo and exact evaluation, invariant checks."""

from .evaluate import (
    ALGORITHMS,
    Context,
    EvalConfig,
    EvaluationError,
    MCSummary,
    competitive_report,
    evaluate_exact,
    evaluate_mc,
    instance_opt,
)
from .io import load_instance, save_instance, write_report_csv

__all__ = [
    "ALGORITHMS",
    "Context",
    "EvalConfig",
    "EvaluationError",
    "MCSummary",
    "competitive_report",
    "evaluate_exact",
    "evaluate_mc",
    "instance_opt",
    "load_instance",
    "save_instance",
    "write_report_csv",
]
