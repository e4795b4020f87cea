from .metrics import ClassScores, Metrics, compute_metrics, mean_metrics
from .plans import (
    ExperimentPlan,
    Job,
    execute_plan,
    expand_jobs,
    load_plan,
    parse_grid_file,
    parse_plan,
)
from .report import (
    CSV_COLUMNS,
    SET_IDS,
    EvaluationReport,
    format_cell,
    mean_report,
    render_report,
    summarize_drop,
)
from .runners import (
    METHOD_KERNELS,
    AmalgamResult,
    FeatureCache,
    run_amalgam,
    run_cross,
    run_same_dataset,
    run_wild,
)

__all__ = [
    "ClassScores", "Metrics", "compute_metrics", "mean_metrics", "ExperimentPlan", "Job",
    "execute_plan", "expand_jobs", "load_plan", "parse_grid_file", "parse_plan",
    "CSV_COLUMNS", "SET_IDS", "EvaluationReport", "format_cell", "mean_report",
    "render_report", "summarize_drop", "METHOD_KERNELS", "AmalgamResult", "FeatureCache",
    "run_amalgam", "run_cross", "run_same_dataset", "run_wild",
]
