from .analysis import (
    Projection,
    TopConfigPCA,
    best_so_far,
    high_performer_counts,
    high_performer_threshold,
    pca_2d,
    pca_top_configs,
    quantile,
)
from .artifacts import emit_artifacts, svg_step_plot
from .data import (
    COVERTYPE_HEADER,
    TabularDataset,
    balanced_subsample,
    load_csv,
    make_covertype_like,
    split_sizes,
    write_covertype_like,
    write_csv,
)
from .runlog import RunLog, RunLogWriter, parse_run_log, read_run_log, record_from_dict, record_to_dict

__all__ = [
    "COVERTYPE_HEADER",
    "Projection",
    "RunLog",
    "RunLogWriter",
    "TabularDataset",
    "TopConfigPCA",
    "balanced_subsample",
    "best_so_far",
    "emit_artifacts",
    "high_performer_counts",
    "high_performer_threshold",
    "load_csv",
    "make_covertype_like",
    "parse_run_log",
    "pca_2d",
    "pca_top_configs",
    "quantile",
    "read_run_log",
    "record_from_dict",
    "record_to_dict",
    "split_sizes",
    "svg_step_plot",
    "write_covertype_like",
    "write_csv",
]
