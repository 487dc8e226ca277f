"""Monte Carlo harness: designs, replications and summary tables."""

from prepivot.harness.designs import (
    MODELS,
    McDesign,
    Replicate,
    load_design,
    ma_population_m,
    parse_design_text,
    ridge_population_m,
    simulate,
)
from prepivot.harness.runner import (
    COLUMNS,
    MAX_ABORT_SHARE,
    PowerPoint,
    RejectionRow,
    RejectionTable,
    ReplicationResult,
    UniformityResult,
    local_power,
    read_rejection_csv,
    rejection_rows,
    replication_stream,
    run_power_curve,
    run_replication,
    run_replications,
    run_table1,
    run_uniformity,
    write_atomic,
)

__all__ = [
    "COLUMNS", "MAX_ABORT_SHARE", "MODELS", "McDesign", "PowerPoint", "RejectionRow", "RejectionTable",
    "Replicate", "ReplicationResult", "UniformityResult", "load_design", "local_power", "ma_population_m",
    "parse_design_text", "read_rejection_csv", "rejection_rows", "replication_stream", "ridge_population_m",
    "run_power_curve", "run_replication", "run_replications", "run_table1", "run_uniformity", "simulate",
    "write_atomic",
]
