from .harness import HEURISTICS, RunConfig, RunRecord, SuiteError, run_instance, run_suite
from .report import (
    HeuristicSummary,
    SummaryTable,
    emit_csv,
    emit_summary_csv,
    format_summary,
    read_records_csv,
    summarize,
)
from .suite import bundled_suite_dir, generate_suite, write_suite

__all__ = [
    "HEURISTICS", "RunConfig", "RunRecord", "SuiteError", "run_instance", "run_suite",
    "HeuristicSummary", "SummaryTable", "emit_csv", "emit_summary_csv", "format_summary",
    "read_records_csv", "summarize", "bundled_suite_dir", "generate_suite", "write_suite",
]
