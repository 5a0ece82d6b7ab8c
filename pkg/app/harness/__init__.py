"""
Experiment harness: certification runs, reproductions of the published
device numbers, report files and plot data.
"""

from app.harness.experiments import (
    REPRODUCTIONS,
    certify_state,
    prepare_state,
    reproduce,
    run_certification,
    write_plot_data,
)
from app.harness.reports import REPORT_SCHEMAS, build_decomposition_report, check_file, write_report

__all__ = [
    "REPRODUCTIONS",
    "REPORT_SCHEMAS",
    "build_decomposition_report",
    "certify_state",
    "check_file",
    "prepare_state",
    "reproduce",
    "run_certification",
    "write_plot_data",
    "write_report",
]
