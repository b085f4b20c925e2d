"""
Run orchestration and report writing.
"""

from .reports import OutputWriter, RunOutputs, group_report, write_group_report
from .runner import AnalysisRunner, RunReport, write_error_report

__all__ = [
    "OutputWriter",
    "RunOutputs",
    "group_report",
    "write_group_report",
    "AnalysisRunner",
    "RunReport",
    "write_error_report",
]
