"""
Core module exports.
"""

from src.core.compare import CompareReport, MismatchedGrids, compare_files, relative_error_db
from src.core.output import render_csv, render_json, write_results
from src.core.runner import BatchResult, BatchRunner, ReceiverResult

__all__ = [
    "BatchRunner",
    "BatchResult",
    "ReceiverResult",
    "CompareReport",
    "MismatchedGrids",
    "compare_files",
    "relative_error_db",
    "render_csv",
    "render_json",
    "write_results",
]
