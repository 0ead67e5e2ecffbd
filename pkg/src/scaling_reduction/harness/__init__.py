"""Verification battery, CSV reports and the command-line interface."""

from .reports import CheckReport, format_table
from .verify import verify_suite

__all__ = ["CheckReport", "format_table", "verify_suite"]
