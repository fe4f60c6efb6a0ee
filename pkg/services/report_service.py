"""
JSON reports and plot-ready CSV tables.
"""
# Standard libraries
import csv
import json
import os
import sys
from typing import Any, Dict, List, Optional

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Local imports
from models.report import VerificationReport, _jsonable
from services.error_handler import ConfigurationError
from utils.logger import get_logger

logger = get_logger(__name__)


class ReportService:
    """Service writing verification reports and their tables."""

    def __init__(self, directory: str = "reports"):
        self.directory = directory
        logger.info("ReportService initialized")

    def default_path(self, report: VerificationReport) -> str:
        return os.path.join(self.directory, f"{report.subcommand}.json")

    def write_json(self, report: VerificationReport, path: Optional[str] = None) -> str:
        """Validate and write the report; the timestamp is left out so reruns are identical."""
        path = path or self.default_path(report)
        data = report.to_dict()
        valid, errors = VerificationReport.validate_dict(data)
        if not valid:
            raise ConfigurationError(f"report does not match its schema: {errors}")
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=4, sort_keys=True)
        logger.info(f"Report written to {path}")
        return path

    @staticmethod
    def read_json(path: str) -> VerificationReport:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        valid, errors = VerificationReport.validate_dict(data)
        if not valid:
            raise ConfigurationError(f"{path}: {errors}")
        return VerificationReport.from_dict(data)

    def write_tables(self, report: VerificationReport, directory: str) -> List[str]:
        """One CSV per table, columns in first-seen order."""
        os.makedirs(directory, exist_ok=True)
        written = []
        for name, rows in report.tables.items():
            if not rows:
                continue
            fieldnames: List[str] = []
            for row in rows:
                for key in row:
                    if key not in fieldnames:
                        fieldnames.append(key)
            path = os.path.join(directory, f"{report.subcommand}_{name}.csv")
            with open(path, "w", encoding="utf-8", newline="") as csvfile:
                writer = csv.DictWriter(csvfile, fieldnames=fieldnames)
                writer.writeheader()
                for row in rows:
                    writer.writerow({k: _flatten(v) for k, v in row.items()})
            written.append(path)
            logger.debug(f"Table {name}: {len(rows)} rows -> {path}")
        return written


def _flatten(value: Any) -> Any:
    value = _jsonable(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value)
    return value
