"""
Check results and verification reports.
"""
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

REPORT_SCHEMA_VERSION = 1


def _jsonable(value: Any) -> Any:
    """Convert nested values (Fractions, numpy scalars, complex) into JSON types."""
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            return str(value)
        return value
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return str(value)


def strip_timing(value: Any) -> Any:
    """Drop wall-clock fields so that reruns serialise identically."""
    if isinstance(value, dict):
        return {k: strip_timing(v) for k, v in value.items() if k != "elapsed_s"}
    if isinstance(value, list):
        return [strip_timing(v) for v in value]
    return value


@dataclass
class CheckResult:
    """Outcome of a single asserted property."""
    name: str
    passed: bool
    statement: str
    details: Dict[str, Any] = field(default_factory=dict)
    elapsed_s: float = 0.0
    flagged: bool = False
    # reported comparisons carry a pass flag but do not decide the run
    asserted: bool = True

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "passed": self.passed,
            "statement": self.statement,
            "flagged": self.flagged,
            "asserted": self.asserted,
            "details": _jsonable(self.details),
        }
        if include_timing:
            data["elapsed_s"] = round(self.elapsed_s, 6)
        else:
            data["details"] = strip_timing(data["details"])
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckResult":
        return cls(
            name=data["name"],
            passed=bool(data["passed"]),
            statement=data.get("statement", ""),
            details=data.get("details", {}),
            elapsed_s=float(data.get("elapsed_s", 0.0)),
            flagged=bool(data.get("flagged", False)),
            asserted=bool(data.get("asserted", True)),
        )


@dataclass
class VerificationReport:
    """All checks of one cli run plus the configuration that produced them."""
    subcommand: str
    config: Dict[str, Any]
    checks: List[CheckResult] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    created_at: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)

    def extend(self, checks: List[CheckResult]) -> None:
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.asserted)

    @property
    def first_failure(self) -> Optional[CheckResult]:
        for check in self.checks:
            if check.asserted and not check.passed:
                return check
        return None

    def to_dict(self, include_timestamp: bool = False) -> Dict[str, Any]:
        failure = self.first_failure
        data = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "subcommand": self.subcommand,
            "config": _jsonable(self.config),
            "checks": [c.to_dict(include_timestamp) for c in self.checks],
            "pass": self.passed,
            "first_failure": failure.name if failure else None,
        }
        if self.summary:
            summary = _jsonable(self.summary)
            data["summary"] = summary if include_timestamp else strip_timing(summary)
        if include_timestamp:
            data["created_at"] = self.created_at
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationReport":
        report = cls(subcommand=data["subcommand"], config=data.get("config", {}))
        report.checks = [CheckResult.from_dict(c) for c in data.get("checks", [])]
        report.summary = data.get("summary", {})
        if "created_at" in data:
            report.created_at = data["created_at"]
        return report

    @staticmethod
    def validate_dict(data: Dict[str, Any]) -> Tuple[bool, List[str]]:
        """Validate a serialized report against the schema."""
        errors = []
        for key in ("schema_version", "subcommand", "config", "checks", "pass", "first_failure"):
            if key not in data:
                errors.append(f"missing key: {key}")
        if not isinstance(data.get("checks", []), list):
            errors.append("checks must be a list")
        for i, check in enumerate(data.get("checks", []) or []):
            for key in ("name", "passed", "statement", "details"):
                if key not in check:
                    errors.append(f"check {i} missing key: {key}")
        if "pass" in data and "checks" in data and isinstance(data["checks"], list):
            expected = all(c.get("passed", False) for c in data["checks"] if c.get("asserted", True))
            if data["pass"] != expected:
                errors.append("pass flag disagrees with checks")
        return len(errors) == 0, errors
