"""
Error handling service and the exception hierarchy of the verification engine.
"""
# Standard libraries
import sys
import os
from typing import Dict, Callable, Optional, List, Tuple
from enum import Enum, auto

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Local imports
from utils.logger import get_logger

logger = get_logger(__name__)


class ErrorSeverity(Enum):
    """Enum for error severity levels."""
    INFO = auto()
    WARNING = auto()
    ERROR = auto()
    CRITICAL = auto()


class VerificationError(Exception):
    """Base class for all errors raised by the engine."""
    exit_code = 4


class PreconditionError(VerificationError):
    """An operation was called outside its domain."""
    exit_code = 2


class PrecisionExceededError(VerificationError):
    """A p-power denominator does not fit the residue ring precision."""
    exit_code = 2


class BudgetExceededError(VerificationError):
    """An enumeration or term count is above the configured budget."""
    exit_code = 3

    def __init__(self, what: str, requested: float, budget: float):
        super().__init__(f"{what}: requested {requested:.3g} exceeds budget {budget:.3g}")
        self.what = what
        self.requested = requested
        self.budget = budget


class QTooSmallError(VerificationError):
    """The delta-symbol window contains no admissible modulus."""
    exit_code = 2


class ConfigurationError(VerificationError):
    """Invalid configuration or parameter file."""
    exit_code = 2


class CheckFailedError(VerificationError):
    """An asserted identity failed."""
    exit_code = 1

    def __init__(self, check_name: str, statement: str, details: str = ""):
        super().__init__(f"{check_name} failed ({statement})" + (f": {details}" if details else ""))
        self.check_name = check_name
        self.statement = statement
        self.details = details


class ErrorHandler:
    """Centralized error handling service for verification errors."""

    def __init__(self):
        """Initialize error handler with empty callbacks dictionary."""
        self.error_callbacks: Dict[str, Callable] = {}
        self.history: List[Tuple[str, str, ErrorSeverity]] = []

    def register_callback(self, error_type: str, callback: Callable) -> None:
        """Register a callback for a specific error type."""
        self.error_callbacks[error_type] = callback
        logger.info(f"Registered error callback for: {error_type}")

    def clear(self) -> None:
        """Drop recorded history and callbacks."""
        self.error_callbacks.clear()
        self.history.clear()

    def handle_error(self, error_type: str, message: str,
                     severity: ErrorSeverity = ErrorSeverity.ERROR,
                     details: Optional[str] = None) -> None:
        """
        Handle an error by logging it and invoking registered callbacks.

        Args:
            error_type: Type of error for routing to appropriate callback
            message: Main error message
            severity: Severity level of the error
            details: Optional detailed error information
        """
        log_method = {
            ErrorSeverity.INFO: logger.info,
            ErrorSeverity.WARNING: logger.warning,
            ErrorSeverity.ERROR: logger.error,
            ErrorSeverity.CRITICAL: logger.critical
        }.get(severity, logger.error)

        log_method(f"{error_type}: {message}" + (f" - {details}" if details else ""))
        self.history.append((error_type, message, severity))

        if error_type in self.error_callbacks:
            self.error_callbacks[error_type](message, severity, details)

    def handle_exception(self, exc: BaseException) -> int:
        """Route an exception through handle_error and return its exit code."""
        if isinstance(exc, CheckFailedError):
            self.handle_error("check_failed", str(exc), ErrorSeverity.ERROR, exc.statement)
        elif isinstance(exc, BudgetExceededError):
            self.handle_error("budget", str(exc), ErrorSeverity.WARNING)
        elif isinstance(exc, VerificationError):
            self.handle_error(type(exc).__name__, str(exc), ErrorSeverity.ERROR)
        else:
            self.handle_error("internal", repr(exc), ErrorSeverity.CRITICAL)
            return 4
        return exc.exit_code


# Singleton instance
error_handler = ErrorHandler()
