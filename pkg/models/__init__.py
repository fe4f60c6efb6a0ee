"""
Models package: value types of the verification engine.
"""

from .cyclotomic import CyclotomicNumber
from .geometric import GlobalTestFunction, SCtx, SigmaParams, SigmaResult, TruncationSpec
from .padic import PAdicContext, ResidueMat2
from .report import CheckResult, VerificationReport

__all__ = ["CyclotomicNumber", "GlobalTestFunction", "SCtx", "SigmaParams", "SigmaResult",
           "TruncationSpec", "PAdicContext", "ResidueMat2", "CheckResult", "VerificationReport"]
