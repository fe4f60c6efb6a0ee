"""
Run configuration of one cli invocation.
"""
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple


class Subcommand(Enum):
    """Verification subcommands with their report names."""
    VERIFY_DELTA = ("verify-delta", "Delta-symbol exactness and c_Q convergence")
    VERIFY_LOCAL = ("verify-local", "p-adic stationary phase against brute force")
    VERIFY_ZETA = ("verify-zeta", "Local zeta identity as truncated series")
    VERIFY_VANISHING = ("verify-vanishing", "Hecke function, eigenvalues and Sigma_0 vanishing")
    DECAY_REPORT = ("decay-report", "Archimedean decay exponents")
    COMPARE_SIGMA = ("compare-sigma", "Direct, delta-inserted and Poisson-side Sigma(X)")
    EVAL_MAIN_RHS = ("eval-main-rhs", "Truncated main-theorem sum")

    def __init__(self, code: str, display_name: str):
        self.code = code
        self.display_name = display_name

    @classmethod
    def from_code(cls, code: str) -> "Subcommand":
        for sub in cls:
            if sub.code == code:
                return sub
        raise ValueError(f"Unknown subcommand: {code}")

    @classmethod
    def codes(cls) -> List[str]:
        return [sub.code for sub in cls]


@dataclass
class RunConfig:
    """Subcommand, parameter overrides, output locations and verbosity."""
    subcommand: Subcommand
    params: Dict[str, Any] = field(default_factory=dict)
    out: Optional[str] = None
    csv_dir: Optional[str] = None
    workers: Optional[int] = None
    seed: Optional[int] = None
    verbose: bool = False
    config_file: str = "config.json"

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if not isinstance(self.params, dict):
            errors.append("parameters must be a JSON object")
        if self.workers is not None and self.workers < 1:
            errors.append("workers must be positive")
        if self.seed is not None and self.seed < 0:
            errors.append("seed must be nonnegative")
        return len(errors) == 0, errors

    @staticmethod
    def load_params(path: str) -> Dict[str, Any]:
        """Read a JSON parameter file."""
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subcommand": self.subcommand.code,
            "params": self.params,
            "out": self.out,
            "csv_dir": self.csv_dir,
            "workers": self.workers,
            "seed": self.seed,
            "verbose": self.verbose,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return cls(
            subcommand=Subcommand.from_code(data["subcommand"]),
            params=data.get("params", {}),
            out=data.get("out"),
            csv_dir=data.get("csv_dir"),
            workers=data.get("workers"),
            seed=data.get("seed"),
            verbose=bool(data.get("verbose", False)),
            config_file=data.get("config_file", "config.json"),
        )
