"""
Phase x*det(T) + tr(g0 T) over gl2(Z_p), evaluated at t = p^t_exp.
"""
import os
import sys
from dataclasses import dataclass
from typing import Tuple, List, Dict, Any

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from models.padic import PAdicContext, ResidueMat2
from services.error_handler import PreconditionError


@dataclass(frozen=True)
class PhaseData:
    """Quadratic coefficient x (a unit), linear coefficient gamma0 and scale t = p^t_exp."""
    ctx: PAdicContext
    gamma0: ResidueMat2
    x: int
    t_exp: int

    def __post_init__(self):
        valid, errors = self.validate()
        if not valid:
            raise PreconditionError("; ".join(errors))
        object.__setattr__(self, "x", int(self.x) % self.ctx.modulus)

    def validate(self) -> Tuple[bool, List[str]]:
        errors = []
        if self.gamma0.ctx != self.ctx:
            errors.append("gamma0 lives over a different residue ring")
        if not self.ctx.is_unit(self.x):
            errors.append(f"x={self.x} is not a unit mod {self.ctx.p}")
        if self.t_exp < 1:
            errors.append(f"t_exp={self.t_exp} must be at least 1")
        if self.t_exp > self.ctx.n:
            errors.append(f"t_exp={self.t_exp} exceeds the precision n={self.ctx.n}")
        return len(errors) == 0, errors

    @property
    def t_modulus(self) -> int:
        return self.ctx.p ** self.t_exp

    def with_scale(self, u: int) -> "PhaseData":
        """Replace gamma0 by u*gamma0 and x by u*x."""
        return PhaseData(self.ctx, self.gamma0.scale(u), self.x * u, self.t_exp)

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.ctx.p, "n": self.ctx.n, "gamma0": list(self.gamma0.entries),
                "x": self.x, "t_exp": self.t_exp}
