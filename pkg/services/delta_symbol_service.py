"""
Delta-symbol expansion of the indicator of m = 0 over Q, for S = {inf} and S = {inf, 2}.
"""
# Standard libraries
import math
import os
import sys
import time
from dataclasses import replace
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import mpmath
import numpy as np

# Local imports
from models.delta_config import DeltaConfig, PlaceSet
from models.padic import odd_part
from models.report import CheckResult
from services.error_handler import PreconditionError, QTooSmallError
from utils.logger import get_logger

logger = get_logger(__name__)

DELTA_SYMBOL = ("delta^S(m) = (c_Q/Q) sum_{d in O^S - 0} 1_{dO^S}(m) h(d/Delta(Q), m/Delta(Q)^2), "
                "h(x,y) = W(x) - W(y/x)")
C_Q_ASYMPTOTIC = "c_Q = sqrt(d_F) + O_N(Q^-N)"

SInteger = Union[int, Fraction]


class DeltaSymbolService:
    """Service evaluating h, c_Q and the delta-symbol expansion."""

    def __init__(self, dps: int = 50):
        self.dps = dps
        self._c_cache: Dict[DeltaConfig, mpmath.mpf] = {}
        self._window_cache: Dict[DeltaConfig, Tuple[np.ndarray, np.ndarray]] = {}
        logger.info(f"DeltaSymbolService initialized (dps={dps})")

    # Building blocks ---------------------------------------------------
    def h_eval(self, cfg: DeltaConfig, x, y):
        """
        W(x) - W(y/x) for the archimedean weight, elementwise over arrays.

        delta_expansion sums the two halves of h separately: the d with W(m/(dQ)) != 0 are not
        the moduli of the first half, so the second half is reindexed by e = m/d.
        """
        x = np.asarray(x, dtype=float)
        if np.any(x == 0):
            raise PreconditionError("h(x, y) needs x != 0")
        value = cfg.W(x) - cfg.W(np.asarray(y, dtype=float) / x)
        return float(value) if np.ndim(value) == 0 else value

    def moduli(self, cfg: DeltaConfig) -> Tuple[np.ndarray, np.ndarray]:
        """Admissible d (odd when 2 is in S) with d/Q in supp W, and the values W(d/Q)."""
        if cfg in self._window_cache:
            return self._window_cache[cfg]
        first, last = cfg.window()
        d = np.arange(max(first, 1), last + 1, dtype=np.int64)
        if cfg.places.contains_two:
            d = d[d % 2 == 1]
        values = cfg.W(d / cfg.Q) if len(d) else np.zeros(0)
        self._window_cache[cfg] = (d, values)
        return d, values

    def c_q_mp(self, cfg: DeltaConfig) -> mpmath.mpf:
        """c_Q = Q / sum_d W(d/Q) in multiple precision, for the exactly normalised W."""
        if cfg in self._c_cache:
            return self._c_cache[cfg]
        d, _ = self.moduli(cfg)
        if len(d) == 0:
            raise QTooSmallError(f"no admissible modulus d with d/Q in supp W for Q={cfg.Q}")
        with mpmath.workdps(self.dps):
            shape_integral = cfg.W.shape_integral_mp(self.dps)
            Q = mpmath.mpf(cfg.Q)
            unit = replace(cfg.W, amplitude=1.0)
            total = mpmath.fsum(unit.evaluate_mp(mpmath.mpf(int(x)) / Q) for x in d)
            if total == 0:
                raise QTooSmallError(f"the delta-symbol normaliser vanishes for Q={cfg.Q}")
            c = Q * shape_integral / (mpmath.mpf(cfg.target_integral) * total)
        self._c_cache[cfg] = c
        return c

    def c_q(self, cfg: DeltaConfig) -> float:
        return float(self.c_q_mp(cfg))

    def c_q_defect(self, cfg: DeltaConfig) -> float:
        """c_Q - 1, resolved below double precision."""
        with mpmath.workdps(self.dps):
            return float(self.c_q_mp(cfg) - 1)

    @staticmethod
    def _check_element(cfg: DeltaConfig, m: SInteger) -> Fraction:
        m = Fraction(m)
        den = m.denominator
        if cfg.places.contains_two:
            if den & (den - 1):
                raise PreconditionError(f"{m} is not in Z[1/2]")
        elif den != 1:
            raise PreconditionError(f"{m} is not an integer")
        return m

    def _divisor_mask(self, cfg: DeltaConfig, m: Fraction, d: np.ndarray) -> np.ndarray:
        """1_{d O^S}(m) for the moduli d; over Z[1/2] this is odd(d) | odd(m)."""
        target = odd_part(m.numerator) if cfg.places.contains_two else abs(m.numerator)
        return target % d == 0

    # Expansion ---------------------------------------------------------
    def delta_expansion(self, cfg: DeltaConfig, m: SInteger) -> float:
        """(c_Q/Q) sum_d 1_{dO^S}(m) (W(d/Q) - W(m/(dQ)))."""
        m = self._check_element(cfg, m)
        c = self.c_q(cfg)
        d, w_first = self.moduli(cfg)
        if m == 0:
            return c * math.fsum(w_first) / cfg.Q
        mask = self._divisor_mask(cfg, m, d)
        first = w_first[mask]
        # second term: d runs over m/e for the admissible e dividing m, in increasing e
        partners = [m / int(e) for e in d[mask]]
        ratios = np.array([float(m / partner) for partner in partners]) / cfg.Q
        second = cfg.W(ratios) if len(ratios) else np.zeros(0)
        return c * (math.fsum(first) - math.fsum(second)) / cfg.Q

    def telescoping_witness(self, cfg: DeltaConfig, m: SInteger) -> CheckResult:
        """The multisets {W(d/Q)} and {W((m/d)/Q)} over the divisors d of m agree."""
        m = self._check_element(cfg, m)
        if m == 0:
            raise PreconditionError("the witness is for m != 0")
        target = odd_part(m.numerator) if cfg.places.contains_two else abs(m.numerator)
        divisors = np.array([e for e in range(1, target + 1) if target % e == 0], dtype=np.int64)
        first = np.sort(cfg.W(divisors / cfg.Q))
        second = np.sort(cfg.W((target // divisors) / cfg.Q))
        return CheckResult(
            name=f"telescoping_witness_m{m}_Q{cfg.Q:g}",
            passed=bool(np.array_equal(first, second)),
            statement="{W(d/Q) : d | m} = {W((m/d)/Q) : d | m}",
            details={"m": str(m), "divisors": len(divisors), "places": cfg.places.code},
        )

    # Batch checks ------------------------------------------------------
    def exactness_check(self, cfg: DeltaConfig, m_max: int, tol: float = 1e-12) -> CheckResult:
        start = time.perf_counter()
        at_zero = self.delta_expansion(cfg, 0)
        worst_m, worst = 0, 0.0
        for m in range(-m_max, m_max + 1):
            if m == 0:
                continue
            value = abs(self.delta_expansion(cfg, m))
            if value > worst:
                worst_m, worst = m, value
        elapsed = time.perf_counter() - start
        passed = abs(at_zero - 1.0) <= tol and worst <= tol
        logger.info(f"delta exactness Q={cfg.Q:g} S={cfg.places.code}: |delta(0)-1|={abs(at_zero - 1):.2e}, "
                    f"max |delta(m)|={worst:.2e} in {elapsed:.2f}s")
        return CheckResult(
            name=f"delta_exactness_Q{cfg.Q:g}_{cfg.places.code}",
            passed=passed,
            statement=DELTA_SYMBOL,
            details={"Q": cfg.Q, "m_max": m_max, "delta_at_zero": at_zero,
                     "max_abs_nonzero": worst, "argmax": worst_m, "c_Q": self.c_q(cfg),
                     "c_Q_minus_1": self.c_q_defect(cfg)},
            elapsed_s=elapsed,
        )

    def c_q_convergence_check(self, cfg: DeltaConfig, qs: Sequence[float],
                              max_ratio: float = 0.125) -> CheckResult:
        """|c_{2Q} - 1| / |c_Q - 1| <= max_ratio for every Q in qs."""
        rows = []
        for Q in qs:
            small = abs(self.c_q_defect(cfg.with_Q(Q)))
            large = abs(self.c_q_defect(cfg.with_Q(2 * Q)))
            ratio = large / small if small > 0 else 0.0
            rows.append({"Q": Q, "c_Q_minus_1": small, "c_2Q_minus_1": large, "ratio": ratio})
        return CheckResult(
            name=f"c_Q_convergence_{cfg.places.code}",
            passed=all(r["ratio"] <= max_ratio for r in rows),
            statement=C_Q_ASYMPTOTIC,
            details={"rows": rows, "max_ratio": max_ratio},
        )

    def c_q_sequence(self, cfg: DeltaConfig, base: float = 20.0, steps: int = 4) -> List[Dict[str, float]]:
        """|c_{2^k base} - 1| for k = 1..steps, for plot-ready tables."""
        return [{"k": k, "Q": base * 2 ** k, "abs_c_Q_minus_1": abs(self.c_q_defect(cfg.with_Q(base * 2 ** k)))}
                for k in range(1, steps + 1)]

    def verify_delta(self, qs: Sequence[float], m_max: int, places: PlaceSet = PlaceSet.INF,
                     q_convergence: Sequence[float] = (40, 80, 160), center: float = 2.5,
                     radius: float = 1.5) -> List[CheckResult]:
        base = DeltaConfig.create(qs[0], places, center, radius)
        checks = [self.exactness_check(base.with_Q(Q), m_max) for Q in qs]
        checks.append(self.c_q_convergence_check(base, q_convergence))
        for m in (12, 360, -2 * 3 * 5 * 7):
            checks.append(self.telescoping_witness(base, m))
        if places.contains_two:
            value = self.delta_expansion(base, Fraction(3, 2))
            checks.append(CheckResult(
                name="delta_half_integer",
                passed=abs(value) <= 1e-12,
                statement=DELTA_SYMBOL,
                details={"m": "3/2", "value": value},
            ))
        return checks
