"""
Local zeta identity, non-archimedean bound and support vanishing at an odd prime.

The left side integrates 1[P(b,T) in tZ_p] psi(tr gamma T / t) over gl2(Z_p)^2 and then
against chi(t)|t|^s over Z_p, one shell {v(t) = n} of mass 1 at a time. The right side is
the factorised Dirichlet series summed over the c-shells c = p^j.
"""
# Standard libraries
import os
import sys
import time
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import numpy as np

# Local imports
from models.padic import PAdicContext, ResidueMat2, INFINITE_VALUATION
from models.cyclotomic import CyclotomicNumber
from models.character import FiniteCharacter
from models.phase_data import PhaseData
from models.local_series import LocalInput, LocalSeries, SupportData
from models.report import CheckResult
from services.error_handler import PreconditionError
from services.padic_oscillatory_service import PadicOscillatoryService
from services.residue_enumeration import (
    shell_phase_table, naive_joint_table, unit_twisted_tables, require,
)
from utils.logger import get_logger

logger = get_logger(__name__)

LOCAL_ZETA = ("int_O int 1_{tO}(P(b,T)) psi(tr gamma T/t) dT chi(t)|t|^s dt^x = "
              "sum_c 1_{cgl2}(gamma) chi(c)|c|^(s+1) (1 - chi(p)q^(-s-5)) "
              "int_O 1_{tO}(P(b^-1, c^-1 gamma)) chi(t)|t|^(s+4) dt^x")
NA_BOUND = "|int 1_{tO}(P) psi(tr gamma T/t) dT| << q^(4 min v(gamma)) |t|^4 for v(t) > 1"
SUPPORT_VANISHING = "local integral vanishes if |gamma| or the conductor of chi is large"

METHODS = ("fibered", "naive", "closed_form")


class LocalZetaService:
    """Service building both sides of the local zeta identity and the local bounds."""

    def __init__(self, budget: float = 1e8, workers: int = 1,
                 oscillatory: Optional[PadicOscillatoryService] = None):
        self.budget = budget
        self.workers = workers
        self.oscillatory = oscillatory or PadicOscillatoryService(budget, workers)
        logger.info("LocalZetaService initialized")

    # Shell integrals ---------------------------------------------------
    def shell_table(self, inp: LocalInput, e: int, support: SupportData = SupportData(),
                    gamma_den: int = 0, exact_valuation: bool = False):
        """Phase histogram (E, N, R) of the shell integral at t = p^e, gamma = gamma_num / p^gamma_den."""
        return shell_phase_table(
            inp.ctx.p, inp.b, inp.gamma, gamma_den, beta=support.beta, m=support.m,
            k=support.k, e=e, exact_valuation=exact_valuation, budget=self.budget)

    def shell_integral(self, inp: LocalInput, e: int, u: int = 1,
                       support: SupportData = SupportData(), gamma_den: int = 0) -> CyclotomicNumber:
        """int over the support of 1[P(b,T) in tZ_p] psi(tr gamma T / t) dT at t = p^e u."""
        p = inp.ctx.p
        if u % p == 0:
            raise PreconditionError(f"u={u} is not a unit")
        table, n_exp, depth = self.shell_table(inp, e, support, gamma_den)
        mod = p ** n_exp
        if mod > 1 and u % mod != 1:
            idx = np.arange(mod, dtype=np.int64)
            permuted = np.empty_like(table)
            permuted[(idx * pow(u, -1, mod)) % mod] = table
            table = permuted
        return CyclotomicNumber.from_histogram(mod, table, Fraction(1, p ** (8 * (support.k + depth))))

    def shell_average(self, inp: LocalInput, e: int, chi: Optional[FiniteCharacter] = None,
                      support: SupportData = SupportData(), gamma_den: int = 0) -> CyclotomicNumber:
        """Mean over units u of chi(u) times the shell integral at t = p^e u."""
        ramified = chi is not None and chi.conductor_exponent > 0
        if support.is_spherical and not ramified:
            # T -> uT preserves gl2(Z_p)^2 and the phase, so every unit gives the same value
            return self.shell_integral(inp, e, 1, support, gamma_den)
        p = inp.ctx.p
        table, n_exp, depth = self.shell_table(inp, e, support, gamma_den)
        classify = (lambda u: u % p) if ramified else None
        grouped, n_units = unit_twisted_tables(table, p, n_exp, classify)
        scale = Fraction(1, p ** (8 * (support.k + depth)) * n_units)
        total = CyclotomicNumber.zero()
        for key, hist in grouped.items():
            value = CyclotomicNumber.from_histogram(p ** n_exp, hist, scale)
            total = total + (chi(key) * value if ramified else value)
        return total

    def naive_shell_integral(self, inp: LocalInput, e: int) -> CyclotomicNumber:
        """Same integral by joint enumeration of (T1, T2) mod p^e; spherical support only."""
        p = inp.ctx.p
        hist = naive_joint_table(p, inp.b, inp.gamma, e, self.budget)
        return CyclotomicNumber.from_histogram(p ** e, hist, Fraction(1, p ** (8 * e)))

    # Series ------------------------------------------------------------
    def _new_series(self, inp: LocalInput, max_order: int, label: str) -> LocalSeries:
        require(max_order >= 0, "truncation order must be nonnegative")
        require(max_order <= inp.ctx.n, f"order {max_order} exceeds the precision n={inp.ctx.n}")
        return LocalSeries(inp.ctx, max_order, label=label)

    @staticmethod
    def _add_shell(series: LocalSeries, n: int, value: CyclotomicNumber,
                   chi: Optional[FiniteCharacter]) -> None:
        if chi is None or chi.is_formal:
            series.add_term(n, n, value)
            return
        omega = chi.at_uniformizer()
        weight = CyclotomicNumber.rational(1)
        for _ in range(n):
            weight = weight * omega
        series.add_term(n, 0, value * weight)

    def lhs_series(self, inp: LocalInput, max_order: int, method: str = "fibered",
                   chi: Optional[FiniteCharacter] = None,
                   support: SupportData = SupportData()) -> LocalSeries:
        """Shell-by-shell expansion of the left side up to u^max_order."""
        if method not in METHODS:
            raise PreconditionError(f"unknown method {method}; expected one of {METHODS}")
        if method == "closed_form":
            require(chi is None or chi.is_formal, "the closed-form path is for unramified characters")
            require(support.is_spherical, "the closed-form path needs spherical support")
            return self.lhs_series_closed_form(inp, max_order)
        start = time.perf_counter()
        series = self._new_series(inp, max_order, f"lhs_{method}")
        for n in range(max_order + 1):
            if method == "naive":
                require(support.is_spherical and (chi is None or chi.is_formal),
                        "joint enumeration covers the spherical unramified case")
                value = self.naive_shell_integral(inp, n)
            else:
                value = self.shell_average(inp, n, chi, support)
            self._add_shell(series, n, value, chi)
        logger.debug(f"lhs series ({method}) p={inp.ctx.p} M={max_order}: "
                     f"{time.perf_counter() - start:.2f}s")
        return series

    def closed_form_shell(self, inp: LocalInput, k: int) -> CyclotomicNumber:
        """
        Shell integral at t = p^k from the stationary phase closed forms.

        Expanding 1[p^k | P] as an additive character sum over y = p^j x', the T-integral
        factors into two gl2 integrals with quadratic coefficients x' b1 and -x' b2.
        """
        p = inp.ctx.p
        value = CyclotomicNumber.zero()
        if self._divides(inp, k):
            value = value + CyclotomicNumber.rational(Fraction(1, p ** k))
        for j in range(k):
            if not self._divides(inp, j):
                break
            m = k - j
            ctx_m = PAdicContext(p, m)
            mod = ctx_m.modulus
            exps = []
            for g, x in ((inp.gamma[0], inp.b[0]), (inp.gamma[1], -inp.b[1])):
                reduced = ResidueMat2(ctx_m, tuple(entry // p ** j for entry in g))
                _, exponent = self.oscillatory.closed_form_exponent(PhaseData(ctx_m, reduced, x, m))
                exps.append(exponent)
            total = (exps[0] + exps[1]) % mod
            units = np.array([y for y in range(1, mod) if y % p], dtype=np.int64)
            hist = np.bincount((total * units) % mod, minlength=mod)
            value = value + CyclotomicNumber.from_histogram(mod, hist, Fraction(1, p ** (j + 5 * m)))
        return value

    def lhs_series_closed_form(self, inp: LocalInput, max_order: int) -> LocalSeries:
        series = self._new_series(inp, max_order, "lhs_closed_form")
        for n in range(max_order + 1):
            series.add_term(n, n, self.closed_form_shell(inp, n))
        return series

    @staticmethod
    def _divides(inp: LocalInput, j: int) -> bool:
        f = inp.ctx.p ** j
        return all(x % f == 0 for g in inp.gamma for x in g)

    def rhs_series(self, inp: LocalInput, max_order: int) -> LocalSeries:
        """
        sum_j [p^-j gamma integral] (q^-1 omega u)^j (1 - omega q^-5 u)
        sum_k [p^k | P(b^-1, p^-j gamma)] (omega q^-4 u)^k, truncated at u^max_order.
        """
        q = inp.ctx.q
        series = self._new_series(inp, max_order, "rhs")
        v_obs = inp.obstruction_valuation()
        for j in range(max_order + 1):
            if not self._divides(inp, j):
                break
            k_max = max_order - j if v_obs >= INFINITE_VALUATION else min(v_obs - 2 * j, max_order - j)
            for k in range(k_max + 1):
                n = j + k
                series.add_term(n, n, CyclotomicNumber.rational(Fraction(1, q ** (j + 4 * k))))
                series.add_term(n + 1, n + 1, CyclotomicNumber.rational(Fraction(-1, q ** (j + 4 * k + 5))))
        return series

    # Checks ------------------------------------------------------------
    def compare_local_series(self, inp: LocalInput, max_order: int,
                             method: str = "fibered") -> CheckResult:
        start = time.perf_counter()
        lhs = self.lhs_series(inp, max_order, method)
        rhs = self.rhs_series(inp, max_order)
        mismatches = lhs.mismatches(rhs)
        elapsed = time.perf_counter() - start
        logger.info(f"local zeta p={inp.ctx.p} b={inp.b} M={max_order} ({method}): "
                    f"{'equal' if not mismatches else f'{len(mismatches)} mismatches'} in {elapsed:.2f}s")
        return CheckResult(
            name=f"local_zeta_p{inp.ctx.p}_M{max_order}_{method}",
            passed=not mismatches,
            statement=LOCAL_ZETA,
            details={"input": inp.to_dict(), "method": method, "max_order": max_order,
                     "mismatches": mismatches, "lhs": lhs.to_rows(), "rhs": rhs.to_rows()},
            elapsed_s=elapsed,
        )

    def na_bound_check(self, inputs: Sequence[LocalInput], t_exps: Iterable[int],
                       constant: Optional[float] = None, rel_tol: float = 1e-9) -> CheckResult:
        """
        |I(p^t)| <= C q^(4 min v(gamma)) q^(-4t) for every input and t.

        C defaults to 1 / (1 - q^-3), which bounds every coefficient of the right side.
        """
        t_exps = list(t_exps)
        require(len(inputs) > 0 and len(t_exps) > 0, "need at least one input and one t")
        for inp in inputs:
            if inp.is_zero:
                raise PreconditionError("the bound needs gamma != (0, 0)")
        if any(t <= 1 for t in t_exps):
            raise PreconditionError("the bound is stated for v(t) > 1")
        start = time.perf_counter()
        rows: List[Dict] = []
        for inp in inputs:
            q = inp.ctx.q
            for t in t_exps:
                value = abs(self.shell_integral(inp, t))
                envelope = float(q) ** (4 * inp.min_valuation - 4 * t)
                rows.append({"input": inp.to_dict(), "t_exp": t, "abs_value": value,
                             "envelope": envelope, "ratio": value / envelope})
        if constant is None:
            constant = max(1.0 / (1.0 - float(inp.ctx.q) ** -3) for inp in inputs)
        violations = [r for r in rows if r["ratio"] > constant * (1 + rel_tol)]
        return CheckResult(
            name="na_bound",
            passed=not violations,
            statement=NA_BOUND,
            details={"constant": constant, "rows": rows, "violations": len(violations)},
            elapsed_s=time.perf_counter() - start,
        )

    def support_vanishing_check(self, inp: LocalInput, support: SupportData = SupportData(),
                                den_max: Optional[int] = None, e_max: int = 1) -> CheckResult:
        """
        Shell integrals with gamma = gamma_num / p^a for a = 0..den_max and shells e = 0..e_max.

        Every shell must vanish once a > m + k; the largest a with a nonzero shell is reported.
        """
        p = inp.ctx.p
        require(any(x % p for g in inp.gamma for x in g),
                "gamma_num needs a unit entry so that p^a is its exact denominator")
        radius = support.m + support.k
        den_max = radius + 1 if den_max is None else den_max
        start = time.perf_counter()
        largest_nonzero = None
        violations = []
        for a in range(den_max + 1):
            for e in range(e_max + 1):
                value = self.shell_average(inp, e, None, support, gamma_den=a)
                if not value.is_zero():
                    largest_nonzero = a if largest_nonzero is None else max(largest_nonzero, a)
                    if a > radius:
                        violations.append({"a": a, "e": e, "value": value.to_dict()})
        return CheckResult(
            name=f"support_vanishing_p{p}_m{support.m}_k{support.k}",
            passed=not violations,
            statement=SUPPORT_VANISHING,
            details={"support": support.to_dict(), "radius": radius,
                     "largest_nonzero_denominator": largest_nonzero, "violations": violations},
            elapsed_s=time.perf_counter() - start,
        )

    def ramified_vanishing_check(self, inp: LocalInput, max_order: int, power: int = 1) -> CheckResult:
        """The left side with a conductor-p character and spherical support is identically 0."""
        chi = FiniteCharacter.ramified(inp.ctx, power)
        series = self.lhs_series(inp, max_order, "fibered", chi=chi)
        return CheckResult(
            name=f"ramified_vanishing_p{inp.ctx.p}_M{max_order}",
            passed=series.is_zero(),
            statement=SUPPORT_VANISHING,
            details={"input": inp.to_dict(), "power": power, "series": series.to_rows()},
        )

    def specialization_check(self, inp: LocalInput, max_order: int, sigma: float = 1.0,
                             method: str = "fibered", tol: float = 1e-10) -> CheckResult:
        """Both series at omega = 1, u = q^-sigma against a float sum of the shell integrals."""
        q = inp.ctx.q
        u = float(q) ** (-sigma)
        lhs = self.lhs_series(inp, max_order, method).evaluate(1.0, u)
        rhs = self.rhs_series(inp, max_order).evaluate(1.0, u)
        direct = sum(self.shell_integral(inp, n).to_complex() * u ** n for n in range(max_order + 1))
        err = max(abs(lhs - direct), abs(rhs - direct))
        return CheckResult(
            name=f"specialization_p{q}_sigma{sigma}",
            passed=err <= tol,
            statement="series at omega = 1, u = q^-sigma equal the truncated t-integral",
            details={"lhs": lhs, "rhs": rhs, "direct": direct, "max_error": err},
        )
