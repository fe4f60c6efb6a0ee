"""
Batch runner behind the cli: resolves services, runs the checks of one subcommand and
writes the report.
"""
# Standard libraries
import os
import sys
import time
from typing import Callable, Dict, List, Optional, Tuple

# Path resolution
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Third-party libraries
import numpy as np

# Local imports
from models.delta_config import DeltaConfig, PlaceSet
from models.geometric import GlobalTestFunction, SigmaParams, TruncationSpec
from models.local_series import LocalInput
from models.padic import PAdicContext, ResidueMat2
from models.phase_data import PhaseData
from models.quadrature import QuadratureSpec
from models.report import CheckResult, VerificationReport
from models.run_config import RunConfig, Subcommand
from models.smooth_weight import MatrixBump, SmoothWeight
from services.config_service import ConfigService
from services.delta_symbol_service import DeltaSymbolService
from services.error_handler import ConfigurationError, PreconditionError
from services.exact_arith_service import ExactArithService
from services.geometric_side_service import MAIN_THEOREM, GeometricSideService
from services.hecke_service import HECKE_EIGENVALUE, HeckeService
from services.local_zeta_service import LocalZetaService
from services.padic_oscillatory_service import PadicOscillatoryService
from services.report_service import ReportService
from services.service_container import ServiceContainer, container
from services.smooth_analysis_service import SmoothAnalysisService
from utils.logger import get_logger

logger = get_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1


class VerificationRunner:
    """Runs one subcommand against the merged configuration."""

    def __init__(self, config: ConfigService, services: Optional[ServiceContainer] = None,
                 workers: int = 1):
        self.config = config
        self.services = services or container
        self.workers = workers
        self.seed = int(config.get("seed", 0))
        self._handlers: Dict[Subcommand, Callable[[VerificationReport], None]] = {
            Subcommand.VERIFY_DELTA: self._verify_delta,
            Subcommand.VERIFY_LOCAL: self._verify_local,
            Subcommand.VERIFY_ZETA: self._verify_zeta,
            Subcommand.VERIFY_VANISHING: self._verify_vanishing,
            Subcommand.DECAY_REPORT: self._decay_report,
            Subcommand.COMPARE_SIGMA: self._compare_sigma,
            Subcommand.EVAL_MAIN_RHS: self._eval_main_rhs,
        }
        self._register_services()
        logger.info("VerificationRunner initialized")

    # Services --------------------------------------------------------------
    def _quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(log2_points=int(self.config.get("budgets.qmc_log2_points", 14)),
                              n_estimates=int(self.config.get("budgets.qmc_estimates", 8)),
                              seed=self.seed)

    def _register_services(self) -> None:
        budget = float(self.config.get("budgets.enumeration", 1e8))
        self.services.clear()
        self.services.register(ConfigService, self.config)
        exact = ExactArithService()
        oscillatory = PadicOscillatoryService(budget, self.workers)
        local_zeta = LocalZetaService(budget, self.workers, oscillatory)
        delta = DeltaSymbolService()
        smooth = SmoothAnalysisService(self._quadrature())
        self.services.register(ExactArithService, exact)
        self.services.register(PadicOscillatoryService, oscillatory)
        self.services.register(LocalZetaService, local_zeta)
        self.services.register(DeltaSymbolService, delta)
        self.services.register(SmoothAnalysisService, smooth)
        self.services.register(HeckeService, HeckeService(budget))
        max_terms = int(self.config.get("budgets.max_terms", 200_000))
        self.services.register_factory(GeometricSideService, lambda: GeometricSideService(
            delta, smooth, local_zeta, budget=budget, max_terms=max_terms))
        self.services.register(ReportService, ReportService(self.config.get("reports.directory", "reports")))

    # Run -------------------------------------------------------------------
    def run(self, run_config: RunConfig) -> Tuple[int, VerificationReport]:
        """Run the subcommand, write the report and return (exit status, report)."""
        valid, errors = run_config.validate()
        if not valid:
            raise ConfigurationError("; ".join(errors))
        report = VerificationReport(subcommand=run_config.subcommand.code,
                                    config=self.config.snapshot())
        start = time.perf_counter()
        self._handlers[run_config.subcommand](report)
        logger.info(f"{run_config.subcommand.code}: {len(report.checks)} checks in "
                    f"{time.perf_counter() - start:.2f}s, {'pass' if report.passed else 'FAIL'}")
        for check in report.checks:
            if check.flagged:
                logger.warning(f"{check.name}: error budget flagged")
        reports = self.services.get(ReportService)
        reports.write_json(report, run_config.out)
        if run_config.csv_dir:
            reports.write_tables(report, run_config.csv_dir)
        if report.passed:
            return EXIT_PASS, report
        failure = report.first_failure
        logger.error(f"First failing check: {failure.name} ({failure.statement})")
        return EXIT_FAIL, report

    # Subcommands -----------------------------------------------------------
    def _verify_delta(self, report: VerificationReport) -> None:
        delta: DeltaSymbolService = self.services.get(DeltaSymbolService)
        qs = [float(q) for q in self.config.get("delta.q_values", [30, 60, 120])]
        m_max = int(self.config.get("delta.m_max", 5000))
        places = PlaceSet.from_code(self.config.get("delta.s_places", "inf"))
        center = float(self.config.get("delta.w_center", 2.5))
        radius = float(self.config.get("delta.w_radius", 1.5))
        report.extend(delta.verify_delta(qs, m_max, places,
                                         self.config.get("delta.q_convergence", [40, 80, 160]),
                                         center, radius))
        cfg = DeltaConfig.create(qs[0], places, center, radius)
        report.tables["c_Q"] = delta.c_q_sequence(cfg)

    def _verify_local(self, report: VerificationReport) -> None:
        oscillatory: PadicOscillatoryService = self.services.get(PadicOscillatoryService)
        exact: ExactArithService = self.services.get(ExactArithService)
        primes = [int(p) for p in self.config.get("local.primes", [3, 5, 7])]
        t_exps = [int(t) for t in self.config.get("local.t_exps", [1, 2])]
        cases = int(self.config.get("local.cases", 50))
        for p in primes:
            for t in t_exps:
                report.add(oscillatory.oracle_equivalence(p, t, cases, self.seed))
            report.add(oscillatory.gauss_factor_check(p))
            report.add(exact.multiplicativity_check(exact.make_character(PAdicContext(p, 1), "ramified")))
        for p, t in self.config.get("local.extra_cases", [[3, 3]]):
            report.add(oscillatory.oracle_equivalence(int(p), int(t), cases, self.seed))
        for p in sorted(set([2] + primes)):
            report.add(oscillatory.singular_count_check(p))
        report.add(oscillatory.flip_identity_check(primes[0]))
        report.add(exact.det_multiplicativity_check(primes[0]))
        ctx = PAdicContext(primes[0], 2)
        rng = np.random.default_rng([self.seed, 1])
        ph = PhaseData(ctx, ResidueMat2(ctx, tuple(int(v) for v in rng.integers(0, ctx.modulus, 4))), 1, 2)
        report.add(oscillatory.unit_scaling_check(ph, 2))

    def _local_inputs(self, p: int, n: int, count: int) -> List[LocalInput]:
        """Random inputs plus the P = 0 case gamma1 = gamma2 = 1, b = (1, 1)."""
        ctx = PAdicContext(p, n)
        rng = np.random.default_rng([self.seed, p, n])
        inputs = [LocalInput(ctx, (1, 1), ((1, 0, 0, 1), (1, 0, 0, 1)))]
        while len(inputs) < count + 1:
            b = tuple(int(x) for x in rng.integers(1, ctx.modulus, 2))
            gamma = tuple(tuple(int(x) for x in rng.integers(0, ctx.modulus, 4)) for _ in range(2))
            if all(ctx.is_unit(x) for x in b) and any(x for g in gamma for x in g):
                inputs.append(LocalInput(ctx, b, gamma))
        return inputs

    def _verify_zeta(self, report: VerificationReport) -> None:
        local: LocalZetaService = self.services.get(LocalZetaService)
        cases = int(self.config.get("local.zeta_cases", 2))
        oracle_order = int(self.config.get("local.oracle_order", 2))
        fibered_order = int(self.config.get("local.fibered_order", 3))
        closed_order = int(self.config.get("local.closed_form_order", 6))
        for p in [int(p) for p in self.config.get("local.zeta_primes", [3, 5])]:
            inputs = self._local_inputs(p, closed_order, cases)
            for inp in inputs:
                report.add(local.compare_local_series(inp, closed_order, "closed_form"))
            small = self._local_inputs(p, fibered_order, cases)
            for inp in small:
                report.add(local.compare_local_series(inp, fibered_order, "fibered"))
            report.add(local.ramified_vanishing_check(small[1], min(2, fibered_order)))
            report.add(local.specialization_check(small[1], fibered_order))
            report.add(local.na_bound_check(small[1:], range(2, fibered_order + 1)))
        for p in [int(p) for p in self.config.get("local.oracle_primes", [3])]:
            for inp in self._local_inputs(p, oracle_order, 1):
                report.add(local.compare_local_series(inp, oracle_order, "naive"))
        report.tables["series"] = [dict(row, check=c.name) for c in report.checks
                                   for row in c.details.get("lhs", [])]

    def _verify_vanishing(self, report: VerificationReport) -> None:
        hecke: HeckeService = self.services.get(HeckeService)
        gtf = self._test_function()
        for p in sorted(set([gtf.p] + [int(p) for p in self.config.get("hecke.primes", [2, 3])])):
            phi = hecke.hecke_A_function(p, gtf.k)
            report.extend(hecke.assumption_A_check(phi))
        n = int(self.config.get("hecke.grid_side", 100))
        for q in self.config.get("hecke.q_values", [2, 3]):
            report.add(hecke.eigenvalue_nonvanishing_scan(float(q), n, n))
            floor = hecke.tempered_sweep(float(q))
            report.add(CheckResult(name=f"tempered_sweep_q{q}", passed=floor > 0, statement=HECKE_EIGENVALUE,
                                   details={"min_abs": floor}))
            witness = hecke.boundary_ray_witness(float(q))
            report.tables[f"boundary_ray_q{q}"] = [{"ratio": r, "abs_eigenvalue": v}
                                                   for r, v in zip(witness["ratio"], witness["abs_eigenvalue"])]
        report.add(hecke.sigma0_vanishing_check(gtf))

    def _decay_report(self, report: VerificationReport) -> None:
        smooth: SmoothAnalysisService = self.services.get(SmoothAnalysisService)
        params = self._sigma_params(float(self.config.get("sigma.x_values", [50])[0]))
        W = params.delta.W
        b = tuple(float(x) for x in self.config.get("decay.b", [1.0, 1.0]))
        gamma0 = self.config.get("decay.gamma0", [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]])
        checks, tables = smooth.decay_report(
            self._decay_function(), b, gamma0, self.config.get("decay.t_grid"),
            self.config.get("decay.lambdas"), W,
            eps=float(self.config.get("decay.eps", 0.5)), n_test=int(self.config.get("decay.n_test", 6)),
            large_gamma_t=float(self.config.get("decay.large_gamma_t", 0.25)))
        report.extend(checks)
        report.tables.update(tables)
        bump = SmoothWeight.bump(float(self.config.get("delta.w_center", 2.5)),
                                 float(self.config.get("delta.w_radius", 1.5)))
        for Q in self.config.get("decay.poisson_q", [10, 40]):
            report.add(smooth.poisson_1d_check(bump, float(Q), int(self.config.get("decay.poisson_k_max", 3))))

    def _compare_sigma(self, report: VerificationReport) -> None:
        geometric: GeometricSideService = self.services.get(GeometricSideService)
        hecke: HeckeService = self.services.get(HeckeService)
        gtf = self._test_function()
        truncation = self._truncation()
        x_values = [float(x) for x in self.config.get("sigma.x_values", [50, 100])]
        summaries = []
        for X in x_values:
            checks, summary = geometric.compare_sigma(self._sigma_params(X), gtf, truncation)
            report.extend(checks)
            summaries.append(summary)
        for first, second in zip(x_values, x_values[1:]):
            report.add(geometric.x_stability(self._sigma_params(first), gtf, truncation, second / first))
        report.add(hecke.sigma0_vanishing_check(gtf))
        b2 = GeometricSideService._b2_values(gtf)[0]
        report.add(geometric.odd_dual_check(3, 1, b2, radius=truncation.gamma_radius, seed=self.seed))
        report.summary = summaries[0] if len(summaries) == 1 else {"runs": summaries}
        report.tables["sigma"] = [{"X": s["config"]["params"]["X"], "direct": s["direct"]["value"],
                                   "delta_inserted": s["delta_inserted"]["value"],
                                   "poisson_side": s["poisson_side"]["value"],
                                   "error_budget": s["error_budget"]} for s in summaries]

    def _eval_main_rhs(self, report: VerificationReport) -> None:
        geometric: GeometricSideService = self.services.get(GeometricSideService)
        gtf = self._test_function()
        truncation = self._truncation()
        X = float(max(self.config.get("sigma.x_values", [50, 100])))
        params = self._sigma_params(X)
        rhs = geometric.main_theorem_rhs(params, gtf, truncation)
        direct = geometric.direct_sigma(params, gtf)
        target = rhs.details["normalization"] * direct.value
        gap = abs(rhs.value - target)
        allowed = 0.1 * abs(target) + rhs.error_budget
        converged = bool(rhs.details.get("converged"))
        report.add(CheckResult(
            name=f"main_theorem_rhs_X{X:g}",
            passed=converged and gap <= allowed,
            statement=MAIN_THEOREM,
            details={"rhs": rhs.value, "target": target, "gap": gap, "allowed": allowed,
                     "error_budget": rhs.error_budget, "normalization": rhs.details["normalization"],
                     "converged": converged, "radius_needed": rhs.details.get("radius_needed"),
                     "gamma_radius": truncation.gamma_radius, "c_max": truncation.c_max},
            flagged=rhs.flagged,
        ))
        report.add(self.services.get(HeckeService).sigma0_vanishing_check(gtf))
        report.summary = {"config": {"params": params.to_dict(), "test_function": gtf.to_dict(),
                                     "truncation": truncation.to_dict()},
                          "main_theorem_rhs": rhs.to_dict(), "direct": direct.to_dict(), "target": target}
        report.tables["main_rhs_per_c"] = [{"c": c, "value": v} for c, v in rhs.details.get("per_c", {}).items()]

    # Configuration helpers -------------------------------------------------
    def _test_function(self) -> GlobalTestFunction:
        data = self.config.get("sigma.test_function")
        try:
            return GlobalTestFunction.from_dict(data) if data else GlobalTestFunction.default()
        except (KeyError, TypeError, PreconditionError) as e:
            raise ConfigurationError(f"invalid test function: {e}") from e

    def _decay_function(self) -> MatrixBump:
        """Matrix bump around T1 = 2I, T2 = -2I, where the phase of the default ray is stationary."""
        data = self.config.get("decay.test_function") or {}
        try:
            return MatrixBump.from_boxes(data.get("diag", [[1.5, 2.5], [-2.5, -1.5]]),
                                         data.get("off", [[-0.5, 0.5], [-0.5, 0.5]]))
        except (KeyError, TypeError, IndexError, PreconditionError) as e:
            raise ConfigurationError(f"invalid decay test function: {e}") from e

    def _sigma_params(self, X: float) -> SigmaParams:
        data = self.config.get("sigma.params")
        try:
            if data:
                return SigmaParams.from_dict(dict(data, X=X))
            return SigmaParams.default(X)
        except (KeyError, TypeError, PreconditionError) as e:
            raise ConfigurationError(f"invalid Sigma parameters: {e}") from e

    def _truncation(self) -> TruncationSpec:
        quadrature = QuadratureSpec(log2_points=int(self.config.get("sigma.qmc_log2_points", 12)),
                                    n_estimates=int(self.config.get("budgets.qmc_estimates", 8)),
                                    seed=self.seed)
        return TruncationSpec(
            gamma_radius=int(self.config.get("sigma.trunc_gamma", 1)),
            c_max=int(self.config.get("sigma.trunc_c", 3)),
            e_max=int(self.config.get("sigma.trunc_e", 5)),
            tail_safety=float(self.config.get("sigma.tail_safety", 3.0)),
            quadrature=quadrature,
        )
