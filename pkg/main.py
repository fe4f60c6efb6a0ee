"""
Command-line entry point of the kernel verification engine.

Every verification is a subcommand; each run writes a JSON report and exits with
0 (all asserted checks pass), 1 (a check failed), 2 (usage or configuration error),
3 (budget exceeded) or 4 (internal error).
"""
# Standard libraries
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

# Path resolution
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Local imports
from models.run_config import RunConfig, Subcommand
from services.config_service import ConfigService
from services.error_handler import ConfigurationError, ErrorSeverity, error_handler
from services.verification_runner import VerificationRunner
from utils.logger import configure_global_logging, get_logger

logger = get_logger(__name__)

EXIT_USAGE = 2


def _csv_list(text: str, cast=float) -> List[Any]:
    return [cast(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernel-verify",
        description="Verification engine for an invariant kernel-function construction over Q",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Delta-symbol exactness for three moduli
  kernel-verify verify-delta --mmax 5000 --q 30,60,120

  # p-adic stationary phase against brute force
  kernel-verify verify-local --p 3 --n 2 --cases 50

  # Three-way comparison of Sigma(X)
  kernel-verify compare-sigma --x 50 --out reports/sigma.json
        """
    )
    parser.add_argument("subcommand", choices=Subcommand.codes(), help="Verification to run")
    parser.add_argument("--params", help="JSON parameter file merged over the configuration")
    parser.add_argument("--config", default="config.json", help="Configuration file (default: config.json)")
    parser.add_argument("--out", help="Report path (default: reports/<subcommand>.json)")
    parser.add_argument("--csv", dest="csv_dir", help="Directory for plot-ready CSV tables")
    parser.add_argument("--workers", type=int, help="Worker processes (default: KERNEL_VERIFY_WORKERS or config)")
    parser.add_argument("--seed", type=int, help="Seed for sampled cases and quadrature scrambles")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    parser.add_argument("--log-dir", help="Directory for the daily log file (default: KERNEL_VERIFY_LOG_DIR or logs)")

    group = parser.add_argument_group("subcommand parameters")
    group.add_argument("--q", help="Comma-separated Q values (verify-delta)")
    group.add_argument("--mmax", type=int, help="Largest |m| checked (verify-delta)")
    group.add_argument("--s-places", choices=["inf", "inf,2"], help="Place set S (verify-delta)")
    group.add_argument("--p", help="Comma-separated primes (verify-local, verify-zeta)")
    group.add_argument("--n", type=int, help="Largest t-exponent (verify-local)")
    group.add_argument("--cases", type=int, help="Random cases per prime (verify-local)")
    group.add_argument("--eps", type=float, help="Small-t exponent loss (decay-report)")
    group.add_argument("--x", help="Comma-separated X values (compare-sigma, eval-main-rhs)")
    group.add_argument("--budget", type=float, help="Enumeration budget")
    group.add_argument("--trunc-gamma", type=int, help="Dual gamma radius")
    group.add_argument("--trunc-c", type=int, help="Largest c in the main-theorem sum")
    return parser


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Translate subcommand flags into configuration overrides."""
    overrides: Dict[str, Any] = {}

    def put(section: str, key: str, value: Any) -> None:
        overrides.setdefault(section, {})[key] = value

    if args.q:
        put("delta", "q_values", _csv_list(args.q))
    if args.mmax is not None:
        put("delta", "m_max", args.mmax)
    if args.s_places:
        put("delta", "s_places", args.s_places)
    if args.p:
        primes = _csv_list(args.p, int)
        put("local", "primes", primes)
        put("local", "zeta_primes", primes)
    if args.n is not None:
        put("local", "t_exps", list(range(1, args.n + 1)))
        put("local", "extra_cases", [])
    if args.cases is not None:
        put("local", "cases", args.cases)
    if args.eps is not None:
        put("decay", "eps", args.eps)
    if args.x:
        put("sigma", "x_values", _csv_list(args.x))
    if args.budget is not None:
        put("budgets", "enumeration", args.budget)
    if args.trunc_gamma is not None:
        put("sigma", "trunc_gamma", args.trunc_gamma)
    if args.trunc_c is not None:
        put("sigma", "trunc_c", args.trunc_c)
    if args.seed is not None:
        overrides["seed"] = args.seed
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_global_logging(logging.DEBUG if args.verbose else logging.INFO, args.log_dir)

    failures: List[str] = []
    error_handler.register_callback("check_failed", lambda message, severity, details: failures.append(message))

    try:
        config = ConfigService(args.config)
        params: Dict[str, Any] = {}
        if args.params:
            try:
                params = RunConfig.load_params(args.params)
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigurationError(f"cannot read parameter file {args.params}: {e}") from e
            config.apply_overrides(params)
        config.apply_overrides(collect_overrides(args))
        run_config = RunConfig(Subcommand.from_code(args.subcommand), params, args.out, args.csv_dir,
                               args.workers, args.seed, args.verbose, args.config)
        runner = VerificationRunner(config, workers=config.get_workers(args.workers))
        status, report = runner.run(run_config)
        if report.first_failure is not None:
            error_handler.handle_error("check_failed", report.first_failure.name, ErrorSeverity.ERROR,
                                       report.first_failure.statement)
        return status
    except KeyboardInterrupt:
        logger.warning("Run cancelled by user")
        return 4
    except Exception as e:
        return error_handler.handle_exception(e)


if __name__ == "__main__":
    sys.exit(main())
