"""
Tests for the command-line surface: run configuration, argument parsing and
end-to-end runs with their exit codes.
"""
import json
import os
import sys

import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from main import build_parser, collect_overrides, main
from models.run_config import RunConfig, Subcommand
from services.report_service import ReportService


class TestRunConfig:
    def test_subcommand_codes(self):
        assert len(Subcommand.codes()) == 7
        assert Subcommand.from_code("compare-sigma") is Subcommand.COMPARE_SIGMA
        with pytest.raises(ValueError):
            Subcommand.from_code("verify-everything")

    def test_validate(self):
        assert RunConfig(Subcommand.VERIFY_DELTA).validate()[0]
        valid, errors = RunConfig(Subcommand.VERIFY_DELTA, workers=0).validate()
        assert not valid
        assert errors == ["workers must be positive"]

    def test_round_trip(self):
        run = RunConfig(Subcommand.VERIFY_ZETA, {"seed": 2}, out="r.json", seed=2)
        assert RunConfig.from_dict(run.to_dict()).to_dict() == run.to_dict()


class TestParser:
    """Flags become configuration overrides."""

    def setup_method(self):
        self.parser = build_parser()

    def test_local_flags(self):
        args = self.parser.parse_args(["verify-local", "--p", "3,5", "--n", "2", "--cases", "7"])
        overrides = collect_overrides(args)
        assert overrides["local"]["primes"] == [3, 5]
        assert overrides["local"]["zeta_primes"] == [3, 5]
        assert overrides["local"]["t_exps"] == [1, 2]
        assert overrides["local"]["extra_cases"] == []
        assert overrides["local"]["cases"] == 7

    def test_delta_and_sigma_flags(self):
        args = self.parser.parse_args(["compare-sigma", "--q", "30,60", "--x", "50", "--trunc-gamma", "2",
                                       "--seed", "9"])
        overrides = collect_overrides(args)
        assert overrides["delta"]["q_values"] == [30.0, 60.0]
        assert overrides["sigma"] == {"x_values": [50.0], "trunc_gamma": 2}
        assert overrides["seed"] == 9

    def test_places_and_eps(self):
        args = self.parser.parse_args(["verify-delta", "--s-places", "inf,2"])
        assert collect_overrides(args) == {"delta": {"s_places": "inf,2"}}
        args = self.parser.parse_args(["decay-report", "--eps", "0.25"])
        assert collect_overrides(args) == {"decay": {"eps": 0.25}}

    def test_every_flag_registered_once(self):
        flags = [opt for action in self.parser._actions for opt in action.option_strings]
        assert len(flags) == len(set(flags))
        assert "--s-places" in flags and "--eps" in flags

    def test_no_flags(self):
        assert collect_overrides(self.parser.parse_args(["verify-delta"])) == {}

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            self.parser.parse_args(["verify-everything"])


class TestEndToEnd:
    """Full runs through main()."""

    def test_verify_delta(self, tmp_path):
        out = tmp_path / "r.json"
        status = main(["verify-delta", "--config", str(tmp_path / "config.json"), "--out", str(out),
                       "--q", "30", "--mmax", "50", "--csv", str(tmp_path / "csv"),
                       "--log-dir", str(tmp_path / "logs")])
        assert status == 0
        report = ReportService.read_json(str(out))
        assert report.passed
        assert report.config["delta"]["q_values"] == [30.0]
        assert os.path.exists(tmp_path / "csv" / "verify-delta_c_Q.csv")
        assert os.listdir(tmp_path / "logs")

    def test_params_file(self, tmp_path):
        params = tmp_path / "params.json"
        params.write_text(json.dumps({"delta": {"q_values": [25], "m_max": 20}}), encoding="utf-8")
        out = tmp_path / "r.json"
        status = main(["verify-delta", "--config", str(tmp_path / "config.json"), "--params", str(params),
                       "--out", str(out)])
        assert status == 0
        assert ReportService.read_json(str(out)).config["delta"]["m_max"] == 20

    def test_missing_params_file(self, tmp_path):
        status = main(["verify-delta", "--config", str(tmp_path / "config.json"),
                       "--params", str(tmp_path / "missing.json")])
        assert status == 2

    def test_bad_worker_count(self, tmp_path):
        status = main(["verify-delta", "--config", str(tmp_path / "config.json"), "--workers", "0"])
        assert status == 2

    def test_sample_parameter_file(self, tmp_path):
        """The generated skeleton is a valid parameter file for the runner."""
        from models.geometric import SigmaParams
        from services.config_service import ConfigService
        from tools.generate_sample_config import sample_parameters

        params = sample_parameters(50.0)
        assert SigmaParams.from_dict(dict(params["sigma"]["params"], X=50.0)) == SigmaParams.default(50.0)
        config = ConfigService(str(tmp_path / "config.json"))
        config.apply_overrides(params)
        assert config.get("sigma.x_values") == [50.0, 100.0]

    def test_unconverged_main_theorem_fails(self, tmp_path):
        """An empty gamma truncation cannot bound the tail, so the asserted comparison fails."""
        out = tmp_path / "r.json"
        status = main(["eval-main-rhs", "--config", str(tmp_path / "config.json"), "--x", "8",
                       "--trunc-gamma", "0", "--out", str(out)])
        assert status == 1
        report = ReportService.read_json(str(out))
        check = next(c for c in report.checks if c.name == "main_theorem_rhs_X8")
        assert check.asserted
        assert not check.passed
        assert check.details["converged"] is False
        assert not report.passed

    def test_budget_exceeded(self, tmp_path):
        status = main(["verify-vanishing", "--config", str(tmp_path / "config.json"), "--budget", "10",
                       "--out", str(tmp_path / "r.json")])
        assert status == 3


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
