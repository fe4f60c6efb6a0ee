"""
Tests for the configuration service, error handling and the service container.
"""
import json
import os
import sys

import pytest

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from services.config_service import DEFAULT_CONFIG, WORKERS_ENV, ConfigService
from services.error_handler import (
    BudgetExceededError, CheckFailedError, ConfigurationError, ErrorHandler, ErrorSeverity,
    PreconditionError, QTooSmallError,
)
from services.service_container import ServiceContainer


class TestConfigService:
    """Defaults, overrides and the worker count."""

    def test_defaults_created(self, tmp_path):
        path = tmp_path / "config.json"
        config = ConfigService(str(path))
        assert path.exists()
        assert config.get("delta.q_values") == [30, 60, 120]
        assert config.get("delta.missing", "fallback") == "fallback"

    def test_file_merged_over_defaults(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"delta": {"m_max": 10}}), encoding="utf-8")
        config = ConfigService(str(path))
        assert config.get("delta.m_max") == 10
        assert config.get("delta.q_values") == DEFAULT_CONFIG["delta"]["q_values"]

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            ConfigService(str(path))

    def test_overrides(self, tmp_path):
        config = ConfigService(str(tmp_path / "config.json"))
        config.apply_overrides({"local": {"primes": [11]}, "seed": 3})
        assert config.get("local.primes") == [11]
        assert config.get("local.cases") == 50
        assert config.get("seed") == 3
        with pytest.raises(ConfigurationError):
            config.apply_overrides([1, 2])

    def test_overrides_not_saved(self, tmp_path):
        path = tmp_path / "config.json"
        config = ConfigService(str(path))
        config.apply_overrides({"seed": 3})
        assert ConfigService(str(path)).get("seed") == DEFAULT_CONFIG["seed"]

    def test_workers(self, tmp_path, monkeypatch):
        config = ConfigService(str(tmp_path / "config.json"))
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert config.get_workers() == 1
        monkeypatch.setenv(WORKERS_ENV, "4")
        assert config.get_workers() == 4
        assert config.get_workers(2) == 2
        monkeypatch.setenv(WORKERS_ENV, "x")
        with pytest.raises(ConfigurationError):
            config.get_workers()
        with pytest.raises(ConfigurationError):
            config.get_workers(0)


class TestErrorHandler:
    """Exit codes and callbacks."""

    def setup_method(self):
        self.handler = ErrorHandler()

    @pytest.mark.parametrize("exc, code", [
        (CheckFailedError("name", "statement"), 1),
        (ConfigurationError("bad"), 2),
        (PreconditionError("outside"), 2),
        (QTooSmallError("empty window"), 2),
        (BudgetExceededError("walk", 2, 1), 3),
        (ValueError("boom"), 4),
    ])
    def test_exit_codes(self, exc, code):
        assert self.handler.handle_exception(exc) == code

    def test_callbacks(self):
        received = []
        self.handler.register_callback("check_failed", lambda *args: received.append(args))
        self.handler.handle_exception(CheckFailedError("delta_exactness", "delta(m) = 1[m = 0]", "m=3"))
        message, severity, details = received[0]
        assert "delta_exactness failed" in message
        assert severity is ErrorSeverity.ERROR
        assert details == "delta(m) = 1[m = 0]"
        assert self.handler.history[0][0] == "check_failed"

    def test_budget_message(self):
        exc = BudgetExceededError("walk", 2e9, 1e8)
        assert "exceeds budget" in str(exc)
        assert exc.requested == 2e9


class TestServiceContainer:
    def test_register_and_get(self):
        container = ServiceContainer()
        handler = ErrorHandler()
        container.register(ErrorHandler, handler)
        assert container.has(ErrorHandler)
        assert container.get(ErrorHandler) is handler
        container.clear()
        with pytest.raises(KeyError):
            container.get(ErrorHandler)

    def test_get_or_create(self):
        container = ServiceContainer()
        first = container.get_or_create(ErrorHandler, ErrorHandler)
        assert container.get_or_create(ErrorHandler, ErrorHandler) is first

    def test_factory_runs_once_on_first_get(self):
        container = ServiceContainer()
        calls = []
        container.register_factory(ErrorHandler, lambda: calls.append(1) or ErrorHandler())
        assert container.has(ErrorHandler)
        assert calls == []
        assert container.get(ErrorHandler) is container.get(ErrorHandler)
        assert calls == [1]


class TestDecayConfiguration:
    """The decay-report defaults: the identity ray and a bump around its stationary set."""

    def test_defaults(self, tmp_path):
        config = ConfigService(str(tmp_path / "config.json"))
        assert config.get("decay.gamma0") == [[1.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0]]
        assert config.get("decay.gaussian_scale") is None

    def test_test_function(self, tmp_path):
        from services.verification_runner import VerificationRunner

        runner = VerificationRunner(ConfigService(str(tmp_path / "config.json")), workers=1)
        lo, hi = runner._decay_function().box
        assert lo.tolist() == [1.5, -0.5, -0.5, 1.5, -2.5, -0.5, -0.5, -2.5]
        assert hi.tolist() == [2.5, 0.5, 0.5, 2.5, -1.5, 0.5, 0.5, -1.5]

    def test_bad_test_function(self, tmp_path):
        from services.verification_runner import VerificationRunner

        config = ConfigService(str(tmp_path / "config.json"))
        config.apply_overrides({"decay": {"test_function": {"diag": [[1.0]]}}})
        with pytest.raises(ConfigurationError):
            VerificationRunner(config, workers=1)._decay_function()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
