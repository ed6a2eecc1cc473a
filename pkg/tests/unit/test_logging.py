"""
Tests for structured logging helpers and seed derivation.
"""

import json
import logging
import sys

import numpy as np
import pytest

from selab.core.logger_manager import LabJsonFormatter, get_logging_config, log_execution_time, log_phase
from selab.core.seeding import derive_seed, phase_rng


class TestJsonFormatter:
    """LabJsonFormatter output"""

    def _record(self, **kwargs):
        return logging.LogRecord("selab.test", logging.WARNING, __file__, 12, "hello %s", ("world",), None, **kwargs)

    def test_standard_fields(self):
        formatter = LabJsonFormatter("%(message)s")
        doc = json.loads(formatter.format(self._record()))
        assert doc["message"] == "hello world"
        assert doc["level"] == "WARNING"
        assert doc["logger"] == "selab.test"
        assert doc["source"]["line"] == 12
        assert "timestamp" in doc
        assert "pathname" not in doc

    def test_extra_fields_are_flattened(self):
        record = self._record()
        record.extra_fields = {"phase": "tree", "seed": 3}
        doc = json.loads(LabJsonFormatter("%(message)s").format(record))
        assert doc["phase"] == "tree"
        assert doc["seed"] == 3
        assert "extra_fields" not in doc

    def test_exception_details(self):
        try:
            raise ValueError("boom")
        except ValueError:
            record = logging.LogRecord(
                "selab.test", logging.ERROR, __file__, 1, "failed", (), sys.exc_info()
            )
        doc = json.loads(LabJsonFormatter("%(message)s").format(record))
        assert doc["exception"]["type"] == "ValueError"
        assert doc["exception"]["message"] == "boom"

    def test_config_switches_formatter(self):
        assert get_logging_config("DEBUG", json_format=False)["handlers"]["default"]["formatter"] == "console"
        config = get_logging_config("INFO")
        assert config["handlers"]["default"]["formatter"] == "json"
        assert config["loggers"]["selab"]["propagate"] is False


class TestLogHelpers:
    """log_execution_time and log_phase"""

    def test_execution_time_success(self, caplog):
        log = logging.getLogger("tests.timing")

        @log_execution_time(log)
        def add(a, b):
            return a + b

        with caplog.at_level(logging.DEBUG, logger="tests.timing"):
            assert add(2, 3) == 5
        record = caplog.records[-1]
        assert record.status == "success"
        assert record.function == "add"
        assert record.duration_ms >= 0.0

    def test_execution_time_failure(self, caplog):
        log = logging.getLogger("tests.timing")

        @log_execution_time(log)
        def broken():
            raise KeyError("x")

        with caplog.at_level(logging.DEBUG, logger="tests.timing"), pytest.raises(KeyError):
            broken()
        record = caplog.records[-1]
        assert record.levelno == logging.ERROR
        assert record.error_type == "KeyError"

    @pytest.mark.parametrize("status,level", [("success", logging.INFO), ("failed", logging.ERROR)])
    def test_log_phase(self, caplog, status, level):
        log = logging.getLogger("tests.phase")
        with caplog.at_level(logging.DEBUG, logger="tests.phase"):
            log_phase(log, "attack", status, duration_ms=4.2, seed=7)
        record = caplog.records[-1]
        assert record.levelno == level
        assert record.extra_fields == {
            "event": "phase",
            "phase": "attack",
            "status": status,
            "seed": 7,
            "duration_ms": 4.2,
        }


class TestSeeding:
    """Per-phase seed derivation"""

    def test_stable_and_distinct(self):
        assert derive_seed(0, "attack") == derive_seed(0, "attack")
        assert derive_seed(0, "attack") != derive_seed(0, "baseline")
        assert derive_seed(0, "attack", "p1") != derive_seed(0, "attack", "p2")
        assert derive_seed(1, "attack") != derive_seed(0, "attack")
        assert 0 <= derive_seed(123, "data") < 2**63

    def test_phase_rng_replays(self):
        a = phase_rng(5, "dice", "p0").random(4)
        b = phase_rng(5, "dice", "p0").random(4)
        np.testing.assert_array_equal(a, b)
