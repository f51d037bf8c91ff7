"""
Tests for configuration loading and precedence
"""

import pytest

from revealed_bai.config import Settings, load_grid, parse_grid, resolve_cell, resolve_cells
from revealed_bai.exceptions import ConfigurationError, InvalidDelta
from revealed_bai.user_model import ConstantRho

GRID = """{
  "cells": [
    {"delta": 0.1, "k": 2, "seed": 7},
    {"delta": 0.05, "k": 5, "algos": ["bair", "uni"], "rho": "constant:1.5"}
  ]
}"""


class TestParseGrid:
    """Test suite for JSON grids."""

    def test_keys_mapped(self):
        """Test grid keys map onto cell fields."""
        entries = parse_grid(GRID)
        assert entries[0] == {"delta": 0.1, "n_arms": 2, "master_seed": 7}
        assert entries[1]["algorithms"] == ["bair", "uni"]

    def test_warm_start_key(self):
        """Test the Track-and-Stop warm-start switch is a grid key."""
        entries = parse_grid('{"cells": [{"delta": 0.1, "k": 2, "shared_phase1": true, "ts_warm_start": true}]}')
        assert entries[0]["ts_warm_start"] is True

    def test_malformed_json(self):
        """Test syntax errors report line and column."""
        with pytest.raises(ConfigurationError, match="line 2 column"):
            parse_grid('{"cells": [\n{"delta": 0.1,, "k": 2}]}', source="grid.json")

    def test_unknown_key(self):
        """Test unknown cell keys are rejected with the valid list."""
        with pytest.raises(ConfigurationError, match="unknown key"):
            parse_grid('{"cells": [{"delta": 0.1, "k": 2, "arms": 3}]}')

    def test_missing_key(self):
        """Test delta and k are required."""
        with pytest.raises(ConfigurationError, match="lacks"):
            parse_grid('{"cells": [{"delta": 0.1}]}')

    def test_empty(self):
        """Test an empty cell list is rejected."""
        with pytest.raises(ConfigurationError):
            parse_grid('{"cells": []}')

    def test_load_missing_file(self, tmp_path):
        """Test unreadable files are configuration errors."""
        with pytest.raises(ConfigurationError):
            load_grid(tmp_path / "absent.json")

    def test_load_file(self, tmp_path):
        """Test grids load from disk."""
        path = tmp_path / "grid.json"
        path.write_text(GRID)
        assert len(load_grid(path)) == 2


class TestPrecedence:
    """Test suite for flags > config > environment."""

    def test_flag_wins(self):
        """Test a flag overrides the config entry and the environment."""
        cell = resolve_cell({"delta": 0.1, "n_arms": 2, "master_seed": 7}, Settings(seed=5), {"master_seed": 9})
        assert cell.master_seed == 9

    def test_config_over_environment(self):
        """Test a config value overrides the environment; None flags are absent."""
        cell = resolve_cell({"delta": 0.1, "n_arms": 2, "master_seed": 7}, Settings(seed=5), {"master_seed": None})
        assert cell.master_seed == 7

    def test_environment_default(self):
        """Test the environment fills unset fields."""
        cell = resolve_cell({"delta": 0.1, "n_arms": 2}, Settings(seed=5, reps=40))
        assert (cell.master_seed, cell.replications) == (5, 40)

    def test_resolved_grid(self):
        """Test a parsed grid resolves into validated cells."""
        cells = resolve_cells(parse_grid(GRID), Settings())
        assert cells[1].algorithms == ("bair", "uni")
        assert cells[1].rho_policy == ConstantRho(1.5)

    def test_invalid_value(self):
        """Test cell validation errors surface."""
        with pytest.raises(InvalidDelta):
            resolve_cell({"delta": 2.0, "n_arms": 2}, Settings())


class TestSettings:
    """Test suite for environment settings."""

    def test_dotenv_file(self, tmp_path, monkeypatch):
        """Test values come from a .env file unless already set."""
        for name in ("REVBAI_SEED", "REVBAI_REPS", "REVBAI_LOG_LEVEL"):
            monkeypatch.setenv(name, "")
            monkeypatch.delenv(name)
        monkeypatch.setenv("REVBAI_SEED", "3")
        dotenv = tmp_path / ".env"
        dotenv.write_text("REVBAI_SEED=11\nREVBAI_REPS=50\nREVBAI_LOG_LEVEL=info\n")
        settings = Settings.from_env(dotenv)
        assert settings.seed == 3
        assert settings.reps == 50
        assert settings.log_level == "INFO"

    def test_bad_integer(self, monkeypatch):
        """Test non-integer values are configuration errors."""
        monkeypatch.setenv("REVBAI_THREADS", "many")
        with pytest.raises(ConfigurationError):
            Settings.from_env("/nonexistent/.env")
