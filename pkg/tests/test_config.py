"""Tests for environment-driven configuration."""

import pytest

from src.config import Config

ENV_VARS = [
    "BUNDLE_DATA_DIR",
    "BUNDLE_LOG_LEVEL",
    "BUNDLE_AUT_VERTEX_CAP",
    "BUNDLE_AUT_ORDER_CAP",
    "BUNDLE_FRAME_DEGREE_CAP",
    "BUNDLE_BFS_STATE_CAP",
    "BUNDLE_COUNT_MAX_LENGTH",
    "BUNDLE_RICCI_READING",
    "BUNDLE_LEDGER_ENABLED",
]


@pytest.fixture
def clean_env(monkeypatch):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestConfig:
    def test_defaults(self, clean_env):
        config = Config.from_env()
        assert config == Config()
        assert config.count_max_length == 16
        assert config.aut_order_cap == 3628800
        assert config.ricci_reading == "per-index"
        assert config.ledger_enabled

    def test_overrides(self, clean_env):
        clean_env.setenv("BUNDLE_DATA_DIR", "/tmp/bundles")
        clean_env.setenv("BUNDLE_AUT_VERTEX_CAP", "32")
        clean_env.setenv("BUNDLE_RICCI_READING", "Global")
        clean_env.setenv("BUNDLE_LEDGER_ENABLED", "false")
        clean_env.setenv("BUNDLE_LOG_LEVEL", "debug")
        config = Config.from_env()
        assert config.data_dir == "/tmp/bundles"
        assert config.aut_vertex_cap == 32
        assert config.ricci_reading == "global"
        assert not config.ledger_enabled
        assert config.log_level == "DEBUG"

    @pytest.mark.parametrize(
        "name, value",
        [("BUNDLE_BFS_STATE_CAP", "many"), ("BUNDLE_FRAME_DEGREE_CAP", "0"), ("BUNDLE_RICCI_READING", "loose")],
    )
    def test_invalid_values_exit_with_input_error(self, clean_env, capsys, name, value):
        clean_env.setenv(name, value)
        with pytest.raises(SystemExit) as info:
            Config.from_env()
        assert info.value.code == 2
        assert capsys.readouterr().out.startswith("ERROR:")
