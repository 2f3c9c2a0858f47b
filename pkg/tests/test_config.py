import pytest

from config import DEFAULT_SETTINGS, Config, SettingsManager, check_alpha
from errors import ParameterError


def test_check_alpha():
    assert check_alpha(2) == 2
    assert check_alpha(16) == 16
    for bad in (1, 0, -3, True, 2.5, "4"):
        with pytest.raises(ParameterError):
            check_alpha(bad)
    with pytest.raises(ParameterError, match="at least 2, got 1"):
        check_alpha(1)
    assert check_alpha(2**63 - 1) == 2**63 - 1
    with pytest.raises(ParameterError, match=r"alpha must be in \[2, 2\*\*63\), got 9223372036854775808"):
        check_alpha(2**63)


def test_defaults(monkeypatch):
    for name in ("ALPHA", "FORMAT", "LOG_LEVEL", "VERIFY_SAMPLES", "SEED"):
        monkeypatch.delenv(f"RLMOVE_{name}", raising=False)
    manager = SettingsManager(env_file="/nonexistent/.env")
    assert manager.alpha == DEFAULT_SETTINGS["alpha"] == 4
    assert manager.format == "auto"
    assert manager.log_level == "WARNING"
    assert manager.verify_samples == 4096
    assert manager.seed == 0


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("RLMOVE_ALPHA", "8")
    monkeypatch.setenv("RLMOVE_FORMAT", "Binary")
    monkeypatch.setenv("RLMOVE_LOG_LEVEL", "debug")
    monkeypatch.setenv("RLMOVE_VERIFY_SAMPLES", "10")
    monkeypatch.setenv("RLMOVE_SEED", "99")
    manager = SettingsManager(env_file="/nonexistent/.env")
    assert (manager.alpha, manager.format, manager.log_level) == (8, "binary", "DEBUG")
    assert (manager.verify_samples, manager.seed) == (10, 99)


def test_dotenv_file(tmp_path, monkeypatch):
    # registered first so teardown removes whatever load_dotenv sets
    monkeypatch.setenv("RLMOVE_ALPHA", "2")
    monkeypatch.delenv("RLMOVE_ALPHA")
    env = tmp_path / ".env"
    env.write_text("RLMOVE_ALPHA=16\n")
    manager = SettingsManager(env_file=str(env))
    assert manager.alpha == 16


def test_invalid_overrides_keep_defaults(monkeypatch, caplog):
    monkeypatch.setenv("RLMOVE_ALPHA", "1")
    monkeypatch.setenv("RLMOVE_FORMAT", "yaml")
    monkeypatch.setenv("RLMOVE_VERIFY_SAMPLES", "0")
    manager = SettingsManager(env_file="/nonexistent/.env")
    assert manager.alpha == 4
    assert manager.format == "auto"
    assert manager.verify_samples == 4096
    assert "Invalid alpha" in caplog.text
    messages = [record.getMessage() for record in caplog.records]
    assert not any(message.startswith("Error") for message in messages)


def test_setters_report_success():
    manager = SettingsManager(env_file="/nonexistent/.env")
    assert manager.set_alpha(3)
    assert not manager.set_alpha("x")
    assert manager.set_format("text")
    assert not manager.set_log_level("LOUD")
    assert manager.set_seed("7")
    assert manager.seed == 7


def test_config_validation():
    assert Config(subcommand="build").alpha == 4
    with pytest.raises(ParameterError):
        Config(subcommand="build", alpha=1)
    with pytest.raises(ParameterError):
        Config(subcommand="build", perm="sa")
    with pytest.raises(ParameterError):
        Config(subcommand="lcp", output_format="auto")
    with pytest.raises(ParameterError):
        Config(subcommand="sweep", alphas=(2, 1))
