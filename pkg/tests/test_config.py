"""Tests for environment-driven settings."""

from __future__ import annotations

import pytest

from minmax.config import get_settings


def test_defaults_apply_without_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Unset variables should fall back to the documented defaults."""

    for key in (
        "MINMAX_GAP_TOL",
        "MINMAX_MAX_ITER",
        "MINMAX_TRIALS",
        "MINMAX_SEED",
        "MINMAX_LOG_LEVEL",
        "LOGFIRE_TOKEN",
    ):
        monkeypatch.delenv(key, raising=False)

    settings = get_settings()

    assert settings.gap_tol == 1e-10
    assert settings.max_iter == 100_000
    assert settings.trials == 1000
    assert settings.seed == 0
    assert settings.log_level == "WARNING"
    assert settings.logfire_token is None


def test_environment_overrides_are_parsed(monkeypatch: pytest.MonkeyPatch) -> None:
    """Numeric and level variables should be read from the environment."""

    monkeypatch.setenv("MINMAX_GAP_TOL", "1e-9")
    monkeypatch.setenv("MINMAX_TRIALS", "25")
    monkeypatch.setenv("MINMAX_SOLVER_RESTARTS", "0")
    monkeypatch.setenv("MINMAX_LOG_LEVEL", "debug")

    settings = get_settings()

    assert settings.gap_tol == 1e-9
    assert settings.trials == 25
    assert settings.solver_restarts == 0
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize(
    ("key", "value"),
    [
        ("MINMAX_MAX_ITER", "many"),
        ("MINMAX_MAX_ITER", "0"),
        ("MINMAX_GAP_TOL", "-1"),
        ("MINMAX_COND_TOL", "inf"),
        ("MINMAX_LOG_LEVEL", "LOUD"),
    ],
)
def test_invalid_values_raise(monkeypatch: pytest.MonkeyPatch, key: str, value: str) -> None:
    """Malformed values should fail loudly with the variable name."""

    monkeypatch.setenv(key, value)

    with pytest.raises(RuntimeError, match=key):
        get_settings()
