"""Configuration helpers for the minimax toolkit."""

from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

# Load .env if present to simplify local experimentation.
load_dotenv()

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    """Holds numeric defaults and runtime options derived from the environment."""

    gap_tol: float
    max_iter: int
    weight_floor: float
    solver_restarts: int
    active_tol: float
    cond_tol: float
    trials: int
    polish_steps: int
    seed: int
    log_level: str
    logfire_token: str | None

    @property
    def realness_tol(self) -> float:
        """Absolute bound on imaginary parts of real-mode worst-case vectors."""

        return 1e-10

    @property
    def attainment_tol(self) -> float:
        """Relative tolerance of the max-min/min-max equality check."""

        return 1e-8


def _int_from_env(key: str, default: int, *, minimum: int = 1) -> int:
    """Parse an integer from the environment, enforcing a lower bound."""

    raw_value = os.getenv(key)
    if raw_value is None:
        return default

    try:
        value = int(raw_value)
    except ValueError as exc:
        raise RuntimeError(f"Environment variable '{key}' must be an integer") from exc

    if value < minimum:
        raise RuntimeError(f"Environment variable '{key}' must be at least {minimum}")

    return value


def _float_from_env(key: str, default: float) -> float:
    """Parse a strictly positive floating-point value from the environment."""

    raw_value = os.getenv(key)
    if raw_value is None:
        return default

    try:
        value = float(raw_value)
    except ValueError as exc:
        raise RuntimeError(
            f"Environment variable '{key}' must be a floating-point number"
        ) from exc

    if not value > 0.0 or value == float("inf"):
        raise RuntimeError(f"Environment variable '{key}' must be positive and finite")

    return value


def _log_level_from_env(key: str, default: str) -> str:
    """Return a validated logging level name."""

    value = os.getenv(key, default).strip().upper()
    if value not in _LOG_LEVELS:
        raise RuntimeError(
            f"Environment variable '{key}' must be one of {', '.join(_LOG_LEVELS)}"
        )
    return value


def get_settings() -> Settings:
    """Create settings populated from the environment."""

    return Settings(
        gap_tol=_float_from_env("MINMAX_GAP_TOL", 1e-10),
        max_iter=_int_from_env("MINMAX_MAX_ITER", 100_000),
        weight_floor=_float_from_env("MINMAX_WEIGHT_FLOOR", 1e-300),
        solver_restarts=_int_from_env("MINMAX_SOLVER_RESTARTS", 1, minimum=0),
        active_tol=_float_from_env("MINMAX_ACTIVE_TOL", 1e-8),
        cond_tol=_float_from_env("MINMAX_COND_TOL", 1e-8),
        trials=_int_from_env("MINMAX_TRIALS", 1000, minimum=0),
        polish_steps=_int_from_env("MINMAX_POLISH_STEPS", 100, minimum=0),
        seed=_int_from_env("MINMAX_SEED", 0, minimum=0),
        log_level=_log_level_from_env("MINMAX_LOG_LEVEL", "WARNING"),
        logfire_token=os.getenv("LOGFIRE_TOKEN") or None,
    )


settings = get_settings()


__all__ = ["Settings", "get_settings", "settings"]
