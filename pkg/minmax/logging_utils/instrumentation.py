"""Logfire instrumentation helpers."""

from __future__ import annotations

import logfire

from ..config import settings

_LOGFIRE_READY = False


def _configure_logfire() -> None:
    """Configure Logfire without writing to standard output."""

    logfire.configure(
        token=settings.logfire_token,
        send_to_logfire="if-token-present",
        console=False,
        service_name="normal-minmax",
    )


def ensure_logfire() -> None:
    """Initialize Logfire once for the process."""

    global _LOGFIRE_READY
    if not _LOGFIRE_READY:
        _configure_logfire()
        _LOGFIRE_READY = True


__all__ = ["ensure_logfire"]
