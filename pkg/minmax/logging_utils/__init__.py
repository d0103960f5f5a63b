"""Utilities for instrumentation and stage timing."""

from .instrumentation import ensure_logfire
from .stages import StageRecorder

__all__ = ["StageRecorder", "ensure_logfire"]
