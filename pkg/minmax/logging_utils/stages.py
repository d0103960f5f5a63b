"""Per-stage timing for pipeline runs, mirrored into Logfire spans."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator

import logfire

logger = logging.getLogger(__name__)


class StageRecorder:
    """Collects wall-clock durations of named pipeline stages."""

    def __init__(self, run_name: str) -> None:
        self._run_name = run_name
        self._timings: Dict[str, float] = {}

    @property
    def run_name(self) -> str:
        """Return the label attached to every span of this run."""

        return self._run_name

    @contextmanager
    def stage(self, name: str, **attributes: Any) -> Iterator[None]:
        """Time a stage and wrap it in a span carrying the run label."""

        started = time.perf_counter()
        try:
            with logfire.span(
                "{run} stage {stage}", run=self._run_name, stage=name, **attributes
            ):
                yield
        finally:
            elapsed_ms = (time.perf_counter() - started) * 1000.0
            self._timings[name] = self._timings.get(name, 0.0) + elapsed_ms
            logger.debug("%s: stage %s took %.3f ms", self._run_name, name, elapsed_ms)

    def timings(self) -> Dict[str, float]:
        """Return a copy of the accumulated stage durations in milliseconds."""

        return dict(self._timings)


__all__ = ["StageRecorder"]
