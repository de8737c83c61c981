"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["SchemaError", "GenerationFailed"]


class SchemaError(ValueError):
    """A file or message violated its schema. Carries the offending path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class GenerationFailed(RuntimeError):
    """A persona-infusion stage gave up after exhausting retries.

    Carries the stage name and the transcript of (prompt, reply) attempts so
    failed generation jobs can be diagnosed offline.
    """

    def __init__(self, stage: str, reason: str, transcript: list[tuple[str, str]] | None = None):
        self.stage = stage
        self.reason = reason
        self.transcript = transcript or []
        super().__init__(f"{stage}: {reason}")
