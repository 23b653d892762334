"""Exception types shared across the toolchain."""

from __future__ import annotations


class ArchLensError(Exception):
    """Base class for all errors raised by this package."""


class QualifiedNameError(ArchLensError):
    """A dotted name failed to parse."""


class ModelValidationError(ArchLensError):
    """An operation was asked to consume a model that violates its invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        summary = "; ".join(self.violations[:5])
        if len(self.violations) > 5:
            summary += f"; ... ({len(self.violations)} violations total)"
        super().__init__(f"invalid architecture model: {summary}")


class ModelFormatError(ArchLensError):
    """Serialized model text is structurally broken (not an invariant issue)."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class TraceFormatError(ArchLensError):
    """A trace log is too malformed to be trusted at all."""


class DotParseError(ArchLensError):
    """DOT text could not be parsed."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ConfigError(ArchLensError):
    """Pipeline configuration (file or flags) is unusable."""
