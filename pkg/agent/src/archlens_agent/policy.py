"""Selection rules deciding which functions the agent wraps."""

from __future__ import annotations

import fnmatch
import json
from dataclasses import dataclass
from pathlib import Path


class PolicyError(ValueError):
    """An instrumentation policy is malformed."""


def _check_prefix(text: str) -> None:
    if not text or not all(part.isidentifier() for part in text.split(".")):
        raise PolicyError(f"module prefix {text!r} is not a dotted name")


@dataclass(frozen=True)
class InstrumentationPolicy:
    include_module_prefixes: tuple[str, ...] = ()
    exclude_name_patterns: tuple[str, ...] = ()
    max_depth: int | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "include_module_prefixes", tuple(self.include_module_prefixes)
        )
        object.__setattr__(
            self, "exclude_name_patterns", tuple(self.exclude_name_patterns)
        )
        for prefix in self.include_module_prefixes:
            _check_prefix(prefix)
        for pattern in self.exclude_name_patterns:
            if not isinstance(pattern, str) or not pattern:
                raise PolicyError(f"exclude pattern {pattern!r} must be a string")
        if self.max_depth is not None and self.max_depth < 1:
            raise PolicyError("max_depth must be at least 1 when given")

    def covers_module(self, module_name: str) -> bool:
        return any(
            module_name == p or module_name.startswith(p + ".")
            for p in self.include_module_prefixes
        )

    def excludes_name(self, name: str) -> bool:
        return any(
            fnmatch.fnmatchcase(name, pattern)
            for pattern in self.exclude_name_patterns
        )

    @classmethod
    def from_file(cls, path: Path | str) -> "InstrumentationPolicy":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise PolicyError(f"policy file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise PolicyError(f"policy file {path} must hold a JSON object")
        known = {"include_module_prefixes", "exclude_name_patterns", "max_depth"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise PolicyError(f"unknown policy key(s): {', '.join(unknown)}")
        for key in ("include_module_prefixes", "exclude_name_patterns"):
            value = data.get(key, [])
            if not isinstance(value, list):
                raise PolicyError(f"{key} must be a list")
        return cls(
            include_module_prefixes=tuple(data.get("include_module_prefixes", [])),
            exclude_name_patterns=tuple(data.get("exclude_name_patterns", [])),
            max_depth=data.get("max_depth"),
        )
