"""Dotted qualified names, the identity currency of every pipeline stage."""

from __future__ import annotations

import re
from dataclasses import dataclass

from archlens.errors import QualifiedNameError

_SEGMENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Runtime call-tree roots have no recorded caller. They are attached to a
# reserved component whose spelling cannot collide with a real Python
# identifier chain; it is the single allowed exception to the segment grammar.
UNKNOWN_COMPONENT = "++ unknown component ++"
UNKNOWN_ENTRY_SEGMENT = "entry"


@dataclass(frozen=True)
class QualifiedName:
    """A non-empty chain of identifier segments, canonically dot-joined."""

    parts: tuple[str, ...]

    def __post_init__(self):
        if not self.parts:
            raise QualifiedNameError("qualified name needs at least one segment")
        for index, segment in enumerate(self.parts):
            if segment == UNKNOWN_COMPONENT:
                continue
            if not segment:
                raise QualifiedNameError(f"empty segment at index {index}")
            if not _SEGMENT_RE.match(segment):
                raise QualifiedNameError(
                    f"illegal segment {segment!r} at index {index}"
                )

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        if not text:
            raise QualifiedNameError("cannot parse an empty string")
        segments = text.split(".")
        for index, segment in enumerate(segments):
            if segment == UNKNOWN_COMPONENT:
                continue
            if not segment:
                raise QualifiedNameError(
                    f"empty segment at index {index} in {text!r}"
                )
            if not _SEGMENT_RE.match(segment):
                raise QualifiedNameError(
                    f"illegal segment {segment!r} at index {index} in {text!r}"
                )
        return cls(tuple(segments))

    @property
    def text(self) -> str:
        return ".".join(self.parts)

    @property
    def parent(self) -> "QualifiedName | None":
        if len(self.parts) == 1:
            return None
        return QualifiedName(self.parts[:-1])

    @property
    def last(self) -> str:
        return self.parts[-1]

    def child(self, segment: str) -> "QualifiedName":
        return QualifiedName(self.parts + (segment,))

    def is_strict_prefix_of(self, other: "QualifiedName") -> bool:
        return (
            len(self.parts) < len(other.parts)
            and other.parts[: len(self.parts)] == self.parts
        )

    def starts_with(self, prefix: "QualifiedName") -> bool:
        return self.parts[: len(prefix.parts)] == prefix.parts

    @property
    def is_synthetic(self) -> bool:
        return self.parts[0] == UNKNOWN_COMPONENT

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"QualifiedName({self.text!r})"

    # Canonical model order is lexicographic on the dotted text, which also
    # sorts the synthetic component first ("+" < any identifier character).
    def __lt__(self, other: "QualifiedName") -> bool:
        return self.text < other.text

    def __le__(self, other: "QualifiedName") -> bool:
        return self.text <= other.text


def qualified_name_parse(text: str) -> QualifiedName:
    """Parse a dotted name; raises QualifiedNameError naming the bad segment."""
    return QualifiedName.parse(text)


SYNTHETIC_COMPONENT_NAME = QualifiedName((UNKNOWN_COMPONENT,))
SYNTHETIC_ENTRY_SIGNATURE = SYNTHETIC_COMPONENT_NAME.child(UNKNOWN_ENTRY_SEGMENT)
