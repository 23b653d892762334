"""Run report: the audit trail for everything a stage skipped or could not resolve.

Stages never guess silently. Unresolved call sites, skipped files, quarantined
traces, and name collisions all land here as categorized entries so a run can
be judged afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

# Call-resolution outcomes (static analyzer).
SHADOWED_BY_LOCAL = "shadowed-by-local"
UNRESOLVED_ATTRIBUTE = "unresolved-attribute"
UNRESOLVED_QUALIFIED = "unresolved-qualified"
AMBIGUOUS_BARE_NAME = "ambiguous-bare-name"
UNDEFINED_BARE_NAME = "undefined-bare-name"
BUILTIN_CALL = "builtin"
UNSUPPORTED_CALLEE = "unsupported-callee-expression"
CLASS_NO_INIT = "class-instantiation-no-init"
MODULE_LEVEL_CALL = "module-level-call"
DATAFLOW_SKIPPED = "dataflow-skipped"

# Structural bookkeeping.
PARSE_FAILURE = "parse-failure"
EMPTY_SOURCE_SET = "empty-source-set"
STAR_IMPORT = "star-import"
CONDITIONAL_IMPORT = "conditional-import"

# Trace ingest.
MALFORMED_LINE = "malformed-line"
QUARANTINED_TRACE = "quarantined-trace"

# Merge.
NAME_COLLISION = "name-collision"

# Pipeline.
STAGE_SKIPPED = "stage-skipped"
STAGE_FAILED = "stage-failed"


@dataclass(frozen=True)
class ReportEntry:
    category: str
    subject: str
    detail: str = ""


class RunReport:
    """Ordered, deduplicated collection of report entries."""

    def __init__(self, entries: list[ReportEntry] | None = None):
        self.entries: list[ReportEntry] = []
        self._seen: set[ReportEntry] = set()
        for entry in entries or []:
            self._append(entry)

    def _append(self, entry: ReportEntry) -> None:
        if entry not in self._seen:
            self._seen.add(entry)
            self.entries.append(entry)

    def add(self, category: str, subject: str, detail: str = "") -> None:
        self._append(ReportEntry(category, subject, detail))

    def extend(self, other: "RunReport") -> None:
        for entry in other.entries:
            self._append(entry)

    def entries_for(self, category: str) -> list[ReportEntry]:
        return [e for e in self.entries if e.category == category]

    def count(self, category: str | None = None) -> int:
        if category is None:
            return len(self.entries)
        return len(self.entries_for(category))

    def to_json_text(self) -> str:
        # Sorted for reproducible artifacts; insertion order is a debugging aid only.
        rows = sorted(
            (e.category, e.subject, e.detail) for e in self.entries
        )
        payload = [
            {"category": c, "subject": s, "detail": d} for c, s, d in rows
        ]
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_text(cls, text: str) -> "RunReport":
        rows = json.loads(text)
        report = cls()
        for row in rows:
            report.add(row["category"], row["subject"], row.get("detail", ""))
        return report
