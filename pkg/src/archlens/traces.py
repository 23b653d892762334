"""Trace-log parsing, execution-trace reconstruction, and the dynamic model.

Wire format, one event per line:

    traceId;orderIndex;depth;signature;entryNs;exitNs;processLabel

Lines starting with `#` are comments, blank lines are ignored. Reconstruction
replays each trace's depth/order sequence against an explicit stack; traces
that violate the stack discipline (crashed runs, gaps) are quarantined whole
rather than contributing corrupt edge counts.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from archlens.errors import QualifiedNameError, TraceFormatError
from archlens.model import (
    ArchitectureModel,
    CallEdge,
    Component,
    ComponentKind,
    OperationEntity,
    Provenance,
)
from archlens.names import (
    SYNTHETIC_COMPONENT_NAME,
    SYNTHETIC_ENTRY_SIGNATURE,
    QualifiedName,
)
from archlens.report import MALFORMED_LINE, QUARANTINED_TRACE, RunReport

# A log where more than this fraction of data lines fail to parse is most
# likely not a trace log at all.
MALFORMED_FRACTION_LIMIT = 0.10


@dataclass(frozen=True)
class TraceEvent:
    trace_id: int
    order_index: int
    depth: int
    signature: QualifiedName
    entry_ns: int
    exit_ns: int
    process_label: str


@dataclass(frozen=True)
class ExecutionTrace:
    trace_id: int
    events: tuple[TraceEvent, ...]

    @property
    def root_count(self) -> int:
        return sum(1 for e in self.events if e.depth == 0)


def _parse_line(line: str) -> TraceEvent:
    fields = line.split(";")
    if len(fields) != 7:
        raise ValueError(f"expected 7 fields, got {len(fields)}")
    trace_id = int(fields[0])
    order_index = int(fields[1])
    depth = int(fields[2])
    signature = QualifiedName.parse(fields[3])
    entry_ns = int(fields[4])
    exit_ns = int(fields[5])
    if order_index < 0:
        raise ValueError("negative orderIndex")
    if depth < 0:
        raise ValueError("negative depth")
    if exit_ns < entry_ns:
        raise ValueError("exitNs before entryNs")
    return TraceEvent(trace_id, order_index, depth, signature, entry_ns, exit_ns, fields[6])


def parse_trace_text(
    text: str, source: str = "<memory>", report: RunReport | None = None
) -> list[TraceEvent]:
    events: list[TraceEvent] = []
    data_lines = 0
    malformed = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        data_lines += 1
        try:
            events.append(_parse_line(line))
        except (ValueError, QualifiedNameError) as exc:
            malformed += 1
            if report is not None:
                report.add(MALFORMED_LINE, f"{source}:{lineno}", str(exc))
    if data_lines and malformed / data_lines > MALFORMED_FRACTION_LIMIT:
        raise TraceFormatError(
            f"{source}: {malformed} of {data_lines} lines malformed; "
            "refusing to trust this file"
        )
    return events


def parse_trace_log(path: Path, report: RunReport | None = None) -> list[TraceEvent]:
    text = Path(path).read_text(encoding="utf-8")
    return parse_trace_text(text, source=str(path), report=report)


def _trace_violation(events: list[TraceEvent]) -> str | None:
    if events[0].depth != 0:
        return f"first event has depth {events[0].depth}, expected 0"
    previous = events[0]
    for event in events[1:]:
        if event.order_index == previous.order_index:
            return f"duplicate orderIndex {event.order_index}"
        if event.depth > previous.depth + 1:
            return (
                f"depth jumps from {previous.depth} to {event.depth} "
                f"at orderIndex {event.order_index}"
            )
        previous = event
    return None


def reconstruct_traces(
    events: list[TraceEvent], report: RunReport | None = None
) -> list[ExecutionTrace]:
    by_id: dict[int, list[TraceEvent]] = defaultdict(list)
    for event in events:
        by_id[event.trace_id].append(event)

    traces: list[ExecutionTrace] = []
    for trace_id in sorted(by_id):
        ordered = sorted(by_id[trace_id], key=lambda e: e.order_index)
        violation = _trace_violation(ordered)
        if violation is not None:
            if report is not None:
                report.add(QUARANTINED_TRACE, str(trace_id), violation)
            continue
        traces.append(ExecutionTrace(trace_id, tuple(ordered)))
    return traces


def trace_call_pairs(
    trace: ExecutionTrace,
) -> list[tuple[QualifiedName | None, QualifiedName]]:
    """Caller/callee pair per event via stack replay; roots pair with None."""
    pairs: list[tuple[QualifiedName | None, QualifiedName]] = []
    stack: list[TraceEvent] = []
    for event in trace.events:
        while stack and stack[-1].depth >= event.depth:
            stack.pop()
        caller = stack[-1].signature if stack else None
        pairs.append((caller, event.signature))
        stack.append(event)
    return pairs


def _owner_of(signature: QualifiedName) -> QualifiedName:
    """Mirror of the static side's ownership: innermost class if the signature
    contains one (uppercase-initial segment), else the module prefix. Bare
    single-segment signatures have no recoverable component and fall back to
    the synthetic one."""
    parts = signature.parts
    upper = [i for i, seg in enumerate(parts[:-1]) if seg[:1].isupper()]
    if upper:
        return QualifiedName(parts[: upper[-1] + 1])
    if len(parts) == 1:
        return SYNTHETIC_COMPONENT_NAME
    return QualifiedName(parts[:-1])


def _component_chain(owner: QualifiedName) -> list[tuple[QualifiedName, ComponentKind]]:
    parts = owner.parts
    upper = [i for i, seg in enumerate(parts) if seg[:1].isupper()]
    first_upper = upper[0] if upper else None
    chain: list[tuple[QualifiedName, ComponentKind]] = []
    for i in range(len(parts)):
        prefix = QualifiedName(parts[: i + 1])
        if first_upper is not None and i >= first_upper:
            kind = ComponentKind.CLASS
        elif (first_upper is None and i == len(parts) - 1) or (
            first_upper is not None and i == first_upper - 1
        ):
            kind = ComponentKind.MODULE
        else:
            kind = ComponentKind.PACKAGE
        chain.append((prefix, kind))
    return chain


def build_dynamic_model(
    traces: list[ExecutionTrace], label: str = "dynamic"
) -> ArchitectureModel:
    """Distinct signatures become operations, signature prefixes become
    components, and stack-replay caller/callee counts become edge weights.
    Every root event contributes one edge from the synthetic entry operation."""
    observed_ns: dict[QualifiedName, int] = defaultdict(int)
    edge_weights: dict[tuple[QualifiedName, QualifiedName], int] = defaultdict(int)
    signatures: set[QualifiedName] = set()
    any_root = False

    for trace in traces:
        for event in trace.events:
            signatures.add(event.signature)
            observed_ns[event.signature] += event.exit_ns - event.entry_ns
        for caller, callee in trace_call_pairs(trace):
            if caller is None:
                any_root = True
                caller = SYNTHETIC_ENTRY_SIGNATURE
            edge_weights[(caller, callee)] += 1

    owners: dict[QualifiedName, QualifiedName] = {
        sig: _owner_of(sig) for sig in signatures
    }
    # A signature's derived owner may itself be an operation (a def nested in
    # a module-level function); collapse such owners onto the enclosing
    # operation's own component.
    for sig in sorted(owners):
        seen = set()
        while owners[sig] in owners and owners[sig] not in seen:
            seen.add(owners[sig])
            owners[sig] = owners[owners[sig]]

    components: dict[QualifiedName, Component] = {}
    for owner in set(owners.values()):
        if owner == SYNTHETIC_COMPONENT_NAME:
            continue
        chain = _component_chain(owner)
        for i, (prefix, kind) in enumerate(chain):
            parent = chain[i - 1][0] if i else None
            components[prefix] = Component(prefix, kind, parent, Provenance.DYNAMIC)

    operations = [
        OperationEntity(
            signature=sig,
            owner=owners[sig],
            arity=0,
            provenance=Provenance.DYNAMIC,
            observed_ns=observed_ns[sig],
        )
        for sig in signatures
    ]

    needs_synthetic = any_root or any(
        owner == SYNTHETIC_COMPONENT_NAME for owner in owners.values()
    )
    if needs_synthetic:
        components[SYNTHETIC_COMPONENT_NAME] = Component(
            SYNTHETIC_COMPONENT_NAME,
            ComponentKind.SYNTHETIC,
            None,
            Provenance.DYNAMIC,
        )
    if any_root:
        operations.append(
            OperationEntity(
                SYNTHETIC_ENTRY_SIGNATURE,
                SYNTHETIC_COMPONENT_NAME,
                0,
                Provenance.DYNAMIC,
            )
        )

    call_edges = [
        CallEdge(caller, callee, weight, Provenance.DYNAMIC)
        for (caller, callee), weight in edge_weights.items()
    ]
    return ArchitectureModel.build(
        components=components.values(),
        operations=operations,
        call_edges=call_edges,
        label=label,
    )


def ingest_trace_logs(
    paths: list[Path], report: RunReport | None = None, label: str = "dynamic"
) -> ArchitectureModel:
    events: list[TraceEvent] = []
    for path in sorted(Path(p) for p in paths):
        events.extend(parse_trace_log(path, report=report))
    traces = reconstruct_traces(events, report=report)
    return build_dynamic_model(traces, label=label)
