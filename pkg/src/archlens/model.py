"""Architecture model value types plus validation and statistics.

The model is the shared contract between the static analyzer, the trace
ingester, the merger, and every exporter: components (packages, modules,
classes) own operations (functions, methods), and operations are related by
call edges and dataflow edges. Every element records whether it was found
statically, dynamically, or by both analyses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from archlens.errors import ModelValidationError
from archlens.names import SYNTHETIC_COMPONENT_NAME, QualifiedName


class Provenance(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    BOTH = "both"


class ComponentKind(str, Enum):
    PACKAGE = "package"
    MODULE = "module"
    CLASS = "class"
    SYNTHETIC = "synthetic"


class DataflowKind(str, Enum):
    RETURN_VALUE = "return-value"
    ARGUMENT = "argument"


@dataclass(frozen=True)
class Component:
    name: QualifiedName
    kind: ComponentKind
    parent: QualifiedName | None
    provenance: Provenance


@dataclass(frozen=True)
class OperationEntity:
    signature: QualifiedName
    owner: QualifiedName
    arity: int
    provenance: Provenance
    # Total nanoseconds this operation was observed running (0 when the
    # operation was never traced). Not part of identity.
    observed_ns: int = 0


@dataclass(frozen=True)
class CallEdge:
    caller: QualifiedName
    callee: QualifiedName
    # Invocation count; 0 means "statically known, never observed".
    weight: int
    provenance: Provenance


@dataclass(frozen=True)
class DataflowEdge:
    source: QualifiedName
    target: QualifiedName
    kind: DataflowKind


@dataclass(frozen=True)
class ArchitectureModel:
    """Immutable model; element tuples are kept in canonical name order."""

    components: tuple[Component, ...] = ()
    operations: tuple[OperationEntity, ...] = ()
    call_edges: tuple[CallEdge, ...] = ()
    dataflow_edges: tuple[DataflowEdge, ...] = ()
    label: str = ""

    @classmethod
    def build(
        cls,
        components: Iterable[Component] = (),
        operations: Iterable[OperationEntity] = (),
        call_edges: Iterable[CallEdge] = (),
        dataflow_edges: Iterable[DataflowEdge] = (),
        label: str = "",
    ) -> "ArchitectureModel":
        """Sort elements canonically and drop exact duplicates (set semantics)."""
        return cls(
            components=tuple(
                sorted(set(components), key=lambda c: c.name.text)
            ),
            operations=tuple(
                sorted(set(operations), key=lambda o: o.signature.text)
            ),
            call_edges=tuple(
                sorted(
                    set(call_edges),
                    key=lambda e: (e.caller.text, e.callee.text),
                )
            ),
            dataflow_edges=tuple(
                sorted(
                    set(dataflow_edges),
                    key=lambda e: (e.source.text, e.target.text, e.kind.value),
                )
            ),
            label=label,
        )

    @property
    def is_empty(self) -> bool:
        return not (
            self.components
            or self.operations
            or self.call_edges
            or self.dataflow_edges
        )

    def component_by_name(self) -> dict[QualifiedName, Component]:
        return {c.name: c for c in self.components}

    def operation_by_signature(self) -> dict[QualifiedName, OperationEntity]:
        return {o.signature: o for o in self.operations}


@dataclass(frozen=True)
class ModelStats:
    components: int
    operations: int
    call_edges: int
    dataflow_edges: int
    components_by_provenance: dict[str, int]
    operations_by_provenance: dict[str, int]
    call_edges_by_provenance: dict[str, int]
    connected_components: int
    total_observed_ns: int


def model_validate(m: ArchitectureModel) -> list[str]:
    """Check every model invariant; returns one description per violation.

    Violations are data, not errors: an empty list means the model is valid.
    """
    violations: list[str] = []

    seen_components: dict[QualifiedName, Component] = {}
    for comp in m.components:
        if comp.name in seen_components:
            violations.append(f"duplicate-component: {comp.name}")
            continue
        seen_components[comp.name] = comp

    synthetic = [c for c in m.components if c.name == SYNTHETIC_COMPONENT_NAME]
    for comp in synthetic:
        if comp.kind is not ComponentKind.SYNTHETIC:
            violations.append(
                f"reserved-name-not-synthetic: {comp.name} has kind {comp.kind.value}"
            )
    for comp in m.components:
        if comp.kind is ComponentKind.SYNTHETIC and comp.name != SYNTHETIC_COMPONENT_NAME:
            violations.append(f"synthetic-kind-wrong-name: {comp.name}")
        if comp.parent is not None and not comp.parent.is_strict_prefix_of(comp.name):
            violations.append(
                f"parent-not-prefix: {comp.name} claims parent {comp.parent}"
            )
        if comp.parent is not None and comp.parent not in seen_components:
            violations.append(
                f"dangling-parent: {comp.name} -> {comp.parent}"
            )

    seen_operations: dict[QualifiedName, OperationEntity] = {}
    for op in m.operations:
        if op.signature in seen_operations:
            violations.append(f"duplicate-operation: {op.signature}")
            continue
        seen_operations[op.signature] = op
        if op.owner not in seen_components:
            violations.append(f"dangling-owner: {op.signature} -> {op.owner}")
        if op.arity < 0:
            violations.append(f"negative-arity: {op.signature}")
        if op.observed_ns < 0:
            violations.append(f"negative-observed-time: {op.signature}")

    seen_call_pairs: set[tuple[QualifiedName, QualifiedName]] = set()
    for edge in m.call_edges:
        pair = (edge.caller, edge.callee)
        if pair in seen_call_pairs:
            violations.append(
                f"duplicate-call-edge: {edge.caller} -> {edge.callee}"
            )
        seen_call_pairs.add(pair)
        if edge.caller not in seen_operations:
            violations.append(
                f"dangling-caller: {edge.caller} -> {edge.callee}"
            )
        if edge.callee not in seen_operations:
            violations.append(
                f"dangling-callee: {edge.caller} -> {edge.callee}"
            )
        if edge.weight < 0:
            violations.append(
                f"negative-weight: {edge.caller} -> {edge.callee}"
            )
        # A purely dynamic edge was necessarily observed at least once. A
        # "both" edge may carry weight 0: merging two static models marks
        # shared edges as found-by-both without any observation.
        if edge.provenance is Provenance.DYNAMIC and edge.weight < 1:
            violations.append(
                f"unobserved-dynamic-edge: {edge.caller} -> {edge.callee}"
            )

    seen_flows: set[tuple[QualifiedName, QualifiedName, DataflowKind]] = set()
    for flow in m.dataflow_edges:
        key = (flow.source, flow.target, flow.kind)
        if key in seen_flows:
            violations.append(
                f"duplicate-dataflow-edge: {flow.source} -> {flow.target} ({flow.kind.value})"
            )
        seen_flows.add(key)
        if flow.source not in seen_operations:
            violations.append(
                f"dangling-dataflow-source: {flow.source} -> {flow.target}"
            )
        if flow.target not in seen_operations:
            violations.append(
                f"dangling-dataflow-target: {flow.source} -> {flow.target}"
            )

    return violations


def _provenance_breakdown(elements: Iterable[Provenance]) -> dict[str, int]:
    counts = {p.value: 0 for p in Provenance}
    for provenance in elements:
        counts[provenance.value] += 1
    return counts


def _connected_component_count(m: ArchitectureModel) -> int:
    """Weakly connected components of the call graph, BFS over all operations."""
    adjacency: dict[QualifiedName, list[QualifiedName]] = {
        op.signature: [] for op in m.operations
    }
    for edge in m.call_edges:
        adjacency[edge.caller].append(edge.callee)
        adjacency[edge.callee].append(edge.caller)

    seen: set[QualifiedName] = set()
    count = 0
    for start in adjacency:
        if start in seen:
            continue
        count += 1
        queue = deque([start])
        seen.add(start)
        while queue:
            node = queue.popleft()
            for neighbor in adjacency[node]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    queue.append(neighbor)
    return count


def model_stats(m: ArchitectureModel) -> ModelStats:
    """Element counts, per-provenance breakdown, and call-graph fragmentation.

    Refuses invalid models: statistics over a model with dangling references
    would silently lie about connectivity.
    """
    violations = model_validate(m)
    if violations:
        raise ModelValidationError(violations)
    return ModelStats(
        components=len(m.components),
        operations=len(m.operations),
        call_edges=len(m.call_edges),
        dataflow_edges=len(m.dataflow_edges),
        components_by_provenance=_provenance_breakdown(
            c.provenance for c in m.components
        ),
        operations_by_provenance=_provenance_breakdown(
            o.provenance for o in m.operations
        ),
        call_edges_by_provenance=_provenance_breakdown(
            e.provenance for e in m.call_edges
        ),
        connected_components=_connected_component_count(m),
        total_observed_ns=sum(o.observed_ns for o in m.operations),
    )
