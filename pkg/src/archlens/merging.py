"""Model merging, diffing, and name normalization.

Merging is a union keyed on qualified names. The field algebra is chosen so
the operation is commutative and associative: provenance joins to `both`,
numeric fields take the maximum, component kinds take the most specific, and
parent/owner links take the longest name. Model labels sit outside those
guarantees; they join with "+" purely for display.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from archlens.errors import ConfigError
from archlens.model import (
    ArchitectureModel,
    CallEdge,
    Component,
    ComponentKind,
    DataflowEdge,
    OperationEntity,
    Provenance,
)
from archlens.names import QualifiedName
from archlens.report import NAME_COLLISION, RunReport

_KIND_RANK = {
    ComponentKind.SYNTHETIC: 0,
    ComponentKind.PACKAGE: 1,
    ComponentKind.MODULE: 2,
    ComponentKind.CLASS: 3,
}


def _join_provenance(a: Provenance, b: Provenance) -> Provenance:
    return a if a == b else Provenance.BOTH


def _join_kind(a: ComponentKind, b: ComponentKind) -> ComponentKind:
    return a if _KIND_RANK[a] >= _KIND_RANK[b] else b


def _join_name(a: QualifiedName | None, b: QualifiedName | None) -> QualifiedName | None:
    """The longer (more specific) name wins; ties break on text."""
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b, key=lambda n: (len(n.parts), n.text))


def _join_label(a: str, b: str) -> str:
    if not a:
        return b
    if not b or a == b:
        return a
    return a + "+" + b


def _fold_component(a: Component, b: Component) -> Component:
    return Component(
        a.name,
        _join_kind(a.kind, b.kind),
        _join_name(a.parent, b.parent),
        _join_provenance(a.provenance, b.provenance),
    )


def _fold_operation(a: OperationEntity, b: OperationEntity) -> OperationEntity:
    return OperationEntity(
        a.signature,
        _join_name(a.owner, b.owner),
        max(a.arity, b.arity),
        _join_provenance(a.provenance, b.provenance),
        max(a.observed_ns, b.observed_ns),
    )


def merge_models(a: ArchitectureModel, b: ArchitectureModel) -> ArchitectureModel:
    components: dict[QualifiedName, Component] = {}
    for comp in list(a.components) + list(b.components):
        prior = components.get(comp.name)
        components[comp.name] = comp if prior is None else _fold_component(prior, comp)

    operations: dict[QualifiedName, OperationEntity] = {}
    for op in list(a.operations) + list(b.operations):
        prior = operations.get(op.signature)
        operations[op.signature] = op if prior is None else _fold_operation(prior, op)

    calls: dict[tuple[QualifiedName, QualifiedName], CallEdge] = {}
    for edge in list(a.call_edges) + list(b.call_edges):
        key = (edge.caller, edge.callee)
        prior = calls.get(key)
        if prior is None:
            calls[key] = edge
        else:
            calls[key] = CallEdge(
                edge.caller,
                edge.callee,
                max(prior.weight, edge.weight),
                _join_provenance(prior.provenance, edge.provenance),
            )

    dataflow = set(a.dataflow_edges) | set(b.dataflow_edges)

    return ArchitectureModel.build(
        components=components.values(),
        operations=operations.values(),
        call_edges=calls.values(),
        dataflow_edges=dataflow,
        label=_join_label(a.label, b.label),
    )


# ----------------------------------------------------------------- diffing

@dataclass(frozen=True)
class DiffSection:
    only_in_a: tuple
    only_in_b: tuple
    in_both: tuple


@dataclass(frozen=True)
class ModelDiff:
    components: DiffSection
    operations: DiffSection
    call_edges: DiffSection
    dataflow_edges: DiffSection


def _diff_by_key(rows_a, rows_b, key) -> DiffSection:
    index_a = {key(row): row for row in rows_a}
    index_b = {key(row): row for row in rows_b}
    only_a = tuple(row for k, row in index_a.items() if k not in index_b)
    only_b = tuple(row for k, row in index_b.items() if k not in index_a)
    both = tuple(row for k, row in index_a.items() if k in index_b)
    return DiffSection(only_a, only_b, both)


def compare_models(a: ArchitectureModel, b: ArchitectureModel) -> ModelDiff:
    return ModelDiff(
        components=_diff_by_key(a.components, b.components, lambda c: c.name),
        operations=_diff_by_key(a.operations, b.operations, lambda o: o.signature),
        call_edges=_diff_by_key(
            a.call_edges, b.call_edges, lambda e: (e.caller, e.callee)
        ),
        dataflow_edges=_diff_by_key(
            a.dataflow_edges,
            b.dataflow_edges,
            lambda e: (e.source, e.target, e.kind),
        ),
    )


# ------------------------------------------------------------ name rules

RULE_PREFIX_STRIP = "prefix-strip"
RULE_PREFIX_ADD = "prefix-add"
RULE_SEGMENT_RENAME = "segment-rename"
RULE_SYNTHETIC_PASSTHROUGH = "synthetic-passthrough"

_RULE_KINDS = {
    RULE_PREFIX_STRIP,
    RULE_PREFIX_ADD,
    RULE_SEGMENT_RENAME,
    RULE_SYNTHETIC_PASSTHROUGH,
}


@dataclass(frozen=True)
class NameRule:
    kind: str
    value: str = ""
    replacement: str = ""

    def apply(self, name: QualifiedName) -> QualifiedName:
        if self.kind == RULE_PREFIX_STRIP:
            prefix = QualifiedName.parse(self.value)
            # strip repeatedly so the rule is idempotent on doubled prefixes;
            # never strip down to nothing
            while name.starts_with(prefix) and len(name.parts) > len(prefix.parts):
                name = QualifiedName(name.parts[len(prefix.parts):])
            return name
        if self.kind == RULE_PREFIX_ADD:
            prefix = QualifiedName.parse(self.value)
            if name.starts_with(prefix):
                return name
            return QualifiedName(prefix.parts + name.parts)
        if self.kind == RULE_SEGMENT_RENAME:
            if self.value not in name.parts:
                return name
            return QualifiedName(
                tuple(self.replacement if p == self.value else p for p in name.parts)
            )
        # synthetic-passthrough: synthetic names are always left alone by the
        # rule engine itself; the kind exists so configurations can state the
        # behaviour explicitly
        return name


class NameRuleSet:
    def __init__(self, rules: list[NameRule]):
        self.rules = list(rules)
        self._probe_idempotence()

    @classmethod
    def from_spec(cls, spec: list[dict]) -> "NameRuleSet":
        rules = []
        for i, raw in enumerate(spec):
            if not isinstance(raw, dict):
                raise ConfigError(f"name rule {i} must be a mapping")
            kind = raw.get("kind")
            if kind not in _RULE_KINDS:
                raise ConfigError(f"name rule {i} has unknown kind {kind!r}")
            value = raw.get("value", "")
            replacement = raw.get("replacement", "")
            if kind in (RULE_PREFIX_STRIP, RULE_PREFIX_ADD, RULE_SEGMENT_RENAME):
                if not value:
                    raise ConfigError(f"name rule {i} ({kind}) needs a value")
                QualifiedName.parse(value)  # raises on bad segments
            if kind == RULE_SEGMENT_RENAME:
                if not replacement:
                    raise ConfigError(f"name rule {i} (segment-rename) needs a replacement")
                QualifiedName.parse(replacement)
                if "." in value or "." in replacement:
                    raise ConfigError(
                        f"name rule {i} (segment-rename) works on single segments"
                    )
            rules.append(NameRule(kind, value, replacement))
        return cls(rules)

    def normalize(self, name: QualifiedName) -> QualifiedName:
        if name.is_synthetic:
            return name
        out = name
        for rule in self.rules:
            out = rule.apply(out)
        return out

    def normalize_checked(self, name: QualifiedName) -> QualifiedName:
        once = self.normalize(name)
        twice = self.normalize(once)
        if twice != once:
            raise ConfigError(
                f"name rules are not idempotent on {name.text!r}: "
                f"{once.text!r} -> {twice.text!r}"
            )
        return once

    def _probe_idempotence(self) -> None:
        probes = {QualifiedName(("probe",)), QualifiedName(("probe", "sub"))}
        values = [
            r.value for r in self.rules if r.value
        ] + [r.replacement for r in self.rules if r.replacement]
        for value in values:
            vq = QualifiedName.parse(value)
            probes.add(vq)
            probes.add(QualifiedName(vq.parts + ("probe",)))
            probes.add(QualifiedName(("probe",) + vq.parts))
            for other in values:
                probes.add(QualifiedName(vq.parts + QualifiedName.parse(other).parts))
        for probe in probes:
            once = self.normalize(probe)
            twice = self.normalize(once)
            if twice != once:
                raise ConfigError(
                    f"name rules are not idempotent: probe {probe.text!r} "
                    f"maps {once.text!r} -> {twice.text!r}"
                )


def normalize_model(
    model: ArchitectureModel,
    rules: NameRuleSet,
    report: RunReport | None = None,
) -> ArchitectureModel:
    """Apply a rule set to every name in the model.

    Renames can make distinct elements collide; collisions are folded (call
    weights add, observed time adds) and reported.
    """

    mapping: dict[QualifiedName, QualifiedName] = {}

    def rename(name: QualifiedName) -> QualifiedName:
        if name not in mapping:
            mapping[name] = rules.normalize_checked(name)
        return mapping[name]

    components: dict[QualifiedName, Component] = {}
    folded_components: dict[QualifiedName, list[str]] = {}
    for comp in model.components:
        new_name = rename(comp.name)
        moved = Component(new_name, comp.kind, None, comp.provenance)
        prior = components.get(new_name)
        if prior is None:
            components[new_name] = moved
        else:
            components[new_name] = _fold_component(prior, moved)
            folded_components.setdefault(new_name, []).append(comp.name.text)

    # parents are rebuilt structurally: the longest surviving component name
    # that is a strict prefix
    surviving = sorted(components, key=lambda n: len(n.parts), reverse=True)
    rebuilt: dict[QualifiedName, Component] = {}
    for name, comp in components.items():
        parent = next(
            (p for p in surviving if p.is_strict_prefix_of(name)), None
        )
        rebuilt[name] = Component(name, comp.kind, parent, comp.provenance)

    operations: dict[QualifiedName, OperationEntity] = {}
    folded_operations: dict[QualifiedName, list[str]] = {}
    for op in model.operations:
        new_sig = rename(op.signature)
        moved = OperationEntity(
            new_sig, rename(op.owner), op.arity, op.provenance, op.observed_ns
        )
        prior = operations.get(new_sig)
        if prior is None:
            operations[new_sig] = moved
        else:
            operations[new_sig] = OperationEntity(
                new_sig,
                _join_name(prior.owner, moved.owner),
                max(prior.arity, moved.arity),
                _join_provenance(prior.provenance, moved.provenance),
                prior.observed_ns + moved.observed_ns,
            )
            folded_operations.setdefault(new_sig, []).append(op.signature.text)

    calls: dict[tuple[QualifiedName, QualifiedName], CallEdge] = {}
    for edge in model.call_edges:
        key = (rename(edge.caller), rename(edge.callee))
        prior = calls.get(key)
        if prior is None:
            calls[key] = CallEdge(key[0], key[1], edge.weight, edge.provenance)
        else:
            calls[key] = CallEdge(
                key[0],
                key[1],
                prior.weight + edge.weight,
                _join_provenance(prior.provenance, edge.provenance),
            )

    dataflow = {
        DataflowEdge(rename(e.source), rename(e.target), e.kind)
        for e in model.dataflow_edges
    }

    if report is not None:
        for name, folded in sorted(folded_components.items()):
            report.add(
                NAME_COLLISION, name.text, "components folded: " + ", ".join(sorted(folded))
            )
        for name, folded in sorted(folded_operations.items()):
            report.add(
                NAME_COLLISION, name.text, "operations folded: " + ", ".join(sorted(folded))
            )

    return ArchitectureModel.build(
        components=rebuilt.values(),
        operations=operations.values(),
        call_edges=calls.values(),
        dataflow_edges=dataflow,
        label=model.label,
    )
