"""Serializers for architecture models.

JSON is the lossless canonical persistence format used between pipeline
stages; DOT and GraphML are one-way views. DOT comes in two granularities:
flat (components and operations all as plain nodes, ownership as edges) and
grouped (components as nested clusters containing their operations).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any
from xml.sax.saxutils import escape, quoteattr

from archlens.errors import ConfigError, ModelFormatError, ModelValidationError
from archlens.model import (
    ArchitectureModel,
    CallEdge,
    Component,
    ComponentKind,
    DataflowEdge,
    DataflowKind,
    OperationEntity,
    Provenance,
    model_validate,
)
from archlens.names import QualifiedName


# ---------------------------------------------------------------- JSON

def to_json(m: ArchitectureModel) -> str:
    payload = {
        "label": m.label,
        "components": [
            {
                "name": c.name.text,
                "kind": c.kind.value,
                "parent": c.parent.text if c.parent else None,
                "provenance": c.provenance.value,
            }
            for c in m.components
        ],
        "operations": [
            {
                "signature": o.signature.text,
                "owner": o.owner.text,
                "arity": o.arity,
                "provenance": o.provenance.value,
                "observed_ns": o.observed_ns,
            }
            for o in m.operations
        ],
        "call_edges": [
            {
                "caller": e.caller.text,
                "callee": e.callee.text,
                "weight": e.weight,
                "provenance": e.provenance.value,
            }
            for e in m.call_edges
        ],
        "dataflow_edges": [
            {
                "source": e.source.text,
                "target": e.target.text,
                "kind": e.kind.value,
            }
            for e in m.dataflow_edges
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _expect(value: Any, kind: type, path: str) -> Any:
    # bool is an int subclass; never accept it where a number is required
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ModelFormatError(
            f"expected {kind.__name__}, got {type(value).__name__}", path
        )
    return value


def _get(obj: dict, key: str, kind: type, path: str) -> Any:
    if key not in obj:
        raise ModelFormatError(f"missing key {key!r}", path)
    return _expect(obj[key], kind, f"{path}.{key}")


def _name(text: Any, path: str) -> QualifiedName:
    _expect(text, str, path)
    try:
        return QualifiedName.parse(text)
    except Exception as exc:
        raise ModelFormatError(str(exc), path) from exc


def _enum_value(enum_cls: type, text: Any, path: str) -> Any:
    _expect(text, str, path)
    try:
        return enum_cls(text)
    except ValueError as exc:
        raise ModelFormatError(
            f"{text!r} is not one of {[e.value for e in enum_cls]}", path
        ) from exc


def from_json(text: str, validate: bool = True) -> ArchitectureModel:
    """Parse canonical model JSON.

    Structural problems raise ModelFormatError with the offending JSON path;
    invariant violations raise ModelValidationError (unless validate=False,
    for callers that want to inspect a broken model).
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    _expect(payload, dict, "$")

    label = _get(payload, "label", str, "$")

    components = []
    for i, row in enumerate(_get(payload, "components", list, "$")):
        path = f"$.components[{i}]"
        _expect(row, dict, path)
        parent_text = row.get("parent")
        components.append(
            Component(
                name=_name(_get(row, "name", str, path), f"{path}.name"),
                kind=_enum_value(ComponentKind, _get(row, "kind", str, path), f"{path}.kind"),
                parent=_name(parent_text, f"{path}.parent") if parent_text is not None else None,
                provenance=_enum_value(
                    Provenance, _get(row, "provenance", str, path), f"{path}.provenance"
                ),
            )
        )

    operations = []
    for i, row in enumerate(_get(payload, "operations", list, "$")):
        path = f"$.operations[{i}]"
        _expect(row, dict, path)
        operations.append(
            OperationEntity(
                signature=_name(_get(row, "signature", str, path), f"{path}.signature"),
                owner=_name(_get(row, "owner", str, path), f"{path}.owner"),
                arity=_get(row, "arity", int, path),
                provenance=_enum_value(
                    Provenance, _get(row, "provenance", str, path), f"{path}.provenance"
                ),
                observed_ns=_get(row, "observed_ns", int, path),
            )
        )

    call_edges = []
    for i, row in enumerate(_get(payload, "call_edges", list, "$")):
        path = f"$.call_edges[{i}]"
        _expect(row, dict, path)
        call_edges.append(
            CallEdge(
                caller=_name(_get(row, "caller", str, path), f"{path}.caller"),
                callee=_name(_get(row, "callee", str, path), f"{path}.callee"),
                weight=_get(row, "weight", int, path),
                provenance=_enum_value(
                    Provenance, _get(row, "provenance", str, path), f"{path}.provenance"
                ),
            )
        )

    dataflow_edges = []
    for i, row in enumerate(_get(payload, "dataflow_edges", list, "$")):
        path = f"$.dataflow_edges[{i}]"
        _expect(row, dict, path)
        dataflow_edges.append(
            DataflowEdge(
                source=_name(_get(row, "source", str, path), f"{path}.source"),
                target=_name(_get(row, "target", str, path), f"{path}.target"),
                kind=_enum_value(
                    DataflowKind, _get(row, "kind", str, path), f"{path}.kind"
                ),
            )
        )

    model = ArchitectureModel.build(
        components, operations, call_edges, dataflow_edges, label=label
    )
    if validate:
        violations = model_validate(model)
        if violations:
            raise ModelValidationError(violations)
    return model


# ---------------------------------------------------------------- DOT

def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_edge_lines(m: ArchitectureModel, include_dataflow: bool, include_weights: bool, indent: str) -> list[str]:
    lines = []
    for e in m.call_edges:
        attrs = [f"kind={_dot_quote('call')}"]
        if include_weights:
            attrs.insert(0, f"weight={e.weight}")
        lines.append(
            f"{indent}{_dot_quote(e.caller.text)} -> {_dot_quote(e.callee.text)}"
            f" [{', '.join(attrs)}];"
        )
    if include_dataflow:
        for f in m.dataflow_edges:
            lines.append(
                f"{indent}{_dot_quote(f.source.text)} -> {_dot_quote(f.target.text)}"
                f" [kind={_dot_quote(f.kind.value)}, style={_dot_quote('dashed')}];"
            )
    return lines


def _dot_flat(m: ArchitectureModel, include_dataflow: bool, include_weights: bool) -> str:
    lines = ["digraph \"G\" {"]
    if m.label:
        lines.append(f"  label={_dot_quote(m.label)};")
    for c in m.components:
        lines.append(
            f"  {_dot_quote(c.name.text)} [label={_dot_quote(c.name.last)},"
            f" kind={_dot_quote(c.kind.value)}, provenance={_dot_quote(c.provenance.value)}];"
        )
    for o in m.operations:
        lines.append(
            f"  {_dot_quote(o.signature.text)} [label={_dot_quote(o.signature.last)},"
            f" kind={_dot_quote('operation')}, provenance={_dot_quote(o.provenance.value)}];"
        )
    for c in m.components:
        if c.parent is not None:
            lines.append(
                f"  {_dot_quote(c.parent.text)} -> {_dot_quote(c.name.text)}"
                f" [kind={_dot_quote('owns')}];"
            )
    for o in m.operations:
        lines.append(
            f"  {_dot_quote(o.owner.text)} -> {_dot_quote(o.signature.text)}"
            f" [kind={_dot_quote('owns')}];"
        )
    lines.extend(_dot_edge_lines(m, include_dataflow, include_weights, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_grouped(m: ArchitectureModel, include_dataflow: bool, include_weights: bool) -> str:
    children: dict[QualifiedName | None, list[Component]] = {}
    for c in m.components:
        children.setdefault(c.parent, []).append(c)
    ops_by_owner: dict[QualifiedName, list[OperationEntity]] = {}
    for o in m.operations:
        ops_by_owner.setdefault(o.owner, []).append(o)

    lines = ["digraph \"G\" {"]
    if m.label:
        lines.append(f"  label={_dot_quote(m.label)};")

    def emit(comp: Component, depth: int) -> None:
        pad = "  " * depth
        lines.append(f"{pad}subgraph {_dot_quote('cluster_' + comp.name.text)} {{")
        lines.append(f"{pad}  label={_dot_quote(comp.name.last)};")
        lines.append(f"{pad}  kind={_dot_quote(comp.kind.value)};")
        for sub in children.get(comp.name, []):
            emit(sub, depth + 1)
        for o in ops_by_owner.get(comp.name, []):
            lines.append(
                f"{pad}  {_dot_quote(o.signature.text)} [label={_dot_quote(o.signature.last)}];"
            )
        lines.append(f"{pad}}}")

    for root in children.get(None, []):
        emit(root, 1)
    lines.extend(_dot_edge_lines(m, include_dataflow, include_weights, "  "))
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(
    m: ArchitectureModel,
    grouped: bool = False,
    include_dataflow: bool = True,
    include_weights: bool = True,
) -> str:
    if grouped:
        return _dot_grouped(m, include_dataflow, include_weights)
    return _dot_flat(m, include_dataflow, include_weights)


# ---------------------------------------------------------------- GraphML

_GRAPHML_KEYS = """\
  <key id="kind" for="node" attr.name="kind" attr.type="string"/>
  <key id="provenance" for="node" attr.name="provenance" attr.type="string"/>
  <key id="arity" for="node" attr.name="arity" attr.type="long"/>
  <key id="observed_ns" for="node" attr.name="observed_ns" attr.type="long"/>
  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>
  <key id="edge_provenance" for="edge" attr.name="provenance" attr.type="string"/>
  <key id="relation" for="edge" attr.name="relation" attr.type="string"/>"""


def to_graphml(m: ArchitectureModel) -> str:
    """Compound GraphML: each component node carries a nested <graph> holding
    its subcomponents and operations; edges live in the root graph."""
    children: dict[QualifiedName | None, list[Component]] = {}
    for c in m.components:
        children.setdefault(c.parent, []).append(c)
    ops_by_owner: dict[QualifiedName, list[OperationEntity]] = {}
    for o in m.operations:
        ops_by_owner.setdefault(o.owner, []).append(o)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        _GRAPHML_KEYS,
        '  <graph id="G" edgedefault="directed">',
    ]

    def emit_operation(o: OperationEntity, depth: int) -> None:
        pad = "  " * depth
        lines.append(f"{pad}<node id={quoteattr(o.signature.text)}>")
        lines.append(f'{pad}  <data key="kind">operation</data>')
        lines.append(
            f'{pad}  <data key="provenance">{escape(o.provenance.value)}</data>'
        )
        lines.append(f'{pad}  <data key="arity">{o.arity}</data>')
        lines.append(f'{pad}  <data key="observed_ns">{o.observed_ns}</data>')
        lines.append(f"{pad}</node>")

    def emit_component(c: Component, depth: int) -> None:
        pad = "  " * depth
        lines.append(f"{pad}<node id={quoteattr(c.name.text)}>")
        lines.append(f'{pad}  <data key="kind">{escape(c.kind.value)}</data>')
        lines.append(
            f'{pad}  <data key="provenance">{escape(c.provenance.value)}</data>'
        )
        lines.append(
            f"{pad}  <graph id={quoteattr(c.name.text + ':')} edgedefault=\"directed\">"
        )
        for sub in children.get(c.name, []):
            emit_component(sub, depth + 2)
        for o in ops_by_owner.get(c.name, []):
            emit_operation(o, depth + 2)
        lines.append(f"{pad}  </graph>")
        lines.append(f"{pad}</node>")

    for root in children.get(None, []):
        emit_component(root, 2)

    counter = 0
    for e in m.call_edges:
        lines.append(
            f"    <edge id=\"e{counter}\" source={quoteattr(e.caller.text)}"
            f" target={quoteattr(e.callee.text)}>"
        )
        lines.append('      <data key="relation">call</data>')
        lines.append(f'      <data key="weight">{e.weight}</data>')
        lines.append(
            f'      <data key="edge_provenance">{escape(e.provenance.value)}</data>'
        )
        lines.append("    </edge>")
        counter += 1
    for f in m.dataflow_edges:
        lines.append(
            f"    <edge id=\"e{counter}\" source={quoteattr(f.source.text)}"
            f" target={quoteattr(f.target.text)}>"
        )
        lines.append(f'      <data key="relation">{escape(f.kind.value)}</data>')
        lines.append("    </edge>")
        counter += 1

    lines.append("  </graph>")
    lines.append("</graphml>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- dispatch

EXPORT_FORMATS = ("json", "dot", "graphml")
DOT_MODES = ("flat", "grouped")

_FORMAT_SUFFIX = {"json": ".json", "dot": ".dot", "graphml": ".graphml"}


@dataclass(frozen=True)
class ExportOptions:
    format: str = "dot"
    dot_mode: str = "grouped"
    include_dataflow: bool = True
    include_weights: bool = True

    def __post_init__(self):
        if self.format not in EXPORT_FORMATS:
            raise ConfigError(
                f"unknown export format {self.format!r}; "
                f"expected one of {', '.join(EXPORT_FORMATS)}"
            )
        if self.dot_mode not in DOT_MODES:
            raise ConfigError(
                f"unknown dot mode {self.dot_mode!r}; "
                f"expected one of {', '.join(DOT_MODES)}"
            )

    @property
    def suffix(self) -> str:
        return _FORMAT_SUFFIX[self.format]


def export_model(m: ArchitectureModel, options: ExportOptions | None = None) -> str:
    options = options or ExportOptions()
    if options.format == "json":
        return to_json(m)
    if options.format == "graphml":
        return to_graphml(m)
    return to_dot(
        m,
        grouped=options.dot_mode == "grouped",
        include_dataflow=options.include_dataflow,
        include_weights=options.include_weights,
    )
