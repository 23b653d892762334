from __future__ import annotations

import random

import pytest

from archlens.errors import ModelValidationError
from archlens.model import (
    ArchitectureModel,
    CallEdge,
    Component,
    ComponentKind,
    DataflowEdge,
    DataflowKind,
    OperationEntity,
    Provenance,
    model_stats,
    model_validate,
)
from archlens.names import SYNTHETIC_COMPONENT_NAME, QualifiedName

from reference import union_find_component_count

N = QualifiedName.parse


def _component(text: str, kind=ComponentKind.MODULE, parent: str | None = None,
               provenance=Provenance.STATIC) -> Component:
    return Component(N(text), kind, N(parent) if parent else None, provenance)


def _operation(text: str, owner: str, arity: int = 0,
               provenance=Provenance.STATIC, observed_ns: int = 0) -> OperationEntity:
    return OperationEntity(N(text), N(owner), arity, provenance, observed_ns)


def _call(caller: str, callee: str, weight: int = 0,
          provenance=Provenance.STATIC) -> CallEdge:
    return CallEdge(N(caller), N(callee), weight, provenance)


def anygraph_mini() -> ArchitectureModel:
    """Hand-built fixture: 3 modules, 7 operations, constructed to satisfy
    every invariant. The expected stats below were computed on paper."""
    return ArchitectureModel.build(
        components=[
            _component("alpha"),
            _component("beta"),
            _component("gamma", provenance=Provenance.BOTH),
        ],
        operations=[
            _operation("alpha.one", "alpha"),
            _operation("alpha.two", "alpha", arity=1),
            _operation("beta.three", "beta", provenance=Provenance.BOTH),
            _operation("beta.four", "beta"),
            _operation("gamma.five", "gamma", provenance=Provenance.DYNAMIC, observed_ns=500),
            _operation("gamma.six", "gamma", provenance=Provenance.DYNAMIC, observed_ns=250),
            _operation("gamma.seven", "gamma"),
        ],
        call_edges=[
            _call("alpha.one", "alpha.two"),
            _call("alpha.two", "beta.three", weight=4, provenance=Provenance.BOTH),
            _call("gamma.five", "gamma.six", weight=2, provenance=Provenance.DYNAMIC),
        ],
        dataflow_edges=[
            DataflowEdge(N("alpha.two"), N("alpha.one"), DataflowKind.RETURN_VALUE),
            DataflowEdge(N("gamma.six"), N("gamma.five"), DataflowKind.ARGUMENT),
        ],
        label="anygraph-mini",
    )


def test_empty_model_is_valid_with_zero_stats():
    model = ArchitectureModel.build()
    assert model_validate(model) == []
    stats = model_stats(model)
    assert stats.components == 0
    assert stats.operations == 0
    assert stats.call_edges == 0
    assert stats.dataflow_edges == 0
    assert stats.connected_components == 0
    assert stats.total_observed_ns == 0


def test_anygraph_mini_is_valid():
    assert model_validate(anygraph_mini()) == []


def test_build_sorts_canonically_and_deduplicates():
    ops = [
        _operation("m.b", "m"),
        _operation("m.a", "m"),
        _operation("m.b", "m"),
    ]
    model = ArchitectureModel.build(components=[_component("m")], operations=ops)
    assert [o.signature.text for o in model.operations] == ["m.a", "m.b"]


def test_dangling_callee_reported():
    model = ArchitectureModel.build(
        components=[_component("m")],
        operations=[_operation("m.f", "m")],
        call_edges=[_call("m.f", "m.ghost")],
    )
    violations = model_validate(model)
    assert any(v.startswith("dangling-callee") and "m.ghost" in v for v in violations)


def test_dangling_owner_reported():
    model = ArchitectureModel.build(operations=[_operation("m.f", "m")])
    assert any(v.startswith("dangling-owner") for v in model_validate(model))


def test_dangling_parent_reported():
    model = ArchitectureModel.build(
        components=[_component("a.b", parent="a")],
    )
    assert any(v.startswith("dangling-parent") for v in model_validate(model))


def test_parent_must_be_strict_prefix():
    bad = ArchitectureModel.build(
        components=[_component("x"), _component("a.b", parent="x")],
    )
    assert any(v.startswith("parent-not-prefix") for v in model_validate(bad))


def test_duplicate_operation_names_reported():
    model = ArchitectureModel(
        components=(_component("m"),),
        operations=(
            _operation("m.f", "m", arity=0),
            _operation("m.f", "m", arity=2),
        ),
    )
    assert any(v.startswith("duplicate-operation") for v in model_validate(model))


def test_dynamic_edge_requires_weight():
    model = ArchitectureModel.build(
        components=[_component("m")],
        operations=[_operation("m.f", "m"), _operation("m.g", "m")],
        call_edges=[_call("m.f", "m.g", weight=0, provenance=Provenance.DYNAMIC)],
    )
    assert any(v.startswith("unobserved-dynamic-edge") for v in model_validate(model))
    # a both-provenance edge may carry weight 0: two purely static models can
    # share an edge without any runtime observation
    both = ArchitectureModel.build(
        components=[_component("m")],
        operations=[_operation("m.f", "m"), _operation("m.g", "m")],
        call_edges=[_call("m.f", "m.g", weight=0, provenance=Provenance.BOTH)],
    )
    assert model_validate(both) == []


def test_reserved_name_must_be_synthetic_kind():
    model = ArchitectureModel.build(
        components=[
            Component(SYNTHETIC_COMPONENT_NAME, ComponentKind.MODULE, None, Provenance.DYNAMIC)
        ],
    )
    assert any(v.startswith("reserved-name-not-synthetic") for v in model_validate(model))
    ok = ArchitectureModel.build(
        components=[
            Component(SYNTHETIC_COMPONENT_NAME, ComponentKind.SYNTHETIC, None, Provenance.DYNAMIC)
        ],
    )
    assert model_validate(ok) == []


def test_synthetic_kind_restricted_to_reserved_name():
    model = ArchitectureModel.build(
        components=[Component(N("m"), ComponentKind.SYNTHETIC, None, Provenance.DYNAMIC)],
    )
    assert any(v.startswith("synthetic-kind-wrong-name") for v in model_validate(model))


def test_stats_refuses_invalid_model():
    broken = ArchitectureModel.build(operations=[_operation("m.f", "m")])
    with pytest.raises(ModelValidationError):
        model_stats(broken)


def test_two_operations_one_edge_is_one_component():
    model = ArchitectureModel.build(
        components=[_component("m")],
        operations=[_operation("m.f", "m"), _operation("m.g", "m")],
        call_edges=[_call("m.f", "m.g")],
    )
    assert model_stats(model).connected_components == 1


def test_anygraph_mini_stats_match_hand_counts():
    stats = model_stats(anygraph_mini())
    assert stats.components == 3
    assert stats.operations == 7
    assert stats.call_edges == 3
    assert stats.dataflow_edges == 2
    assert stats.components_by_provenance == {"static": 2, "dynamic": 0, "both": 1}
    assert stats.operations_by_provenance == {"static": 4, "dynamic": 2, "both": 1}
    assert stats.call_edges_by_provenance == {"static": 1, "dynamic": 1, "both": 1}
    assert stats.total_observed_ns == 750
    # {one,two,three} + {four} + {five,six} + {seven}
    assert stats.connected_components == 4


def test_anygraph_mini_components_match_union_find_oracle():
    model = anygraph_mini()
    nodes = [o.signature.text for o in model.operations]
    edges = [(e.caller.text, e.callee.text) for e in model.call_edges]
    assert model_stats(model).connected_components == union_find_component_count(nodes, edges)


def _random_valid_model(rng: random.Random) -> ArchitectureModel:
    module_count = rng.randint(1, 6)
    components = [_component(f"m{i}") for i in range(module_count)]
    operations = []
    for i in range(module_count):
        for j in range(rng.randint(0, 5)):
            operations.append(
                _operation(
                    f"m{i}.f{j}",
                    f"m{i}",
                    arity=rng.randint(0, 4),
                    provenance=rng.choice(list(Provenance)),
                    observed_ns=rng.randint(0, 10_000),
                )
            )
    call_edges = []
    dataflow_edges = []
    if operations:
        used_pairs = set()
        for _ in range(rng.randint(0, 12)):
            caller = rng.choice(operations).signature
            callee = rng.choice(operations).signature
            if (caller, callee) in used_pairs:
                continue
            used_pairs.add((caller, callee))
            provenance = rng.choice(list(Provenance))
            weight = rng.randint(1, 9) if provenance is not Provenance.STATIC else 0
            call_edges.append(CallEdge(caller, callee, weight, provenance))
        for _ in range(rng.randint(0, 6)):
            dataflow_edges.append(
                DataflowEdge(
                    rng.choice(operations).signature,
                    rng.choice(operations).signature,
                    rng.choice(list(DataflowKind)),
                )
            )
    return ArchitectureModel.build(
        components, operations, call_edges, dataflow_edges, label="random"
    )


def test_stats_totals_match_set_cardinalities_on_random_models():
    rng = random.Random(20210)
    for _ in range(1000):
        model = _random_valid_model(rng)
        assert model_validate(model) == []
        stats = model_stats(model)
        assert stats.components == len(model.components)
        assert stats.operations == len(model.operations)
        assert stats.call_edges == len(model.call_edges)
        assert stats.dataflow_edges == len(model.dataflow_edges)
        assert sum(stats.components_by_provenance.values()) == stats.components
        assert sum(stats.operations_by_provenance.values()) == stats.operations
        assert sum(stats.call_edges_by_provenance.values()) == stats.call_edges


def test_connected_components_match_union_find_on_random_models():
    rng = random.Random(777)
    for _ in range(300):
        model = _random_valid_model(rng)
        nodes = [o.signature.text for o in model.operations]
        edges = [(e.caller.text, e.callee.text) for e in model.call_edges]
        assert model_stats(model).connected_components == union_find_component_count(
            nodes, edges
        )


def test_valid_model_lookups_never_fail():
    rng = random.Random(31337)
    for _ in range(200):
        model = _random_valid_model(rng)
        if model_validate(model) != []:
            continue
        ops = model.operation_by_signature()
        comps = model.component_by_name()
        for edge in model.call_edges:
            assert edge.caller in ops and edge.callee in ops
        for flow in model.dataflow_edges:
            assert flow.source in ops and flow.target in ops
        for op in model.operations:
            assert op.owner in comps
