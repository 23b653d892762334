"""Acceptance gate: one test per shipping criterion.

Each test is the committed pass/fail line for one criterion; the details
live in the per-module suites. Everything here runs from checked-in
fixtures and seeded generators.
"""

from __future__ import annotations

import json
import random
import time
import xml.etree.ElementTree as ET
from pathlib import Path

from archlens.cli import main
from archlens.dot_reader import read_dot
from archlens.export import to_dot, to_graphml, to_json
from archlens.grouped import build_grouped_graph
from archlens.layout import LayoutParams, layout
from archlens.merging import merge_models
from archlens.model import model_stats
from archlens.names import SYNTHETIC_COMPONENT_NAME, SYNTHETIC_ENTRY_SIGNATURE
from archlens.static_analysis import build_static_model
from archlens.svg_render import render_svg
from archlens.traces import ingest_trace_logs, parse_trace_log

import uxmini_expected as expected
from graphgen import random_grouped_graph, random_hierarchical_model
from reference import count_edge_multiset
from test_layout import assert_layout_invariants
from test_merging import _same_content
from test_model import _random_valid_model
from test_traces import random_call_tree, tree_to_lines

FIXTURES = Path(__file__).parent / "fixtures"
PROJECT = FIXTURES / "uxmini"
TRACE = FIXTURES / "uxmini.trace"

SURVEY_PARAMS = LayoutParams(iterations_inter_group=30, iterations_intra_group=20)


def test_static_model_equals_hand_built_oracle_within_five_seconds():
    start = time.perf_counter()
    model = build_static_model(PROJECT)
    elapsed = time.perf_counter() - start
    assert model == expected.static_model()
    assert elapsed < 5.0


def test_fixture_trace_reproduces_reference_simulator_multiset():
    events = parse_trace_log(TRACE)
    by_trace: dict[int, list[tuple[int, int, str]]] = {}
    for event in sorted(events, key=lambda e: (e.trace_id, e.order_index)):
        by_trace.setdefault(event.trace_id, []).append(
            (event.order_index, event.depth, event.signature.text)
        )
    reference_counts = {
        (caller or SYNTHETIC_ENTRY_SIGNATURE.text, callee): count
        for (caller, callee), count in count_edge_multiset(by_trace).items()
    }
    model = ingest_trace_logs([TRACE])
    model_counts = {
        (e.caller.text, e.callee.text): e.weight for e in model.call_edges
    }
    assert model_counts == reference_counts


def test_thousand_random_call_trees_replay_exactly():
    from archlens.traces import parse_trace_text, reconstruct_traces, trace_call_pairs

    rng = random.Random(0xACCE97)
    for round_index in range(1000):
        events, expected_pairs = random_call_tree(rng)
        lines = tree_to_lines(round_index + 1, events)
        rng.shuffle(lines)
        traces = reconstruct_traces(parse_trace_text("\n".join(lines)))
        assert len(traces) == 1
        recovered = [
            (c.text if c else None, e.text) for c, e in trace_call_pairs(traces[0])
        ]
        assert recovered == expected_pairs


def test_merged_fixture_model_defragments_and_bridges_both_worlds():
    static = expected.static_model()
    dynamic = expected.dynamic_model()
    merged = merge_models(static, dynamic)
    parts_total = (
        model_stats(static).connected_components
        + model_stats(dynamic).connected_components
    )
    assert model_stats(merged).connected_components < parts_total

    synthetic_ops = {
        op.signature for op in merged.operations
        if op.owner == SYNTHETIC_COMPONENT_NAME
    }
    assert synthetic_ops
    provenance_of = {op.signature: op.provenance for op in merged.operations}
    touched = [
        provenance_of[e.callee if e.caller in synthetic_ops else e.caller].value
        for e in merged.call_edges
        if e.caller in synthetic_ops or e.callee in synthetic_ops
    ]
    assert any(p in ("static", "both") for p in touched)


def test_merge_algebra_holds_on_a_thousand_random_models():
    rng = random.Random(0xA16EB2A)
    models = [_random_valid_model(rng) for _ in range(1000)]
    for m in models:
        assert _same_content(merge_models(m, m), m)
    for a, b in zip(models[0::2], models[1::2]):
        assert _same_content(merge_models(a, b), merge_models(b, a))
    for a, b, c in zip(models[0::3], models[1::3], models[2::3]):
        assert _same_content(
            merge_models(merge_models(a, b), c),
            merge_models(a, merge_models(b, c)),
        )


GRAPHML_NS = "{http://graphml.graphdrawing.org/xmlns}"


def _assert_graphml_schema(text: str) -> None:
    """Structural conformance: declared keys, unique node ids, resolvable
    edge endpoints, data elements only under declared keys, compound
    nesting only inside nodes."""
    root = ET.fromstring(text)
    assert root.tag == f"{GRAPHML_NS}graphml"
    keys = {}
    for key in root.findall(f"{GRAPHML_NS}key"):
        assert key.get("id") and key.get("for") in ("node", "edge", "graph")
        assert key.get("attr.name") and key.get("attr.type")
        keys[key.get("id")] = key.get("for")

    node_ids: set[str] = set()
    edges: list[tuple[str, str]] = []

    def walk_graph(graph) -> None:
        assert graph.get("edgedefault") in ("directed", "undirected")
        for child in graph:
            if child.tag == f"{GRAPHML_NS}node":
                node_id = child.get("id")
                assert node_id and node_id not in node_ids
                node_ids.add(node_id)
                for sub in child:
                    if sub.tag == f"{GRAPHML_NS}graph":
                        walk_graph(sub)
                    else:
                        assert sub.tag == f"{GRAPHML_NS}data"
                        assert keys.get(sub.get("key")) == "node"
            elif child.tag == f"{GRAPHML_NS}edge":
                edges.append((child.get("source"), child.get("target")))
                for sub in child:
                    assert sub.tag == f"{GRAPHML_NS}data"
                    assert keys.get(sub.get("key")) == "edge"
            else:
                assert child.tag == f"{GRAPHML_NS}data"

    graphs = root.findall(f"{GRAPHML_NS}graph")
    assert len(graphs) == 1
    walk_graph(graphs[0])
    for source, target in edges:
        assert source in node_ids and target in node_ids


def test_grouped_dot_parses_back_and_graphml_conforms_for_random_models():
    rng = random.Random(0xF1DE)
    for _ in range(200):
        model = random_hierarchical_model(rng)
        assert read_dot(to_dot(model, grouped=True)) == build_grouped_graph(model)
        _assert_graphml_schema(to_graphml(model))
    _assert_graphml_schema(to_graphml(expected.merged_model()))


def test_layout_invariants_hold_across_random_graphs_and_runs_repeat_exactly():
    rng = random.Random(0x1AB0)
    shapes = [
        (rng.randint(5, 120), rng.randint(0, 10), rng.randint(0, 150))
        for _ in range(95)
    ] + [
        (520, 1, 700),  # big enough for the approximate-repulsion path
        (650, 8, 900),
        (800, 20, 1200),
        (900, 24, 1500),
        (1000, 30, 2000),
    ]
    for index, (leaves, groups, edges) in enumerate(shapes):
        g = random_grouped_graph(
            random.Random(index), leaves, groups, edges, max_depth=1 + index % 3
        )
        params = LayoutParams(
            iterations_inter_group=30,
            iterations_intra_group=20,
            rng_seed=index,
        )
        assert_layout_invariants(g, layout(g, params))

    g = random_grouped_graph(random.Random(7), 250, 12, 400)
    documents = {render_svg(g, layout(g, SURVEY_PARAMS)) for _ in range(3)}
    assert len(documents) == 1


def test_five_thousand_leaf_graph_renders_inside_the_minute_budget():
    g = random_grouped_graph(
        random.Random(99), leaf_count=5000, group_count=200,
        edge_count=20000, max_depth=2,
    )
    start = time.perf_counter()
    svg = render_svg(g, layout(g, LayoutParams()))
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    assert svg.count("<ellipse") == 5000


def test_injected_merge_failure_still_yields_valid_artifacts_and_exit_three(
    tmp_path, capsys
):
    payload = json.loads(to_json(expected.dynamic_model()))
    payload["call_edges"].append(
        {"caller": "ghost.fn", "callee": "ghost.other", "weight": 1,
         "provenance": "dynamic"}
    )
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text(json.dumps(payload), encoding="utf-8")
    out = tmp_path / "out"

    code = main(
        [
            "run",
            "--project-root", str(PROJECT),
            "--dynamic-model", str(corrupt),
            "--out-dir", str(out),
            "--seed", "3",
        ]
    )
    assert code == 3
    timing = json.loads((out / "timing.json").read_text(encoding="utf-8"))
    assert timing["merge"]["status"] == "failed"
    assert timing["total"]["status"] == "partial"

    surviving = expected.static_model()
    parsed = read_dot((out / "merged.dot").read_text(encoding="utf-8"))
    assert parsed == build_grouped_graph(surviving)
    _assert_graphml_schema((out / "merged.graphml").read_text(encoding="utf-8"))
    svg_root = ET.fromstring((out / "merged.svg").read_text(encoding="utf-8"))
    assert svg_root.tag == "{http://www.w3.org/2000/svg}svg"
