"""Force-layout invariants, determinism, and degenerate cases."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from archlens.errors import ConfigError
from archlens.grouped import ROOT_GROUP_ID, GraphEdge, Group, GroupedGraph, Leaf
from archlens.layout import (
    LEAF_HALF_H,
    LEAF_HALF_W,
    LayoutParams,
    LayoutResult,
    _repulsion_barnes_hut,
    _repulsion_exact,
    layout,
)

from graphgen import random_grouped_graph
from reference import find_sibling_overlaps, point_in_rect, rect_in_rect

FAST = LayoutParams(iterations_inter_group=40, iterations_intra_group=25)


def _graph(root: Group, edges: list[GraphEdge] | None = None) -> GroupedGraph:
    return GroupedGraph.build(root, edges or [])


def _parent_map(g: GroupedGraph) -> dict[str, str | None]:
    parents: dict[str, str | None] = {}

    def walk(group: Group, parent: str | None) -> None:
        parents[group.group_id] = parent
        for child in group.children:
            walk(child, group.group_id)

    walk(g.root, None)
    return parents


def assert_layout_invariants(g: GroupedGraph, result: LayoutResult) -> None:
    """Leaf containment, sibling disjointness, child nesting, canvas cover."""
    holder = g.leaf_group_ids()
    for leaf_id, position in result.leaf_positions.items():
        rect = (
            result.canvas
            if holder[leaf_id] == g.root.group_id
            else result.group_rects[holder[leaf_id]]
        )
        assert point_in_rect(position, rect), f"leaf {leaf_id} escaped its group"

    sibling_sets = [
        [c.group_id for c in group.children] for group in g.all_groups()
    ]
    assert find_sibling_overlaps(result.group_rects, sibling_sets) == []

    parents = _parent_map(g)
    for group_id, rect in result.group_rects.items():
        outer = (
            result.canvas
            if parents[group_id] == g.root.group_id
            else result.group_rects[parents[group_id]]
        )
        assert rect_in_rect(rect, outer), f"group {group_id} escaped its parent"


# ---------------------------------------------------------------- params


@pytest.mark.parametrize(
    "overrides",
    [
        {"iterations_inter_group": 0},
        {"iterations_intra_group": -3},
        {"repulsion_constant": 0.0},
        {"spring_constant": -1.0},
        {"spring_rest_length": 0.0},
        {"cooling_factor": 0.0},
        {"cooling_factor": 1.0},
        {"rng_seed": -1},
        {"rng_seed": 2**64},
        {"group_padding": -0.1},
    ],
)
def test_invalid_params_rejected(overrides):
    with pytest.raises(ConfigError):
        LayoutParams(**overrides)


def test_default_params_are_valid():
    p = LayoutParams()
    assert 0 < p.cooling_factor < 1
    assert p.iterations_inter_group > 0


# ---------------------------------------------------------------- degenerate


def test_empty_graph():
    result = layout(_graph(Group(ROOT_GROUP_ID, "")), FAST)
    assert result.leaf_positions == {}
    assert result.group_rects == {}
    assert result.canvas == (0.0, 0.0, 0.0, 0.0)


def test_single_leaf_sits_at_origin():
    g = _graph(Group(ROOT_GROUP_ID, "", leaves=(Leaf("only", "only"),)))
    result = layout(g, LayoutParams())
    assert result.leaf_positions["only"] == (0.0, 0.0)
    pad = LayoutParams().group_padding
    assert result.canvas == (
        -LEAF_HALF_W - pad,
        -LEAF_HALF_H - pad,
        2 * (LEAF_HALF_W + pad),
        2 * (LEAF_HALF_H + pad),
    )


def test_single_leaf_in_single_group_gets_padding_box():
    g = _graph(
        Group(
            ROOT_GROUP_ID,
            "",
            children=(Group("box", "box", leaves=(Leaf("n", "n"),)),),
        )
    )
    result = layout(g, LayoutParams())
    x, y, w, h = result.group_rects["box"]
    pad = LayoutParams().group_padding
    assert w >= 2 * (LEAF_HALF_W + pad)
    assert h >= 2 * (LEAF_HALF_H + pad)
    # The group rectangle centers on the origin; the leaf sits in the content
    # area below the label strip.
    assert x + w / 2 == 0.0 and y + h / 2 == 0.0
    assert point_in_rect(result.leaf_positions["n"], (x, y, w, h))
    assert_layout_invariants(g, result)


def test_two_disconnected_leaves_end_at_least_rest_length_apart():
    g = _graph(
        Group(
            ROOT_GROUP_ID,
            "",
            children=(
                Group("g0", "g0", leaves=(Leaf("a", "a"), Leaf("b", "b"))),
            ),
        )
    )
    params = LayoutParams()
    result = layout(g, params)
    ax, ay = result.leaf_positions["a"]
    bx, by = result.leaf_positions["b"]
    assert math.hypot(ax - bx, ay - by) >= params.spring_rest_length


def test_empty_group_still_gets_a_rectangle():
    g = _graph(
        Group(
            ROOT_GROUP_ID,
            "",
            children=(
                Group("full", "full", leaves=(Leaf("n", "n"),)),
                Group("empty", "empty"),
            ),
        )
    )
    result = layout(g, FAST)
    assert "empty" in result.group_rects
    assert_layout_invariants(g, result)


# ---------------------------------------------------------------- invariants


def test_invariants_on_random_graphs():
    rng = random.Random(0x1A9)
    for _ in range(15):
        g = random_grouped_graph(
            rng,
            leaf_count=rng.randint(1, 80),
            group_count=rng.randint(0, 12),
            edge_count=rng.randint(0, 120),
            max_depth=rng.randint(1, 3),
        )
        result = layout(g, FAST)
        assert set(result.leaf_positions) == {
            leaf.leaf_id for group in g.all_groups() for leaf in group.leaves
        }
        assert set(result.group_rects) == {
            group.group_id for group in g.all_groups()[1:]
        }
        assert_layout_invariants(g, result)


def test_invariants_with_leaves_directly_under_root():
    g = random_grouped_graph(
        random.Random(7), leaf_count=30, group_count=0, edge_count=40
    )
    result = layout(g, FAST)
    assert result.group_rects == {}
    assert_layout_invariants(g, result)


def test_connected_groups_sit_closer_than_strangers():
    leaves_a = tuple(Leaf(f"a{i}", "a") for i in range(3))
    leaves_b = tuple(Leaf(f"b{i}", "b") for i in range(3))
    leaves_c = tuple(Leaf(f"c{i}", "c") for i in range(3))
    g = _graph(
        Group(
            ROOT_GROUP_ID,
            "",
            children=(
                Group("A", "A", leaves=leaves_a),
                Group("B", "B", leaves=leaves_b),
                Group("C", "C", leaves=leaves_c),
            ),
        ),
        [GraphEdge("a0", "b0", 40), GraphEdge("a1", "b1", 40)],
    )
    result = layout(g, LayoutParams())

    def gap(first: str, second: str) -> float:
        # Smallest axis clearance between two rectangles (0 while touching).
        ax, ay, aw, ah = result.group_rects[first]
        bx, by, bw, bh = result.group_rects[second]
        gap_x = abs((ax + aw / 2) - (bx + bw / 2)) - (aw + bw) / 2
        gap_y = abs((ay + ah / 2) - (by + bh / 2)) - (ah + bh) / 2
        return max(gap_x, gap_y, 0.0)

    # The spring between A and B pulls them together until they nearly touch;
    # C has no pull and ends well clear of both.
    ab = gap("A", "B")
    assert ab < gap("A", "C")
    assert ab < gap("B", "C")


# ---------------------------------------------------------------- determinism


def test_fixed_seed_reproduces_layout_exactly():
    g = random_grouped_graph(
        random.Random(11), leaf_count=200, group_count=10, edge_count=300
    )
    params = LayoutParams(iterations_inter_group=60, iterations_intra_group=40)
    first = layout(g, params)
    for _ in range(2):
        again = layout(g, params)
        assert again.leaf_positions == first.leaf_positions
        assert again.group_rects == first.group_rects
        assert again.canvas == first.canvas
    sibling_sets = [[c.group_id for c in group.children] for group in g.all_groups()]
    assert find_sibling_overlaps(first.group_rects, sibling_sets) == []


def test_parallel_jobs_do_not_change_the_result():
    g = random_grouped_graph(
        random.Random(23), leaf_count=60, group_count=9, edge_count=80, max_depth=3
    )
    serial = layout(g, FAST, jobs=1)
    threaded = layout(g, FAST, jobs=4)
    assert serial.leaf_positions == threaded.leaf_positions
    assert serial.group_rects == threaded.group_rects
    assert serial.canvas == threaded.canvas


def test_different_seed_moves_nodes():
    g = random_grouped_graph(
        random.Random(5), leaf_count=12, group_count=2, edge_count=10
    )
    a = layout(g, FAST)
    b = layout(g, LayoutParams(
        iterations_inter_group=40, iterations_intra_group=25, rng_seed=991
    ))
    assert a.leaf_positions != b.leaf_positions


# ---------------------------------------------------------------- barnes-hut


def test_barnes_hut_approximates_exact_repulsion():
    rng = np.random.default_rng(3)
    pos = rng.uniform(-500, 500, size=(200, 2))
    mass = rng.uniform(1, 20, size=200)
    exact = _repulsion_exact(pos.copy(), mass, 1200.0)
    approx = _repulsion_barnes_hut(pos.copy(), mass, 1200.0)
    norms = np.sqrt((exact**2).sum(axis=1))
    errors = np.sqrt(((exact - approx) ** 2).sum(axis=1))
    # Relative bound with an absolute floor: bodies whose net force nearly
    # cancels have no meaningful relative error.
    assert np.all(errors <= 0.2 * norms + 0.05 * norms.mean())


def test_barnes_hut_handles_coincident_points():
    pos = np.zeros((3, 2))
    pos[2] = (10.0, 0.0)
    mass = np.ones(3)
    forces = _repulsion_barnes_hut(pos, mass, 100.0)
    # The two coincident bodies feel the distant one identically.
    assert np.allclose(forces[0], forces[1])
    assert forces[2, 0] > 0


def test_large_single_group_uses_barnes_hut_and_keeps_invariants():
    g = random_grouped_graph(
        random.Random(31), leaf_count=520, group_count=1, edge_count=400
    )
    result = layout(
        g, LayoutParams(iterations_inter_group=4, iterations_intra_group=6)
    )
    assert_layout_invariants(g, result)
