"""Grouped (compound) graph: the layout-facing view of an architecture model.

A GroupedGraph partitions leaf nodes under a tree of groups with a single
artificial root. Built from a model, groups mirror the component hierarchy
and leaves are operations; parsed from DOT, clusters become groups. Both
constructions canonicalize ordering, so "same structure" is plain equality.
"""

from __future__ import annotations

from dataclasses import dataclass

from archlens.model import ArchitectureModel, Component, OperationEntity
from archlens.names import QualifiedName

ROOT_GROUP_ID = "G"

# Edge kinds the renderer treats as dataflow (drawn dashed).
DATAFLOW_EDGE_KINDS = frozenset({"return-value", "argument"})


def _short_label(node_id: str) -> str:
    return node_id.rpartition(".")[2]


@dataclass(frozen=True)
class Leaf:
    leaf_id: str
    label: str


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    weight: int = 1
    kind: str = "call"


@dataclass(frozen=True)
class Group:
    group_id: str
    label: str
    children: tuple["Group", ...] = ()
    leaves: tuple[Leaf, ...] = ()


def _canonical_group(group: Group) -> Group:
    return Group(
        group_id=group.group_id,
        label=group.label,
        children=tuple(
            sorted(
                (_canonical_group(c) for c in group.children),
                key=lambda c: c.group_id,
            )
        ),
        leaves=tuple(sorted(group.leaves, key=lambda leaf: leaf.leaf_id)),
    )


@dataclass(frozen=True)
class GroupedGraph:
    root: Group
    edges: tuple[GraphEdge, ...] = ()

    @classmethod
    def build(cls, root: Group, edges: list[GraphEdge] | tuple[GraphEdge, ...]) -> "GroupedGraph":
        """Canonicalize ordering; edge duplicates are kept (multiset semantics)."""
        ordered = sorted(edges, key=lambda e: (e.source, e.target, e.kind, e.weight))
        return cls(root=_canonical_group(root), edges=tuple(ordered))

    def all_groups(self) -> list[Group]:
        """Every group in preorder, root first."""
        out: list[Group] = []
        stack = [self.root]
        while stack:
            group = stack.pop()
            out.append(group)
            stack.extend(reversed(group.children))
        return out

    def group_count(self) -> int:
        """Groups excluding the artificial root."""
        return len(self.all_groups()) - 1

    def leaf_count(self) -> int:
        return sum(len(g.leaves) for g in self.all_groups())

    def leaf_group_ids(self) -> dict[str, str]:
        """leaf id -> id of the group that holds it (last wins on duplicates)."""
        owner: dict[str, str] = {}
        for group in self.all_groups():
            for leaf in group.leaves:
                owner[leaf.leaf_id] = group.group_id
        return owner

    def validate(self) -> list[str]:
        violations: list[str] = []
        seen_groups: set[str] = set()
        seen_leaves: set[str] = set()
        for group in self.all_groups():
            if group.group_id in seen_groups:
                violations.append(f"duplicate group id {group.group_id!r}")
            seen_groups.add(group.group_id)
            for leaf in group.leaves:
                if leaf.leaf_id in seen_leaves:
                    violations.append(
                        f"leaf {leaf.leaf_id!r} belongs to more than one group"
                    )
                seen_leaves.add(leaf.leaf_id)
        for edge in self.edges:
            for endpoint in (edge.source, edge.target):
                if endpoint not in seen_leaves:
                    violations.append(
                        f"edge endpoint {endpoint!r} is not a leaf of any group"
                    )
        return violations


def build_grouped_graph(
    m: ArchitectureModel, include_dataflow: bool = True
) -> GroupedGraph:
    """Groups = component hierarchy, leaves = operations, edges = calls
    (plus dataflow at weight 1 unless disabled). Root carries the model label."""
    children: dict[QualifiedName | None, list[Component]] = {}
    for c in m.components:
        children.setdefault(c.parent, []).append(c)
    ops_by_owner: dict[QualifiedName, list[OperationEntity]] = {}
    for o in m.operations:
        ops_by_owner.setdefault(o.owner, []).append(o)

    def make_group(comp: Component) -> Group:
        return Group(
            group_id=comp.name.text,
            label=comp.name.last,
            children=tuple(make_group(sub) for sub in children.get(comp.name, [])),
            leaves=tuple(
                Leaf(o.signature.text, o.signature.last)
                for o in ops_by_owner.get(comp.name, [])
            ),
        )

    root = Group(
        group_id=ROOT_GROUP_ID,
        label=m.label,
        children=tuple(make_group(c) for c in children.get(None, [])),
    )
    edges = [
        GraphEdge(e.caller.text, e.callee.text, e.weight, "call")
        for e in m.call_edges
    ]
    if include_dataflow:
        edges.extend(
            GraphEdge(f.source.text, f.target.text, 1, f.kind.value)
            for f in m.dataflow_edges
        )
    return GroupedGraph.build(root, edges)
