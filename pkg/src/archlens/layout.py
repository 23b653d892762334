"""Deterministic two-level force layout for grouped graphs.

The scheme is collapse-then-expand: every group is laid out in its own local
frame, treating child groups as single bodies whose mass is their leaf count
and whose edges are the aggregated cross-child edge weights. The root level
runs iterations_inter_group sweeps, nested levels iterations_intra_group.
Sibling layouts depend only on their own subtree and the seed, so they can
run in parallel and are translated into the parent frame afterwards.

Forces: repulsion = repulsion_constant * massA * massB / d^2 between every
body pair (Barnes-Hut approximation above 500 bodies), spring =
spring_constant * (d - spring_rest_length) * log(1 + weight) along edges.
Weightless edges (static-only calls carry weight 0) attract as weight 1; the
log term only amplifies observed traffic. Per-iteration displacement is
capped, and the cap decays by cooling_factor.

After each level's sweeps, overlapping sibling rectangles are pushed apart
along their center line until none intersect, so the containment invariants
hold exactly rather than probabilistically. Positions stay full-precision
floats here; rounding happens at the SVG boundary.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from archlens.errors import ConfigError
from archlens.grouped import Group, GroupedGraph

LEAF_HALF_W = 28.0
LEAF_HALF_H = 16.0

_GROUP_LABEL_STRIP = 18.0
_BARNES_HUT_THRESHOLD = 500
_BARNES_HUT_THETA = 0.8
_MAX_TREE_DEPTH = 48
_OVERLAP_SLACK = 1e-7
_SEPARATION_CLEARANCE = 0.5
_MAX_SEPARATION_PASSES = 500


@dataclass(frozen=True)
class LayoutParams:
    iterations_inter_group: int = 150
    iterations_intra_group: int = 80
    repulsion_constant: float = 1200.0
    spring_constant: float = 0.08
    spring_rest_length: float = 80.0
    cooling_factor: float = 0.92
    rng_seed: int = 42
    group_padding: float = 14.0

    def __post_init__(self):
        problems = []
        if self.iterations_inter_group < 1:
            problems.append("iterations_inter_group must be a positive integer")
        if self.iterations_intra_group < 1:
            problems.append("iterations_intra_group must be a positive integer")
        for field_name in ("repulsion_constant", "spring_constant", "spring_rest_length"):
            if getattr(self, field_name) <= 0:
                problems.append(f"{field_name} must be positive")
        if not 0 < self.cooling_factor < 1:
            problems.append("cooling_factor must lie strictly between 0 and 1")
        if not 0 <= self.rng_seed < 2**64:
            problems.append("rng_seed must fit in 64 unsigned bits")
        if self.group_padding < 0:
            problems.append("group_padding must be non-negative")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass
class LayoutResult:
    leaf_positions: dict[str, tuple[float, float]]
    group_rects: dict[str, tuple[float, float, float, float]]
    canvas: tuple[float, float, float, float]


# Body keys distinguish a child group from a leaf that shares its id.
_GROUP = "g"
_LEAF = "l"


@dataclass
class _LocalLayout:
    """One group's layout in its own frame: body centers around the sim
    origin, plus the enclosing rectangle (padding and label strip included)."""

    size: tuple[float, float]
    rect_center: tuple[float, float]
    positions: dict[tuple[str, str], tuple[float, float]]


def _group_seed(rng_seed: int, group_id: str) -> int:
    digest = blake2b(group_id.encode("utf-8"), digest_size=8).digest()
    return rng_seed ^ int.from_bytes(digest, "big")


def _leaf_counts(root: Group) -> dict[str, int]:
    counts: dict[str, int] = {}

    def walk(group: Group) -> int:
        total = len(group.leaves) + sum(walk(c) for c in group.children)
        counts[group.group_id] = total
        return total

    walk(root)
    return counts


def _aggregate_level_edges(
    g: GroupedGraph,
) -> dict[str, dict[tuple[tuple[str, str], tuple[str, str]], float]]:
    """Per group: undirected spring weights between its direct children.

    An edge contributes at the deepest group containing both endpoints,
    between the two child bodies its endpoints fall under there. Weightless
    edges count as 1 so purely static relations still attract.
    """
    paths: dict[str, tuple[str, ...]] = {}

    def walk(group: Group, trail: tuple[str, ...]) -> None:
        here = trail + (group.group_id,)
        for leaf in group.leaves:
            paths[leaf.leaf_id] = here
        for child in group.children:
            walk(child, here)

    walk(g.root, ())

    springs: dict[str, dict] = {}
    for edge in g.edges:
        source_path = paths.get(edge.source)
        target_path = paths.get(edge.target)
        if source_path is None or target_path is None:
            continue
        shared = 0
        for a, b in zip(source_path, target_path):
            if a != b:
                break
            shared += 1
        level = source_path[shared - 1]
        key_a = (
            (_GROUP, source_path[shared])
            if len(source_path) > shared
            else (_LEAF, edge.source)
        )
        key_b = (
            (_GROUP, target_path[shared])
            if len(target_path) > shared
            else (_LEAF, edge.target)
        )
        if key_a == key_b:
            continue
        pair = (key_a, key_b) if key_a <= key_b else (key_b, key_a)
        bucket = springs.setdefault(level, {})
        bucket[pair] = bucket.get(pair, 0.0) + max(1.0, float(edge.weight))
    return springs


# ---------------------------------------------------------------- forces


def _repulsion_exact(pos: np.ndarray, mass: np.ndarray, constant: float) -> np.ndarray:
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff**2).sum(axis=-1)
    np.fill_diagonal(d2, np.inf)
    d2 = np.maximum(d2, 1e-12)
    magnitude = constant * (mass[:, None] * mass[None, :]) / d2
    return (diff / np.sqrt(d2)[:, :, None] * magnitude[:, :, None]).sum(axis=1)


def _repulsion_barnes_hut(
    pos: np.ndarray, mass: np.ndarray, constant: float
) -> np.ndarray:
    n = len(pos)
    xs, ys = pos[:, 0], pos[:, 1]
    cx = (xs.min() + xs.max()) / 2.0
    cy = (ys.min() + ys.max()) / 2.0
    half = max(xs.max() - xs.min(), ys.max() - ys.min()) / 2.0 + 1e-6

    # Parallel arrays; kids[j] is None for leaves, else four child slots
    # (-1 = empty). Leaves hold point-index buckets (usually length 1;
    # longer only past the depth cap, which coincident points would force).
    centers = [(cx, cy, half)]
    kids: list[list[int] | None] = [None]
    buckets: list[list[int]] = [[]]
    node_mass = [0.0]
    com_x = [0.0]
    com_y = [0.0]

    def child(j: int, quadrant: int) -> int:
        slot = kids[j][quadrant]
        if slot >= 0:
            return slot
        jx, jy, jh = centers[j]
        qh = jh / 2.0
        nx = jx + (qh if quadrant & 1 else -qh)
        ny = jy + (qh if quadrant & 2 else -qh)
        kids[j][quadrant] = len(centers)
        centers.append((nx, ny, qh))
        kids.append(None)
        buckets.append([])
        node_mass.append(0.0)
        com_x.append(0.0)
        com_y.append(0.0)
        return kids[j][quadrant]

    def insert(j: int, i: int, depth: int) -> None:
        m = mass[i]
        node_mass[j] += m
        com_x[j] += m * xs[i]
        com_y[j] += m * ys[i]
        while True:
            if kids[j] is not None:
                jx, jy, _ = centers[j]
                quadrant = (1 if xs[i] >= jx else 0) | (2 if ys[i] >= jy else 0)
                j = child(j, quadrant)
                node_mass[j] += m
                com_x[j] += m * xs[i]
                com_y[j] += m * ys[i]
                depth += 1
                continue
            if not buckets[j] or depth >= _MAX_TREE_DEPTH:
                buckets[j].append(i)
                return
            moved = buckets[j]
            buckets[j] = []
            kids[j] = [-1, -1, -1, -1]
            jx, jy, _ = centers[j]
            for p in moved:
                quadrant = (1 if xs[p] >= jx else 0) | (2 if ys[p] >= jy else 0)
                k = child(j, quadrant)
                node_mass[k] += mass[p]
                com_x[k] += mass[p] * xs[p]
                com_y[k] += mass[p] * ys[p]
                buckets[k].append(p)
            # loop continues to place point i below j

    for i in range(n):
        insert(0, i, 0)

    theta2 = _BARNES_HUT_THETA * _BARNES_HUT_THETA
    forces = np.zeros((n, 2))
    for i in range(n):
        px, py, mi = xs[i], ys[i], mass[i]
        fx = fy = 0.0
        stack = [0]
        while stack:
            j = stack.pop()
            if node_mass[j] <= 0.0:
                continue
            slots = kids[j]
            if slots is None:
                for p in buckets[j]:
                    if p == i:
                        continue
                    dx = px - xs[p]
                    dy = py - ys[p]
                    d2 = max(dx * dx + dy * dy, 1e-12)
                    f = constant * mi * mass[p] / d2 / math.sqrt(d2)
                    fx += f * dx
                    fy += f * dy
                continue
            jx, jy, jh = centers[j]
            # Nodes containing the query point are always opened, so a
            # body never feels its own aggregated mass.
            inside = abs(px - jx) <= jh and abs(py - jy) <= jh
            ax = com_x[j] / node_mass[j]
            ay = com_y[j] / node_mass[j]
            dx = px - ax
            dy = py - ay
            d2 = max(dx * dx + dy * dy, 1e-12)
            side = 2.0 * jh
            if not inside and side * side < theta2 * d2:
                f = constant * mi * node_mass[j] / d2 / math.sqrt(d2)
                fx += f * dx
                fy += f * dy
            else:
                stack.extend(slot for slot in slots if slot >= 0)
        forces[i, 0] = fx
        forces[i, 1] = fy
    return forces


def _simulate(
    pos: np.ndarray,
    mass: np.ndarray,
    springs: tuple[np.ndarray, np.ndarray, np.ndarray] | None,
    params: LayoutParams,
    iterations: int,
) -> np.ndarray:
    n = len(pos)
    if n <= 1:
        return pos
    repulse = (
        _repulsion_barnes_hut if n > _BARNES_HUT_THRESHOLD else _repulsion_exact
    )
    cap = params.spring_rest_length
    rest = params.spring_rest_length
    for _ in range(iterations):
        forces = repulse(pos, mass, params.repulsion_constant)
        if springs is not None:
            a, b, log_weight = springs
            delta = pos[a] - pos[b]
            dist = np.maximum(np.sqrt((delta**2).sum(axis=1)), 1e-9)
            magnitude = params.spring_constant * (dist - rest) * log_weight
            pull = delta / dist[:, None] * magnitude[:, None]
            np.add.at(forces, a, -pull)
            np.add.at(forces, b, pull)
        norms = np.sqrt((forces**2).sum(axis=1))
        scale = np.minimum(1.0, cap / np.maximum(norms, 1e-12))
        pos = pos + forces * scale[:, None]
        cap *= params.cooling_factor
    return pos


# ---------------------------------------------------------------- overlap


def _separate(pos: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Push sibling boxes apart along their center lines until none overlap.

    Deterministic pair order; a sweep fallback guarantees termination even
    if iterative separation were to cycle (it does not in practice)."""
    n = len(pos)
    if n <= 1:
        return pos
    pos = pos.copy()
    for _ in range(_MAX_SEPARATION_PASSES):
        dx = pos[:, 0][None, :] - pos[:, 0][:, None]
        dy = pos[:, 1][None, :] - pos[:, 1][:, None]
        need_x = half[:, 0][None, :] + half[:, 0][:, None]
        need_y = half[:, 1][None, :] + half[:, 1][:, None]
        over = (np.abs(dx) < need_x - _OVERLAP_SLACK) & (
            np.abs(dy) < need_y - _OVERLAP_SLACK
        )
        over &= np.tri(n, n, k=-1, dtype=bool).T  # upper triangle: i < j
        pairs = np.argwhere(over)
        if len(pairs) == 0:
            return pos
        for i, j in pairs:
            ux = pos[j, 0] - pos[i, 0]
            uy = pos[j, 1] - pos[i, 1]
            gap_x = (half[i, 0] + half[j, 0]) - abs(ux)
            gap_y = (half[i, 1] + half[j, 1]) - abs(uy)
            if gap_x <= _OVERLAP_SLACK or gap_y <= _OVERLAP_SLACK:
                continue  # an earlier push this pass already cleared it
            norm = math.hypot(ux, uy)
            if norm < 1e-9:
                ux, uy = 1.0, 0.0
            else:
                ux, uy = ux / norm, uy / norm
            needed_x = gap_x / abs(ux) if abs(ux) > 1e-9 else math.inf
            needed_y = gap_y / abs(uy) if abs(uy) > 1e-9 else math.inf
            shift = (min(needed_x, needed_y) + _SEPARATION_CLEARANCE) / 2.0
            pos[i, 0] -= ux * shift
            pos[i, 1] -= uy * shift
            pos[j, 0] += ux * shift
            pos[j, 1] += uy * shift
    # Fallback: one non-overlapping row, disjoint x-intervals.
    order = sorted(range(n), key=lambda k: (pos[k, 0], k))
    cursor = float(pos[order[0], 0] - half[order[0], 0])
    for k in order:
        pos[k, 0] = cursor + half[k, 0]
        cursor += 2.0 * half[k, 0] + 1.0
    return pos


# ---------------------------------------------------------------- levels


def _min_group_width(label: str) -> float:
    return 7.0 * len(label) + 16.0


def _layout_level(
    group: Group,
    params: LayoutParams,
    is_root: bool,
    sizes: dict[str, tuple[float, float]],
    masses: dict[str, int],
    level_springs: dict[tuple[tuple[str, str], tuple[str, str]], float],
) -> _LocalLayout:
    keys: list[tuple[str, str]] = [(_GROUP, c.group_id) for c in group.children]
    keys.extend((_LEAF, leaf.leaf_id) for leaf in group.leaves)
    n = len(keys)
    strip = 0.0 if is_root else _GROUP_LABEL_STRIP
    pad = params.group_padding

    if n == 0:
        return _LocalLayout(
            size=(2 * pad, 2 * pad + strip),
            rect_center=(0.0, -strip / 2.0),
            positions={},
        )

    half = np.empty((n, 2))
    mass = np.empty(n)
    for row, (kind, ident) in enumerate(keys):
        if kind == _GROUP:
            w, h = sizes[ident]
            half[row] = (w / 2.0, h / 2.0)
            mass[row] = max(1, masses[ident])
        else:
            half[row] = (LEAF_HALF_W, LEAF_HALF_H)
            mass[row] = 1

    if n == 1:
        pos = np.zeros((1, 2))
    else:
        rng = random.Random(_group_seed(params.rng_seed, group.group_id))
        pos = np.empty((n, 2))
        for row in range(n):
            radius = math.sqrt(rng.random())
            angle = 2.0 * math.pi * rng.random()
            pos[row] = (radius * math.cos(angle), radius * math.sin(angle))

        index = {key: row for row, key in enumerate(keys)}
        springs = None
        if level_springs:
            a = np.array([index[pair[0]] for pair in level_springs], dtype=np.intp)
            b = np.array([index[pair[1]] for pair in level_springs], dtype=np.intp)
            log_weight = np.log1p(np.fromiter(level_springs.values(), dtype=float))
            springs = (a, b, log_weight)
        iterations = (
            params.iterations_inter_group if is_root else params.iterations_intra_group
        )
        pos = _simulate(pos, mass, springs, params, iterations)
        pos = _separate(pos, half)

    lo = (pos - half).min(axis=0)
    hi = (pos + half).max(axis=0)
    width = float(hi[0] - lo[0]) + 2 * pad
    height = float(hi[1] - lo[1]) + 2 * pad + strip
    if not is_root:
        width = max(width, _min_group_width(group.label))
    center_x = float(lo[0] + hi[0]) / 2.0
    center_y = float(lo[1] + hi[1]) / 2.0 - strip / 2.0
    return _LocalLayout(
        size=(width, height),
        rect_center=(center_x, center_y),
        positions={key: (float(x), float(y)) for key, (x, y) in zip(keys, pos)},
    )


def layout(g: GroupedGraph, p: LayoutParams, jobs: int = 1) -> LayoutResult:
    masses = _leaf_counts(g.root)
    level_springs = _aggregate_level_edges(g)
    groups = g.all_groups()

    # Bottom-up, deepest first, so every child size exists before its parent
    # simulates. Same-depth groups are independent; jobs > 1 runs them in
    # threads without changing the result.
    by_depth: dict[int, list[Group]] = {}

    def assign_depth(group: Group, depth: int) -> None:
        by_depth.setdefault(depth, []).append(group)
        for c in group.children:
            assign_depth(c, depth + 1)

    assign_depth(g.root, 0)
    local: dict[str, _LocalLayout] = {}
    sizes: dict[str, tuple[float, float]] = {}

    def run(group: Group) -> _LocalLayout:
        return _layout_level(
            group,
            p,
            group is g.root,
            sizes,
            masses,
            level_springs.get(group.group_id, {}),
        )

    for depth in sorted(by_depth, reverse=True):
        bucket = by_depth[depth]
        if jobs > 1 and len(bucket) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run, bucket))
        else:
            results = [run(group) for group in bucket]
        for group, result in zip(bucket, results):
            local[group.group_id] = result
            sizes[group.group_id] = result.size

    leaf_positions: dict[str, tuple[float, float]] = {}
    group_rects: dict[str, tuple[float, float, float, float]] = {}

    def resolve(group: Group, origin: tuple[float, float]) -> None:
        frame = local[group.group_id]
        for leaf in group.leaves:
            x, y = frame.positions[(_LEAF, leaf.leaf_id)]
            leaf_positions[leaf.leaf_id] = (origin[0] + x, origin[1] + y)
        for child in group.children:
            x, y = frame.positions[(_GROUP, child.group_id)]
            center = (origin[0] + x, origin[1] + y)
            child_frame = local[child.group_id]
            w, h = child_frame.size
            group_rects[child.group_id] = (center[0] - w / 2.0, center[1] - h / 2.0, w, h)
            resolve(
                child,
                (
                    center[0] - child_frame.rect_center[0],
                    center[1] - child_frame.rect_center[1],
                ),
            )

    # The root frame is the absolute frame: a lone node stays at the origin.
    resolve(g.root, (0.0, 0.0))
    if g.leaf_count() == 0 and g.group_count() == 0:
        canvas = (0.0, 0.0, 0.0, 0.0)
    else:
        root_frame = local[g.root.group_id]
        w, h = root_frame.size
        cx, cy = root_frame.rect_center
        canvas = (cx - w / 2.0, cy - h / 2.0, w, h)
    return LayoutResult(leaf_positions, group_rects, canvas)
