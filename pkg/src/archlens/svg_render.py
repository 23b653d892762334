"""SVG rendering of laid-out grouped graphs.

Groups are nested rounded rectangles, leaves are ellipses, every edge is
exactly one path (the arrowhead is a shared marker, not an extra path).
Dataflow kinds are dashed; stroke width grows with log(1 + weight). All
coordinates are rounded to three decimals at emission so equal layouts
produce byte-identical documents across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from archlens.grouped import DATAFLOW_EDGE_KINDS, GraphEdge, Group, GroupedGraph
from archlens.layout import LEAF_HALF_H, LEAF_HALF_W, LayoutResult

_LABEL_INSET = 6.0


@dataclass(frozen=True)
class SvgStyle:
    font_size: float = 11.0
    group_fill: str = "#f5f3ed"
    leaf_fill: str = "#d9e8f7"
    edge_color: str = "#4a4a4a"
    show_labels: bool = True


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def _stroke_width(weight: int) -> float:
    return 1.0 + 0.6 * math.log1p(max(0, weight))


def _ellipse_boundary(
    center: tuple[float, float], toward: tuple[float, float]
) -> tuple[float, float]:
    """Point on the leaf ellipse in the direction of `toward`."""
    dx = toward[0] - center[0]
    dy = toward[1] - center[1]
    norm = math.hypot(dx, dy)
    if norm < 1e-9:
        dx, dy, norm = 1.0, 0.0, 1.0
    ux, uy = dx / norm, dy / norm
    t = 1.0 / math.sqrt((ux / LEAF_HALF_W) ** 2 + (uy / LEAF_HALF_H) ** 2)
    return (center[0] + ux * t, center[1] + uy * t)


def _edge_path(edge: GraphEdge, positions: dict[str, tuple[float, float]]) -> str:
    source = positions[edge.source]
    target = positions[edge.target]
    if edge.source == edge.target:
        # Self loop: arc from the right of the ellipse to its top.
        cx, cy = source
        return (
            f"M {_fmt(cx + LEAF_HALF_W)} {_fmt(cy)}"
            f" C {_fmt(cx + LEAF_HALF_W + 26)} {_fmt(cy - 26)},"
            f" {_fmt(cx + 10)} {_fmt(cy - LEAF_HALF_H - 26)},"
            f" {_fmt(cx)} {_fmt(cy - LEAF_HALF_H)}"
        )
    start = _ellipse_boundary(source, target)
    end = _ellipse_boundary(target, source)
    return f"M {_fmt(start[0])} {_fmt(start[1])} L {_fmt(end[0])} {_fmt(end[1])}"


def render_svg(
    g: GroupedGraph, result: LayoutResult, style: SvgStyle | None = None
) -> str:
    style = style or SvgStyle()
    x, y, w, h = result.canvas
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<svg xmlns=\"http://www.w3.org/2000/svg\""
        f" viewBox=\"{_fmt(x)} {_fmt(y)} {_fmt(w)} {_fmt(h)}\""
        f" font-family=\"Helvetica,Arial,sans-serif\" font-size=\"{_fmt(style.font_size)}\">",
        "  <defs>",
        '    <marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5"'
        ' markerWidth="7" markerHeight="7" orient="auto-start-reverse">',
        f"      <polygon points=\"0,0 10,5 0,10\" fill={quoteattr(style.edge_color)}/>",
        "    </marker>",
        "  </defs>",
    ]

    def emit_group(group: Group) -> None:
        gx, gy, gw, gh = result.group_rects[group.group_id]
        lines.append(
            f"  <rect x=\"{_fmt(gx)}\" y=\"{_fmt(gy)}\""
            f" width=\"{_fmt(gw)}\" height=\"{_fmt(gh)}\" rx=\"6\""
            f" fill={quoteattr(style.group_fill)} stroke=\"#999999\"/>"
        )
        if style.show_labels:
            lines.append(
                f"  <text x=\"{_fmt(gx + _LABEL_INSET)}\""
                f" y=\"{_fmt(gy + style.font_size + 2.0)}\""
                f">{escape(group.label)}</text>"
            )
        for child in group.children:
            emit_group(child)

    for top in g.root.children:
        emit_group(top)

    for edge in g.edges:
        dash = (
            ' stroke-dasharray="6,4"' if edge.kind in DATAFLOW_EDGE_KINDS else ""
        )
        lines.append(
            f"  <path d=\"{_edge_path(edge, result.leaf_positions)}\" fill=\"none\""
            f" stroke={quoteattr(style.edge_color)}"
            f" stroke-width=\"{_fmt(_stroke_width(edge.weight))}\""
            f"{dash} marker-end=\"url(#arrow)\"/>"
        )

    for group in g.all_groups():
        for leaf in group.leaves:
            cx, cy = result.leaf_positions[leaf.leaf_id]
            lines.append(
                f"  <ellipse cx=\"{_fmt(cx)}\" cy=\"{_fmt(cy)}\""
                f" rx=\"{_fmt(LEAF_HALF_W)}\" ry=\"{_fmt(LEAF_HALF_H)}\""
                f" fill={quoteattr(style.leaf_fill)} stroke=\"#667788\"/>"
            )
            if style.show_labels:
                lines.append(
                    f"  <text x=\"{_fmt(cx)}\" y=\"{_fmt(cy + style.font_size * 0.35)}\""
                    f" text-anchor=\"middle\">{escape(leaf.label)}</text>"
                )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
