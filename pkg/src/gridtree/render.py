"""Graphviz DOT export of networks and tree-partition solutions.

Clusters become node fill colors, switched lines dashed red edges, and
retained bridges bold edges.  Output ordering is fixed (buses by index,
lines by id) so renders are byte-reproducible.
"""

from __future__ import annotations

from typing import Optional

from .errors import NetworkValidationError
from .network import Network, bridges
from .solution import TreePartitionSolution

# colorblind-friendly qualitative palette, cycled for large k
PALETTE = (
    "#a6cee3",
    "#b2df8a",
    "#fb9a99",
    "#fdbf6f",
    "#cab2d6",
    "#ffff99",
    "#1f78b4",
    "#33a02c",
    "#ff7f00",
    "#6a3d9a",
)


def to_dot(net: Network, solution: Optional[TreePartitionSolution] = None) -> str:
    if solution is not None and len(solution.partition.assignment) != net.n:
        raise NetworkValidationError("solution does not match the network")
    out = ["graph network {"]
    out.append('  node [shape=circle style=filled fontsize=10 fixedsize=false];')
    if solution is None:
        bold = set(bridges(net))
        for b in net.buses:
            out.append(f'  b{b.id} [fillcolor="#dddddd"];')
        for ln in net.lines:
            attrs = " [penwidth=2.5]" if ln.id in bold else ""
            out.append(f"  b{net.buses[ln.from_bus].id} -- b{net.buses[ln.to_bus].id}{attrs};")
    else:
        assign = solution.partition.assignment
        for b in net.buses:
            color = PALETTE[(assign[b.index] - 1) % len(PALETTE)]
            out.append(f'  b{b.id} [fillcolor="{color}"];')
        for ln in net.lines:
            attrs = []
            if ln.id in solution.switched:
                attrs.append('style=dashed color="#e31a1c"')
            elif ln.id in solution.retained_bridges:
                attrs.append("penwidth=2.5")
            suffix = f" [{' '.join(attrs)}]" if attrs else ""
            out.append(
                f"  b{net.buses[ln.from_bus].id} -- b{net.buses[ln.to_bus].id}{suffix};"
            )
    out.append("}")
    return "\n".join(out) + "\n"
