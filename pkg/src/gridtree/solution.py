"""Shared tree-partition solution type, validation, and JSON schema.

Every solver returns the same structure and every emitted solution is
re-validated against the full set of invariants before it is trusted:
the retained cross edges must form the k-1 new bridges of a connected
post-switching network in which the partition is a tree partition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import NetworkValidationError
from .network import (
    Network,
    Partition,
    apply_switching,
    cross_edges,
    is_connected,
    is_tree_partition,
)

METHOD_TWO_STAGE = "TWO_STAGE"
METHOD_MILP = "MILP"
METHOD_SSR = "SSR"
METHOD_ORACLE = "ORACLE"

__all__ = [
    "TreePartitionSolution",
    "validate_solution",
    "solution_to_json",
    "solution_from_json",
    "METHOD_TWO_STAGE",
    "METHOD_MILP",
    "METHOD_SSR",
    "METHOD_ORACLE",
]


@dataclass(frozen=True)
class TreePartitionSolution:
    partition: Partition
    switched: frozenset[int]
    retained_bridges: frozenset[int]
    disruption_mw: float
    method: str
    runtime_s: float = 0.0


def validate_solution(net: Network, sol: TreePartitionSolution, groups=None, tol: float = 1e-6):
    """Raise NetworkValidationError unless every solution invariant holds."""
    p = sol.partition
    cross = set(cross_edges(net, p))
    if sol.switched & sol.retained_bridges:
        raise NetworkValidationError("switched and retained line sets overlap")
    if sol.switched | sol.retained_bridges != cross:
        raise NetworkValidationError("switched + retained lines do not equal the cross edges")
    if len(sol.retained_bridges) != p.k - 1:
        raise NetworkValidationError(
            f"expected {p.k - 1} retained bridges, got {len(sol.retained_bridges)}"
        )
    post = apply_switching(net, sol.switched)
    if not is_connected(post):
        raise NetworkValidationError("post-switching network is disconnected")
    if not is_tree_partition(post, p):
        raise NetworkValidationError("partition is not a tree partition after switching")
    if groups is not None:
        for r, members in enumerate(groups.groups, start=1):
            for bus in members:
                if p.assignment[bus] != r:
                    raise NetworkValidationError(
                        f"coherent generator bus {bus} left cluster {r}"
                    )
    actual = sum(abs(net.line_by_id[lid].flow_mw) for lid in sorted(sol.switched))
    if abs(actual - sol.disruption_mw) > tol:
        raise NetworkValidationError(
            f"reported disruption {sol.disruption_mw} != recomputed {actual}"
        )


def _pair(net: Network, line_id: int) -> list[int]:
    ln = net.line_by_id[line_id]
    a = net.buses[ln.from_bus].id
    b = net.buses[ln.to_bus].id
    return [min(a, b), max(a, b)]


def solution_to_json(net: Network, sol: TreePartitionSolution, include_runtime: bool = True) -> str:
    doc = {
        "method": sol.method,
        "k": sol.partition.k,
        "clusters": [
            sorted(net.buses[i].id for i in members)
            for members in sol.partition.clusters()
        ],
        "switched": sorted(_pair(net, lid) for lid in sol.switched),
        "bridges": sorted(_pair(net, lid) for lid in sol.retained_bridges),
        "disruption_mw": sol.disruption_mw,
        "runtime_s": sol.runtime_s if include_runtime else 0.0,
    }
    return json.dumps(doc, indent=2) + "\n"


def solution_from_json(net: Network, text: str) -> TreePartitionSolution:
    doc = json.loads(text)
    pair_to_line = {}
    for ln in net.lines:
        a = net.buses[ln.from_bus].id
        b = net.buses[ln.to_bus].id
        pair_to_line[(min(a, b), max(a, b))] = ln.id

    def line_ids(pairs):
        out = set()
        for a, b in pairs:
            key = (min(a, b), max(a, b))
            if key not in pair_to_line:
                raise NetworkValidationError(f"no line between buses {a} and {b}")
            out.add(pair_to_line[key])
        return frozenset(out)

    assignment = [0] * net.n
    for r, members in enumerate(doc["clusters"], start=1):
        for bus_id in members:
            assignment[net.index_of(bus_id)] = r
    partition = Partition(tuple(assignment), doc["k"])
    return TreePartitionSolution(
        partition=partition,
        switched=line_ids(doc["switched"]),
        retained_bridges=line_ids(doc["bridges"]),
        disruption_mw=doc["disruption_mw"],
        method=doc["method"],
        runtime_s=doc.get("runtime_s", 0.0),
    )
