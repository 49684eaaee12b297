"""Two-stage heuristic: constrained spectral clustering, then a
maximum-weight spanning tree on the reduced multigraph.

Stage 1 contracts each coherent group into a supernode, embeds the
|flow|-weighted normalized Laplacian, and runs a deterministic k-means
seeded (and pinned) at the supernodes; stray components are repaired by
reassignment to the neighbouring cluster with the strongest attachment.
Stage 2 keeps the heaviest spanning tree of cross edges as bridges, so
the switched set has minimal weight for the given partition.
"""

from __future__ import annotations

import time

import numpy as np

from .coherency import CoherencyGroups
from .errors import InfeasibleError, NetworkValidationError
from .network import Network, Partition, ReducedGraph, reduced_graph
from .solution import METHOD_TWO_STAGE, TreePartitionSolution, validate_solution

__all__ = [
    "constrained_spectral_partition",
    "max_weight_spanning_tree",
    "two_stage",
]


def max_weight_spanning_tree(rg: ReducedGraph) -> tuple[frozenset[int], frozenset[int]]:
    """Split reduced-graph edges into (retained tree, switched rest).

    Prim's algorithm on the multigraph, maximizing total retained weight;
    ties fall to the lower line id.  The switched set therefore has the
    minimal total weight over all spanning-tree choices.
    """
    if rg.k == 1:
        return frozenset(), frozenset(e.line_id for e in rg.edges)
    in_tree = {1}
    retained: set[int] = set()
    while len(in_tree) < rg.k:
        best = None
        for e in rg.edges:
            a_in, b_in = e.cluster_a in in_tree, e.cluster_b in in_tree
            if a_in == b_in:
                continue
            key = (-e.weight, e.line_id)
            if best is None or key < best[0]:
                best = (key, e)
        if best is None:
            raise NetworkValidationError("reduced graph is disconnected")
        edge = best[1]
        retained.add(edge.line_id)
        in_tree.add(edge.cluster_a if edge.cluster_b in in_tree else edge.cluster_b)
    switched = frozenset(e.line_id for e in rg.edges if e.line_id not in retained)
    return frozenset(retained), switched


def _contracted_weights(net: Network, groups: CoherencyGroups):
    """Supernode-contracted |flow| weight matrix and the node mapping."""
    member_of = {}
    for r, g in enumerate(groups.groups):
        for b in g:
            member_of[b] = r
    free = sorted(b.index for b in net.buses if b.index not in member_of)
    node_of_bus = {}
    for b in member_of:
        node_of_bus[b] = member_of[b]
    for pos, b in enumerate(free):
        node_of_bus[b] = groups.k + pos
    size = groups.k + len(free)
    weights = np.zeros((size, size))
    for ln in net.lines:
        a, b = node_of_bus[ln.from_bus], node_of_bus[ln.to_bus]
        if a == b:
            continue
        w = abs(ln.flow_mw)
        weights[a, b] += w
        weights[b, a] += w
    return weights, free, node_of_bus


def _embed(weights: np.ndarray, k: int) -> np.ndarray:
    """Row-normalized k smallest eigenvectors of the normalized Laplacian."""
    degree = weights.sum(axis=1)
    inv_sqrt = np.where(degree > 0, 1.0 / np.sqrt(np.maximum(degree, 1e-12)), 0.0)
    lap = np.eye(len(weights)) - inv_sqrt[:, None] * weights * inv_sqrt[None, :]
    _, vectors = np.linalg.eigh((lap + lap.T) / 2.0)
    emb = vectors[:, :k]
    for c in range(emb.shape[1]):
        lead = int(np.argmax(np.abs(emb[:, c])))
        if emb[lead, c] < 0:
            emb[:, c] = -emb[:, c]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return np.where(norms > 0, emb / np.maximum(norms, 1e-300), emb)


def _seeded_kmeans(emb: np.ndarray, k: int, max_iter: int = 200) -> np.ndarray:
    """Lloyd iteration with rows 0..k-1 pinned to their own clusters."""
    n = emb.shape[0]
    centroids = emb[:k].copy()
    labels = np.full(n, -1, dtype=int)
    labels[:k] = np.arange(k)
    for _it in range(max_iter):
        dist = np.linalg.norm(emb[:, None, :] - centroids[None, :, :], axis=2)
        new_labels = np.argmin(dist, axis=1)
        new_labels[:k] = np.arange(k)  # supernodes stay put
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for r in range(k):
            centroids[r] = emb[labels == r].mean(axis=0)
    return labels


def _components(buses: list[int], allowed: set[int], net: Network) -> list[list[int]]:
    comps = []
    seen: set[int] = set()
    for start in buses:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            b = queue.pop()
            for _lid, o in net.incident[b]:
                if o in allowed and o not in seen:
                    seen.add(o)
                    comp.append(o)
                    queue.append(o)
        comps.append(sorted(comp))
    return comps


def constrained_spectral_partition(net: Network, groups: CoherencyGroups) -> Partition:
    """Connected k-partition with each coherent group inside one cluster."""
    for g in groups.groups:
        for b in g:
            if not 0 <= b < net.n:
                raise NetworkValidationError(f"group bus index {b} out of range")

    weights, free, node_of_bus = _contracted_weights(net, groups)
    k = groups.k
    emb = _embed(weights, k)
    labels = _seeded_kmeans(emb, k)

    assignment = [0] * net.n
    for r, g in enumerate(groups.groups, start=1):
        for b in g:
            assignment[b] = r
    for b in free:
        assignment[b] = int(labels[node_of_bus[b]]) + 1

    # repair: move stray components (no group bus) to their heaviest neighbour
    group_buses = groups.all_members()
    for _round in range(net.n + 1):
        strays = []
        for r in range(1, k + 1):
            members = [i for i in range(net.n) if assignment[i] == r]
            for comp in _components(members, set(members), net):
                if not any(b in group_buses for b in comp):
                    strays.append((min(comp), r, comp))
        if not strays:
            break
        strays.sort()
        _, r, comp = strays[0]
        attach: dict[int, float] = {}
        comp_set = set(comp)
        for b in comp:
            for lid, o in net.incident[b]:
                if o in comp_set:
                    continue
                target = assignment[o]
                if target != r:
                    attach[target] = attach.get(target, 0.0) + abs(
                        net.line_by_id[lid].flow_mw
                    )
        if not attach:
            raise InfeasibleError("stray component has no neighbouring cluster")
        best = max(attach.items(), key=lambda kv: (kv[1], -kv[0]))
        for b in comp:
            assignment[b] = best[0]
    else:
        raise InfeasibleError("connectivity repair did not converge")

    partition = Partition(tuple(assignment), k)
    for r, members in enumerate(partition.clusters(), start=1):
        comps = _components(members, set(members), net)
        if len(comps) != 1:
            raise InfeasibleError(
                f"cluster {r} remains disconnected after repair "
                f"(coherent group spans {len(comps)} components)"
            )
    return partition


def two_stage(net: Network, groups: CoherencyGroups) -> TreePartitionSolution:
    """Spectral partition followed by the optimal bridge selection."""
    start = time.perf_counter()
    partition = constrained_spectral_partition(net, groups)
    rg = reduced_graph(net, partition)
    retained, switched = max_weight_spanning_tree(rg)
    weight_by_line = {e.line_id: e.weight for e in rg.edges}
    sol = TreePartitionSolution(
        partition=partition,
        switched=switched,
        retained_bridges=retained,
        disruption_mw=float(sum(weight_by_line[lid] for lid in sorted(switched))),
        method=METHOD_TWO_STAGE,
        runtime_s=time.perf_counter() - start,
    )
    validate_solution(net, sol, groups)
    return sol
