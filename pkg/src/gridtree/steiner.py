"""Exact minimum-edge Steiner trees and conflict-free partial fixings.

The solver is Dreyfus-Wagner dynamic programming over terminal subsets
(unit edge weights).  Two optimal-preserving reductions keep terminal
counts small on real grids before the exponential DP runs: edges joining
two terminals are contracted, and non-terminal leaves are pruned.  The
terminal budget applies after reduction.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import BudgetError, NetworkValidationError
from .network import Network

MAX_TERMINALS = 14
_INF = np.int32(10**6)

__all__ = ["SteinerTree", "SteinerFixings", "steiner_tree", "build_fixings", "MAX_TERMINALS"]


@dataclass(frozen=True)
class SteinerTree:
    """A tree (bus set, line set) spanning the given terminal buses."""

    nodes: frozenset[int]
    edges: frozenset[int]
    terminals: frozenset[int]

    def __post_init__(self):
        if not self.terminals <= self.nodes:
            raise NetworkValidationError("terminals not spanned by tree nodes")
        if len(self.edges) != len(self.nodes) - 1:
            raise NetworkValidationError("edge count does not match a tree")


@dataclass(frozen=True)
class SteinerFixings:
    """Conflict-free bus->cluster and line->cluster pre-assignments."""

    bus_fix: Mapping[int, int]
    edge_fix: Mapping[int, int]


class _Contraction:
    """Working multigraph with union-find node merging.

    Each surviving unordered supernode pair keeps one representative
    original line (lowest id); merged terminal components remember the
    contracted lines, which always belong to the final tree.
    """

    def __init__(self, net: Network, terminals: set[int]):
        self.net = net
        self.terminals = set(terminals)
        self.forced_edges: list[int] = []
        # rep pair -> line id
        self.edges: dict[tuple[int, int], int] = {}
        for ln in net.lines:
            key = (min(ln.from_bus, ln.to_bus), max(ln.from_bus, ln.to_bus))
            if key not in self.edges or ln.id < self.edges[key]:
                self.edges[key] = ln.id

    def contract_terminal_edges(self):
        while True:
            candidates = [
                (lid, key)
                for key, lid in self.edges.items()
                if key[0] in self.terminals and key[1] in self.terminals
            ]
            if not candidates:
                return
            lid, (a, b) = min(candidates)
            keep, gone = min(a, b), max(a, b)
            self.forced_edges.append(lid)
            self.terminals.discard(gone)
            rebuilt: dict[tuple[int, int], int] = {}
            for (u, v), e in self.edges.items():
                ru = keep if u == gone else u
                rv = keep if v == gone else v
                if ru == rv:
                    continue
                k2 = (min(ru, rv), max(ru, rv))
                if k2 not in rebuilt or e < rebuilt[k2]:
                    rebuilt[k2] = e
            self.edges = rebuilt

    def prune_leaves(self):
        while True:
            degree: Counter = Counter()
            for a, b in self.edges:
                degree[a] += 1
                degree[b] += 1
            drop = {
                node
                for node in degree
                if node not in self.terminals and degree[node] <= 1
            }
            if not drop:
                return
            self.edges = {
                (a, b): e
                for (a, b), e in self.edges.items()
                if a not in drop and b not in drop
            }


def _dreyfus_wagner(dist, terminals):
    """Subset DP; returns dp values and reconstruction choices."""
    t = len(terminals)
    n = dist.shape[0]
    size = 1 << t
    dp = np.full((size, n), _INF, dtype=np.int32)
    # choice: (-1 base) | (submask for split) | (-2 - u for walk from node u)
    choice = np.full((size, n), -1, dtype=np.int64)
    for i, term in enumerate(terminals):
        dp[1 << i] = dist[term]
        choice[1 << i] = -2 - term
        choice[1 << i, term] = -1

    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        best = dp[mask].copy()
        pick = choice[mask].copy()
        sub = (mask - 1) & mask
        while sub:
            other = mask ^ sub
            if sub < other:  # each unordered split once
                merged = dp[sub].astype(np.int64) + dp[other]
                better = merged < best
                best = np.where(better, merged, best).astype(np.int32)
                pick = np.where(better, sub, pick)
            sub = (sub - 1) & mask
        # close under shortest-path walks: dp[mask][v] = min_u best[u] + dist(u, v)
        through = best.astype(np.int64)[:, None] + dist
        walk_src = np.argmin(through, axis=0)
        walk_val = through[walk_src, np.arange(n)].astype(np.int32)
        better = walk_val < best
        dp[mask] = np.where(better, walk_val, best)
        choice[mask] = np.where(better, -2 - walk_src, pick)

    return dp, choice


def steiner_tree(net: Network, terminals: Iterable[int]) -> SteinerTree:
    """Minimum-edge Steiner tree spanning the terminal buses.

    Exact for up to 14 terminals after reduction; beyond that a
    BudgetError suggests supplying smaller groups.
    """
    term_set = set(terminals)
    if not term_set:
        raise NetworkValidationError("terminal set is empty")
    for b in term_set:
        if not 0 <= b < net.n:
            raise NetworkValidationError(f"terminal {b} out of range")

    work = _Contraction(net, term_set)
    work.contract_terminal_edges()
    work.prune_leaves()

    terms = sorted(work.terminals)
    if len(terms) > MAX_TERMINALS:
        raise BudgetError(
            f"{len(terms)} terminals after reduction exceed the exact budget "
            f"({MAX_TERMINALS}); split the group or use fewer terminals"
        )

    chosen: set[int] = set(work.forced_edges)
    if len(terms) > 1:
        all_nodes = sorted({v for key in work.edges for v in key} | set(terms))
        adjacency: dict[int, list[tuple[int, int]]] = {v: [] for v in all_nodes}
        for (a, b), lid in work.edges.items():
            adjacency[a].append((b, lid))
            adjacency[b].append((a, lid))

        # BFS levels from each terminal; nodes further from every terminal
        # than a known feasible tree size cannot appear in an optimal tree
        term_dist: dict[int, dict[int, int]] = {}
        for t in terms:
            level = {t: 0}
            frontier = [t]
            d = 0
            while frontier:
                d += 1
                nxt = []
                for u in frontier:
                    for v, _lid in adjacency[u]:
                        if v not in level:
                            level[v] = d
                            nxt.append(v)
                frontier = nxt
            term_dist[t] = level
        upper = sum(term_dist[terms[0]].get(t, int(_INF)) for t in terms[1:])
        nodes = sorted(
            v
            for v in all_nodes
            if min(term_dist[t].get(v, int(_INF)) for t in terms) <= upper
        )
        index = {v: i for i, v in enumerate(nodes)}
        n = len(nodes)
        keep = set(nodes)
        neighbor: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (a, b), lid in work.edges.items():
            if a in keep and b in keep:
                neighbor[index[a]].append((index[b], lid))
                neighbor[index[b]].append((index[a], lid))
        for lst in neighbor:
            lst.sort()

        dist = np.full((n, n), _INF, dtype=np.int64)
        for src in range(n):
            dist[src, src] = 0
            frontier = [src]
            d = 0
            while frontier:
                d += 1
                nxt = []
                for u in frontier:
                    for v, _lid in neighbor[u]:
                        if dist[src, v] > d:
                            dist[src, v] = d
                            nxt.append(v)
                frontier = nxt

        term_idx = [index[v] for v in terms]
        dp, choice = _dreyfus_wagner(dist, term_idx)

        full = (1 << len(terms)) - 1
        if dp[full].min() >= _INF:
            raise NetworkValidationError("terminals are not mutually reachable")
        root = int(np.argmin(dp[full]))

        def shortest_path_edges(u: int, v: int):
            # walk back from v to u along any shortest path, lowest index first
            while v != u:
                for w, lid in neighbor[v]:
                    if dist[u, w] == dist[u, v] - 1:
                        chosen.add(lid)
                        v = w
                        break

        stack = [(full, root)]
        while stack:
            mask, v = stack.pop()
            c = int(choice[mask, v])
            if c == -1:
                continue
            if c >= 0:  # split into two subsets rooted at v
                stack.append((c, v))
                stack.append((mask ^ c, v))
            else:  # walk from u to v
                u = -2 - c
                shortest_path_edges(u, v)
                stack.append((mask, u))

    tree_nodes: set[int] = set(term_set)
    for lid in chosen:
        ln = net.line_by_id[lid]
        tree_nodes.add(ln.from_bus)
        tree_nodes.add(ln.to_bus)
    return SteinerTree(
        nodes=frozenset(tree_nodes),
        edges=frozenset(chosen),
        terminals=frozenset(term_set),
    )


def build_fixings(net: Network, trees: list[SteinerTree]) -> SteinerFixings:
    """Overlap-corrected fixings from one Steiner tree per cluster.

    Buses in two or more trees, lines in two or more trees, and lines
    touching any such bus are dropped from every tree's fixing, which
    removes every source of conflicting pre-assignments.
    """
    bus_count = Counter()
    edge_count = Counter()
    for tree in trees:
        bus_count.update(tree.nodes)
        edge_count.update(tree.edges)
    overlap_buses = {b for b, c in bus_count.items() if c >= 2}
    removed_edges = {e for e, c in edge_count.items() if c >= 2}
    for tree in trees:
        for lid in tree.edges:
            ln = net.line_by_id[lid]
            if ln.from_bus in overlap_buses or ln.to_bus in overlap_buses:
                removed_edges.add(lid)

    bus_fix: dict[int, int] = {}
    edge_fix: dict[int, int] = {}
    for r, tree in enumerate(trees, start=1):
        for b in tree.nodes - overlap_buses:
            if b in bus_fix and bus_fix[b] != r:
                raise NetworkValidationError("overlap correction left a conflicting bus")
            bus_fix[b] = r
        for lid in tree.edges - removed_edges:
            ln = net.line_by_id[lid]
            if bus_fix.get(ln.from_bus) != r or bus_fix.get(ln.to_bus) != r:
                raise NetworkValidationError("fixed line endpoints not fixed to its cluster")
            edge_fix[lid] = r
    return SteinerFixings(bus_fix=bus_fix, edge_fix=edge_fix)
