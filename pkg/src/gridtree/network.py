"""Graph model for transmission networks.

Buses and lines live in dense 0-based index space; external bus ids from
the case file are kept for reporting only.  All structural notions
(connectivity, bridges, partitions) treat the graph as undirected; the
orientation of a line only fixes the sign convention of its MW flow.
Networks are immutable: switching produces a new value.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

from .errors import CaseParseError, NetworkValidationError

__all__ = [
    "Bus",
    "Line",
    "Network",
    "Partition",
    "ReducedEdge",
    "ReducedGraph",
    "RawBranch",
    "parse_case",
    "serialize_case",
    "merge_parallel",
    "cross_edges",
    "reduced_graph",
    "is_tree_partition",
    "bridges",
    "apply_switching",
    "is_connected",
    "network_to_json",
    "network_from_json",
]


@dataclass(frozen=True)
class Bus:
    """A bus with its net MW injection (generation minus load)."""

    id: int
    index: int
    injection_mw: float
    is_generator: bool = False
    gen_mw: float = 0.0
    load_mw: float = 0.0


@dataclass(frozen=True)
class Line:
    """A transmission line in canonical orientation (from_bus < to_bus).

    ``flow_mw`` is signed, positive from ``from_bus`` to ``to_bus``.  The
    ``id`` is assigned at parse time and survives switching, so solution
    line references stay valid on derived networks.
    """

    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    flow_mw: float = 0.0
    capacity_mw: Optional[float] = None
    status: bool = True

    def other(self, bus: int) -> int:
        return self.to_bus if bus == self.from_bus else self.from_bus


@dataclass(frozen=True)
class RawBranch:
    """An unmerged branch record as read from a case file."""

    from_bus: int
    to_bus: int
    susceptance: float
    flow_mw: float = 0.0
    capacity_mw: Optional[float] = None


@dataclass(frozen=True, eq=True)
class Network:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    base_mva: float = 100.0

    def __post_init__(self):
        if len({b.id for b in self.buses}) != len(self.buses):
            raise NetworkValidationError("duplicate bus ids")
        if [b.index for b in self.buses] != list(range(len(self.buses))):
            raise NetworkValidationError("bus indices must be dense and ordered")
        pairs = set()
        for ln in self.lines:
            if ln.from_bus == ln.to_bus:
                raise NetworkValidationError(f"self-loop on bus index {ln.from_bus}")
            if not (0 <= ln.from_bus < len(self.buses) and 0 <= ln.to_bus < len(self.buses)):
                raise NetworkValidationError(f"line {ln.id} references unknown bus index")
            if ln.susceptance <= 0:
                raise NetworkValidationError(f"line {ln.id} has non-positive susceptance")
            key = (min(ln.from_bus, ln.to_bus), max(ln.from_bus, ln.to_bus))
            if key in pairs:
                raise NetworkValidationError(f"parallel lines between bus indices {key}")
            pairs.add(key)
        if len({ln.id for ln in self.lines}) != len(self.lines):
            raise NetworkValidationError("duplicate line ids")

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def m(self) -> int:
        return len(self.lines)

    @cached_property
    def line_by_id(self) -> Mapping[int, Line]:
        return {ln.id: ln for ln in self.lines}

    @cached_property
    def incident(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per bus: tuple of (line id, neighbor bus index)."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for ln in self.lines:
            adj[ln.from_bus].append((ln.id, ln.to_bus))
            adj[ln.to_bus].append((ln.id, ln.from_bus))
        return tuple(tuple(a) for a in adj)

    def generator_buses(self) -> list[int]:
        return [b.index for b in self.buses if b.is_generator]

    def index_of(self, external_id: int) -> int:
        return self._id_to_index[external_id]

    @cached_property
    def _id_to_index(self) -> Mapping[int, int]:
        return {b.id: b.index for b in self.buses}


@dataclass(frozen=True)
class Partition:
    """Bus-to-cluster assignment; clusters are numbered 1..k."""

    assignment: tuple[int, ...]
    k: int

    def __post_init__(self):
        seen = set(self.assignment)
        if not seen.issubset(range(1, self.k + 1)):
            raise NetworkValidationError(f"cluster labels outside 1..{self.k}")
        if len(seen) != self.k:
            missing = sorted(set(range(1, self.k + 1)) - seen)
            raise NetworkValidationError(f"empty clusters: {missing}")

    @classmethod
    def from_clusters(cls, clusters: Sequence[Iterable[int]], n: int) -> "Partition":
        assignment = [0] * n
        for r, members in enumerate(clusters, start=1):
            for i in members:
                if assignment[i] != 0:
                    raise NetworkValidationError(f"bus {i} assigned twice")
                assignment[i] = r
        if any(a == 0 for a in assignment):
            raise NetworkValidationError("partition does not cover all buses")
        return cls(tuple(assignment), len(clusters))

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, r in enumerate(self.assignment):
            out[r - 1].append(i)
        return out


@dataclass(frozen=True)
class ReducedEdge:
    cluster_a: int
    cluster_b: int
    line_id: int
    weight: float


@dataclass(frozen=True)
class ReducedGraph:
    """Cluster-level multigraph: one edge per cross edge of the partition."""

    k: int
    edges: tuple[ReducedEdge, ...]


# ---------------------------------------------------------------------------
# Case file parsing (MATPOWER subset)
# ---------------------------------------------------------------------------

_BASE_RE = re.compile(r"mpc\.baseMVA\s*=\s*([^;]+);")


def _read_table(lines: list[str], name: str) -> list[tuple[int, list[float]]]:
    """Extract rows of ``mpc.<name> = [...]`` as (line_no, values)."""
    header = re.compile(rf"mpc\.{name}\s*=\s*\[")
    start = None
    for idx, text in enumerate(lines):
        if header.search(text):
            start = idx
            break
    if start is None:
        raise CaseParseError(f"table mpc.{name} not found")
    rows: list[tuple[int, list[float]]] = []
    for idx in range(start, len(lines)):
        text = lines[idx]
        if idx == start:
            text = text[header.search(text).end():]
        closed = "]" in text
        if closed:
            text = text[: text.index("]")]
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            try:
                rows.append((idx + 1, [float(tok) for tok in chunk.split()]))
            except ValueError:
                raise CaseParseError(f"malformed row in mpc.{name}", line_no=idx + 1)
        if closed:
            return rows
    raise CaseParseError(f"table mpc.{name} not terminated", line_no=start + 1)


def merge_parallel(records: Sequence[RawBranch]) -> list[Line]:
    """Merge parallel branches into one line per unordered bus pair.

    Flows are re-signed to the canonical (min index, max index) orientation
    and summed; susceptances add; capacities add unless any branch of the
    pair is unlimited (None), which makes the merged line unlimited.
    """
    order: list[tuple[int, int]] = []
    acc: dict[tuple[int, int], list] = {}
    for rec in records:
        a, b = rec.from_bus, rec.to_bus
        sign = 1.0 if a < b else -1.0
        key = (min(a, b), max(a, b))
        if key not in acc:
            acc[key] = [0.0, 0.0, 0.0, False]  # susceptance, flow, cap, unlimited
            order.append(key)
        slot = acc[key]
        slot[0] += rec.susceptance
        slot[1] += sign * rec.flow_mw
        if rec.capacity_mw is None:
            slot[3] = True
        else:
            slot[2] += rec.capacity_mw
    out = []
    for lid, key in enumerate(order):
        sus, flow, cap, unlimited = acc[key]
        out.append(
            Line(
                id=lid,
                from_bus=key[0],
                to_bus=key[1],
                susceptance=sus,
                flow_mw=flow,
                capacity_mw=None if unlimited else cap,
            )
        )
    return out


def parse_case(text: str) -> Network:
    """Parse a MATPOWER-subset case file into a connected Network.

    Reads baseMVA, bus columns (BUS_I, BUS_TYPE, PD), gen columns
    (GEN_BUS, PG) and branch columns (F_BUS, T_BUS, BR_R, BR_X, RATE_A,
    BR_STATUS).  Out-of-service branches are dropped, parallel branches
    merged, bus ids remapped to dense 0-based indices.
    """
    raw_lines = [ln.split("%")[0] for ln in text.splitlines()]

    m = _BASE_RE.search("\n".join(raw_lines))
    if m is None:
        raise CaseParseError("mpc.baseMVA not found")
    try:
        base_mva = float(m.group(1))
    except ValueError:
        raise CaseParseError(f"bad baseMVA value: {m.group(1)!r}")
    if base_mva <= 0:
        raise CaseParseError(f"baseMVA must be positive, got {base_mva}")

    bus_rows = _read_table(raw_lines, "bus")
    gen_rows = _read_table(raw_lines, "gen")
    branch_rows = _read_table(raw_lines, "branch")

    ids: list[int] = []
    load: dict[int, float] = {}
    for line_no, row in bus_rows:
        if len(row) < 3:
            raise CaseParseError("bus row needs at least 3 columns", line_no=line_no)
        bus_id = int(row[0])
        if bus_id in load:
            raise NetworkValidationError(f"duplicate bus id {bus_id}")
        ids.append(bus_id)
        load[bus_id] = row[2]

    index = {bus_id: i for i, bus_id in enumerate(ids)}

    gen: dict[int, float] = {}
    for line_no, row in gen_rows:
        if len(row) < 2:
            raise CaseParseError("gen row needs at least 2 columns", line_no=line_no)
        bus_id = int(row[0])
        if bus_id not in index:
            raise CaseParseError(f"gen references unknown bus {bus_id}", line_no=line_no)
        gen[bus_id] = gen.get(bus_id, 0.0) + row[1]

    records: list[RawBranch] = []
    for line_no, row in branch_rows:
        if len(row) < 11:
            raise CaseParseError("branch row needs at least 11 columns", line_no=line_no)
        f_id, t_id = int(row[0]), int(row[1])
        if f_id not in index or t_id not in index:
            raise CaseParseError(
                f"branch references unknown bus {f_id if f_id not in index else t_id}",
                line_no=line_no,
            )
        if f_id == t_id:
            raise CaseParseError(f"self-loop branch at bus {f_id}", line_no=line_no)
        if row[10] == 0:  # BR_STATUS
            continue
        x = row[3]
        if x <= 0:
            raise CaseParseError(f"branch reactance must be positive, got {x}", line_no=line_no)
        rate = row[5]
        records.append(
            RawBranch(
                from_bus=index[f_id],
                to_bus=index[t_id],
                susceptance=1.0 / x,
                capacity_mw=rate if rate > 0 else None,
            )
        )

    buses = tuple(
        Bus(
            id=bus_id,
            index=index[bus_id],
            injection_mw=gen.get(bus_id, 0.0) - load[bus_id],
            is_generator=bus_id in gen,
            gen_mw=gen.get(bus_id, 0.0),
            load_mw=load[bus_id],
        )
        for bus_id in ids
    )
    net = Network(buses=buses, lines=tuple(merge_parallel(records)), base_mva=base_mva)
    if not is_connected(net):
        raise NetworkValidationError("network is not connected")
    return net


def serialize_case(net: Network) -> str:
    """Write a Network back to MATPOWER-subset text (flows are not stored)."""
    out = ["function mpc = case_gridtree", "mpc.version = '2';"]
    out.append(f"mpc.baseMVA = {net.base_mva!r};")
    out.append("mpc.bus = [")
    for b in net.buses:
        bus_type = 2 if b.is_generator else 1
        out.append(f"\t{b.id}\t{bus_type}\t{b.load_mw!r}\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;")
    out.append("];")
    out.append("mpc.gen = [")
    for b in net.buses:
        if b.is_generator:
            out.append(f"\t{b.id}\t{b.gen_mw!r}\t0\t0\t0\t1\t{net.base_mva!r}\t1\t{b.gen_mw!r}\t0;")
    out.append("];")
    out.append("mpc.branch = [")
    for ln in net.lines:
        rate = 0 if ln.capacity_mw is None else repr(ln.capacity_mw)
        x = repr(1.0 / ln.susceptance)
        out.append(
            f"\t{net.buses[ln.from_bus].id}\t{net.buses[ln.to_bus].id}"
            f"\t0\t{x}\t0\t{rate}\t0\t0\t0\t0\t1;"
        )
    out.append("];")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def is_connected(net: Network) -> bool:
    if net.n == 0:
        return False
    seen = [False] * net.n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        b = stack.pop()
        for _, o in net.incident[b]:
            if not seen[o]:
                seen[o] = True
                count += 1
                stack.append(o)
    return count == net.n


def cross_edges(net: Network, p: Partition) -> list[int]:
    """Line ids whose endpoints lie in different clusters, sorted."""
    if len(p.assignment) != net.n:
        raise NetworkValidationError("partition does not cover all buses")
    a = p.assignment
    return sorted(ln.id for ln in net.lines if a[ln.from_bus] != a[ln.to_bus])


def reduced_graph(net: Network, p: Partition) -> ReducedGraph:
    """Cluster multigraph with one edge per cross edge, weight |flow|."""
    if len(p.assignment) != net.n:
        raise NetworkValidationError("partition does not cover all buses")
    a = p.assignment
    edges = []
    for ln in net.lines:
        ra, rb = a[ln.from_bus], a[ln.to_bus]
        if ra != rb:
            edges.append(
                ReducedEdge(min(ra, rb), max(ra, rb), ln.id, abs(ln.flow_mw))
            )
    return ReducedGraph(k=p.k, edges=tuple(edges))


def is_tree_partition(net: Network, p: Partition) -> bool:
    """True iff the reduced graph is a tree (connected, k-1 edges, simple)."""
    rg = reduced_graph(net, p)
    if len(rg.edges) != p.k - 1:
        return False
    pairs = [(e.cluster_a, e.cluster_b) for e in rg.edges]
    if len(pairs) != len(set(pairs)):
        return False
    parent = list(range(p.k + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = p.k
    for ra, rb in pairs:
        fa, fb = find(ra), find(rb)
        if fa != fb:
            parent[fa] = fb
            comps -= 1
    return comps == 1


def bridges(net: Network) -> list[int]:
    """Line ids whose removal disconnects the network (lowpoint DFS)."""
    n = net.n
    disc = [-1] * n
    low = [0] * n
    out: list[int] = []
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        # iterative DFS: stack of (bus, incoming line id, child iterator)
        stack = [(root, -1, iter(net.incident[root]))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            bus, in_line, it = stack[-1]
            advanced = False
            for lid, other in it:
                if lid == in_line:
                    continue
                if disc[other] == -1:
                    disc[other] = low[other] = timer
                    timer += 1
                    stack.append((other, lid, iter(net.incident[other])))
                    advanced = True
                    break
                low[bus] = min(low[bus], disc[other])
            if not advanced:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[bus])
                    if low[bus] > disc[parent]:
                        out.append(in_line)
    return sorted(out)


def apply_switching(net: Network, switched: Iterable[int]) -> Network:
    """Copy of the network with the given lines removed.

    Line ids are preserved on the remaining lines.  The result may be
    disconnected; callers decide whether that is acceptable.
    """
    switched = set(switched)
    unknown = switched - set(net.line_by_id)
    if unknown:
        raise NetworkValidationError(f"unknown line ids: {sorted(unknown)}")
    return replace(net, lines=tuple(ln for ln in net.lines if ln.id not in switched))


# ---------------------------------------------------------------------------
# JSON dump (fixed field names)
# ---------------------------------------------------------------------------

def network_to_json(net: Network) -> str:
    doc = {
        "buses": [{"id": b.id, "injection_mw": b.injection_mw} for b in net.buses],
        "lines": [
            {
                "from": net.buses[ln.from_bus].id,
                "to": net.buses[ln.to_bus].id,
                "susceptance": ln.susceptance,
                "flow_mw": ln.flow_mw,
                "capacity_mw": ln.capacity_mw,
            }
            for ln in net.lines
        ],
        "base_mva": net.base_mva,
    }
    return json.dumps(doc, indent=2) + "\n"


def network_from_json(text: str) -> Network:
    doc = json.loads(text)
    index = {b["id"]: i for i, b in enumerate(doc["buses"])}
    buses = tuple(
        Bus(id=b["id"], index=i, injection_mw=b["injection_mw"])
        for i, b in enumerate(doc["buses"])
    )
    lines = tuple(
        Line(
            id=lid,
            from_bus=index[ln["from"]],
            to_bus=index[ln["to"]],
            susceptance=ln["susceptance"],
            flow_mw=ln["flow_mw"],
            capacity_mw=ln.get("capacity_mw"),
        )
        for lid, ln in enumerate(doc["lines"])
    )
    return Network(buses=buses, lines=lines, base_mva=doc["base_mva"])
