"""Slow-coherency grouping: symmetry cases, enumeration oracle, determinism."""

import itertools
import json

import numpy as np
import pytest

from gridtree.coherency import (
    CoherencyGroups,
    groups_from_json,
    groups_to_json,
    kron_reduction,
    slow_coherency,
    spectral_embedding,
)
from gridtree.errors import NetworkValidationError

from conftest import build_net


def _two_islands_weak_tie(tie_susceptance=0.01):
    # identical 4-bus meshes 0-3 and 4-7, generators at (0, 1) and (4, 5)
    edges, sus = [], []
    for base in (0, 4):
        for a, b in [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]:
            edges.append((base + a, base + b))
            sus.append(5.0)
    edges.append((3, 4))
    sus.append(tie_susceptance)
    return build_net(8, edges, susceptances=sus, gen_buses=(0, 1, 4, 5))


def test_weak_tie_splits_sides():
    net = _two_islands_weak_tie()
    got = slow_coherency(net, 2, generator_buses=[0, 1, 4, 5])
    assert set(got.groups) == {frozenset({0, 1}), frozenset({4, 5})}


def test_k_equals_generator_count_gives_singletons():
    net = _two_islands_weak_tie()
    got = slow_coherency(net, 4, generator_buses=[0, 1, 4, 5])
    assert set(got.groups) == {frozenset({0}), frozenset({1}), frozenset({4}), frozenset({5})}


def test_barbell_matches_embedding_enumeration():
    # two triangles joined by a path; generators on the outer corners
    edges = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6)]
    net = build_net(7, edges, gen_buses=(0, 1, 5, 6))
    gens = [0, 1, 5, 6]
    got = slow_coherency(net, 2, generator_buses=gens)

    rows = spectral_embedding(net, gens, 2, np.ones(len(gens)))
    best, best_cost = None, np.inf
    for labels in itertools.product([0, 1], repeat=len(gens)):
        if len(set(labels)) != 2:
            continue
        cost = 0.0
        for r in (0, 1):
            member_rows = rows[[i for i, lab in enumerate(labels) if lab == r]]
            centroid = member_rows.mean(axis=0)
            cost += ((member_rows - centroid) ** 2).sum()
        if cost < best_cost - 1e-12:
            best_cost = cost
            best = labels
    expect = {
        frozenset(g for g, lab in zip(gens, best) if lab == r) for r in (0, 1)
    }
    assert set(got.groups) == expect


def test_determinism():
    net = _two_islands_weak_tie()
    a = slow_coherency(net, 2)
    b = slow_coherency(net, 2)
    assert a.groups == b.groups


def test_susceptance_scaling_invariance():
    net = _two_islands_weak_tie()
    scaled = build_net(
        8,
        [(ln.from_bus, ln.to_bus) for ln in net.lines],
        susceptances=[ln.susceptance * 7.5 for ln in net.lines],
        gen_buses=(0, 1, 4, 5),
    )
    assert slow_coherency(net, 2).groups == slow_coherency(scaled, 2).groups


def test_groups_partition_generator_subset():
    net = _two_islands_weak_tie()
    got = slow_coherency(net, 3, generator_buses=[0, 1, 4, 5])
    seen = set()
    for g in got.groups:
        assert g
        assert not (seen & g)
        seen |= g
        for b in g:
            assert net.buses[b].is_generator


def test_k_too_large_raises():
    net = _two_islands_weak_tie()
    with pytest.raises(NetworkValidationError):
        slow_coherency(net, 5, generator_buses=[0, 1, 4, 5])


def test_kron_reduction_keeps_row_sums_zero():
    net = _two_islands_weak_tie()
    reduced = kron_reduction(net, [0, 1, 4, 5])
    assert np.allclose(reduced.sum(axis=1), 0.0, atol=1e-9)
    assert np.allclose(reduced, reduced.T, atol=1e-12)


def test_inertia_mapping_accepted():
    net = _two_islands_weak_tie()
    got = slow_coherency(net, 2, inertia_h={0: 2.0, 1: 2.0, 4: 1.0, 5: 1.0})
    assert got.k == 2


def test_groups_json_round_trip():
    net = _two_islands_weak_tie()
    groups = slow_coherency(net, 2)
    text = groups_to_json(net, groups)
    doc = json.loads(text)
    assert set(doc) == {"k", "groups"}
    back = groups_from_json(net, text)
    assert back.groups == groups.groups


def test_groups_json_rejects_non_generator():
    net = _two_islands_weak_tie()
    bad = json.dumps({"k": 2, "groups": [[3], [5]]})  # bus 3 is not a generator
    with pytest.raises(NetworkValidationError):
        groups_from_json(net, bad)


def test_group_type_invariants():
    with pytest.raises(NetworkValidationError):
        CoherencyGroups(groups=(frozenset([1]), frozenset([1])), k=2)
    with pytest.raises(NetworkValidationError):
        CoherencyGroups(groups=(frozenset(), frozenset([1])), k=2)
    with pytest.raises(NetworkValidationError):
        CoherencyGroups(groups=(frozenset([1]),), k=2)
