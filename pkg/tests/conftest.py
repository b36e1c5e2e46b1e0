"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from gridreduce.laplacian import build_loopy_laplacian
from gridreduce.network import Bus, BusId, Network
from gridreduce.reduction import Thresholds, reduce_pipeline

VOLTAGE_TIERS = [69.0, 138.0, 230.0, 345.0]


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criteria verdicts even under output capture."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for status, name in RESULTS:
            terminalreporter.write_line(f"{status}  {name}")


def inductive(rng: np.random.Generator, lo: float = 0.5, hi: float = 2.0) -> complex:
    return complex(0.0, -rng.uniform(lo, hi))


def random_multiscale_network(seed: int, n: int) -> Network:
    """Random strict-mode network that survives the full pipeline.

    A meshy core with minimum degree three (so the degree-two stage cannot
    collapse it) carries random trees, strings and triangle pockets, which
    gives all three stages something to do at any size.
    """
    rng = np.random.default_rng(seed)
    net = Network()
    n_core = max(4, int(round(n * 0.4)))

    def add_bus(bus_id: BusId, kv: float | None = None) -> None:
        shunt = inductive(rng, 0.01, 0.2) if rng.random() < 0.6 else 0j
        net.add_bus(Bus(id=bus_id,
                        voltage_kv=kv if kv is not None else
                        float(VOLTAGE_TIERS[rng.integers(0, len(VOLTAGE_TIERS))]),
                        shunt=shunt))

    core = [f"c{i:04d}" for i in range(n_core)]
    for bus_id in core:
        add_bus(bus_id)
    net.buses[core[0]].shunt = inductive(rng, 0.05, 0.2)  # keeps Q invertible
    for i in range(1, n_core):
        net.add_line(core[i], core[int(rng.integers(0, i))], inductive(rng))
    for bus_id in core:
        guard = 0
        while net.degree(bus_id) < 3 and guard < 200:
            other = core[int(rng.integers(0, n_core))]
            if other != bus_id and not net.has_line(bus_id, other):
                net.add_line(bus_id, other, inductive(rng))
            guard += 1

    budget = n - n_core
    serial = 0
    while budget > 0:
        kind = rng.random()
        if kind < 0.35:  # tree branch hanging off the core
            size = int(min(budget, rng.integers(1, 5)))
            parent = core[int(rng.integers(0, n_core))]
            for _ in range(size):
                node = f"t{serial:04d}"
                serial += 1
                add_bus(node)
                net.add_line(node, parent, inductive(rng))
                parent = node if rng.random() < 0.7 else parent
            budget -= size
        elif kind < 0.6 and budget >= 1:  # string between two core nodes
            size = int(min(budget, rng.integers(1, 4)))
            a, b = rng.choice(n_core, size=2, replace=False)
            prev = core[int(a)]
            for _ in range(size):
                node = f"s{serial:04d}"
                serial += 1
                add_bus(node)
                net.add_line(prev, node, inductive(rng))
                prev = node
            net.add_line(prev, core[int(b)], inductive(rng))
            budget -= size
        elif kind < 0.8 and budget >= 2:  # polygon behind one articulation node
            size = int(min(budget, rng.integers(2, 5)))
            articulation = core[int(rng.integers(0, n_core))]
            prev = articulation
            for _ in range(size):
                node = f"g{serial:04d}"
                serial += 1
                add_bus(node)
                net.add_line(prev, node, inductive(rng))
                prev = node
            net.add_line(prev, articulation, inductive(rng))
            budget -= size
        elif budget >= 3:  # triangle pocket on three distinct core nodes
            anchors = rng.choice(n_core, size=3, replace=False)
            members = []
            for k in range(3):
                node = f"p{serial:04d}"
                serial += 1
                add_bus(node, kv=138.0)
                members.append(node)
                net.add_line(node, core[int(anchors[k])], inductive(rng))
            net.add_line(members[0], members[1], inductive(rng))
            net.add_line(members[0], members[2], inductive(rng))
            net.add_line(members[1], members[2], inductive(rng))
            budget -= 3
        else:
            node = f"t{serial:04d}"
            serial += 1
            add_bus(node)
            net.add_line(node, core[int(rng.integers(0, n_core))], inductive(rng))
            budget -= 1
    return net


def random_currents(net: Network, seed: int) -> np.ndarray:
    """Arbitrary complex injections aligned with sorted bus ids."""
    rng = np.random.default_rng(seed)
    n = net.node_count
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def balanced_class_currents(net: Network, stages, thr: Thresholds, seed: int
                            ) -> np.ndarray:
    """Currents in the regime where reduction preserves complex net power
    exactly: zero injection at every node the degree-one/degree-two stages
    eliminate, and a common voltage across each greedy-triangle cluster."""
    rng = np.random.default_rng(seed ^ 0x5EED)
    reduced, ledger, _ = reduce_pipeline(net, stages, thr, seed)
    cluster_root: dict[str, str] = {}
    for f in ledger.fields.values():
        if f.kind == "tri":
            for node in ledger.nodes_in_items(f.items):
                cluster_root[node] = f.root

    lap = build_loopy_laplacian(net)
    pos = lap.positions()
    survivors = set(reduced.buses) | set(cluster_root)
    volts = np.zeros(lap.n, dtype=complex)
    live_values = {b: rng.normal() + 1j * rng.normal() for b in reduced.buses}
    for bus_id in survivors:
        volts[pos[bus_id]] = live_values[cluster_root.get(bus_id, bus_id)]

    interior = [pos[b] for b in lap.index if b not in survivors]
    ref = [pos[b] for b in lap.index if b in survivors]
    dense = lap.dense()
    if interior:
        rhs = -dense[np.ix_(interior, ref)] @ volts[ref]
        volts[interior] = np.linalg.solve(dense[np.ix_(interior, interior)], rhs)
    currents = dense @ volts
    if interior:
        currents[interior] = 0.0
    return currents


def path_through_interior(net: Network, a: BusId, b: BusId,
                          interior: set[BusId]) -> bool:
    """Brute-force oracle: does a path from a to b exist whose every
    intermediate node lies in ``interior``?"""
    if net.has_line(a, b):
        return True
    seen = set()
    stack = [x for x in net.neighbors(a) if x in interior]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        for nxt in net.neighbors(node):
            if nxt == b:
                return True
            if nxt in interior and nxt not in seen:
                stack.append(nxt)
    return False


def lp_wasserstein(p: dict[int, float], q: dict[int, float]) -> float:
    """Transport-plan LP oracle for the first Wasserstein distance."""
    from scipy.optimize import linprog

    degs_p = sorted(p)
    degs_q = sorted(q)
    np_, nq = len(degs_p), len(degs_q)
    cost = np.array([[abs(dp - dq) for dq in degs_q] for dp in degs_p], dtype=float)
    a_eq = np.zeros((np_ + nq, np_ * nq))
    b_eq = np.zeros(np_ + nq)
    for i in range(np_):
        a_eq[i, i * nq:(i + 1) * nq] = 1.0
        b_eq[i] = p[degs_p[i]]
    for j in range(nq):
        a_eq[np_ + j, j::nq] = 1.0
        b_eq[np_ + j] = q[degs_q[j]]
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return float(res.fun)


def random_distribution(rng: np.random.Generator, max_support: int = 40
                        ) -> dict[int, float]:
    size = int(rng.integers(1, 8))
    support = rng.choice(max_support, size=size, replace=False)
    masses = rng.random(size)
    masses /= masses.sum()
    return {int(d): float(m) for d, m in zip(support, masses)}


@pytest.fixture
def fig2_tree_network() -> Network:
    """The recursive-tree figure: leaves b2,b3 on root b1, chain b4-b5 with
    leaves b6,b7; b1 kept at degree >= 2 by a small external ring."""
    net = Network()
    for i in range(1, 8):
        net.add_bus(Bus(id=f"b{i}", voltage_kv=138.0, shunt=-0.05j))
    for x in ("x1", "x2"):
        net.add_bus(Bus(id=x, voltage_kv=345.0, shunt=-0.05j))
    for a, b in [("b1", "b2"), ("b1", "b3"), ("b1", "b4"), ("b4", "b5"),
                 ("b5", "b6"), ("b5", "b7"), ("b1", "x1"), ("x1", "x2"),
                 ("x2", "b1")]:
        net.add_line(a, b, -1j)
    return net
