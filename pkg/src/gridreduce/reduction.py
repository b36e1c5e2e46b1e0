"""The four topological reduction stages and their numeric counterpart.

Stage order is fixed: recursive degree-one collapse, then degree-two
node-to-edge elimination (with the sparse-triangle subroutine), then the
randomized greedy triangular reduction gated by voltage and degree
thresholds.  The stages only rewrite topology and the ledger; admittances
are never touched here.  Power-flow equivalence is realized afterwards by
one Kron reduction onto the survivors of the first two stages followed by
linear triangle aggregations in recorded collapse order.

Where the source algorithms leave order unspecified, the smallest eligible
bus id goes first so identical inputs give identical ledgers; the only
randomness is the seeded base-node permutation of the triangular stage.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateNetworkError,
    LedgerIntegrityError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .laplacian import (
    KronResult,
    LoopyLaplacian,
    _check_symmetric,
    build_loopy_laplacian,
    kron_reduce,
    reduced_currents,
)
from .ledger import LineRecord, ReductionLedger
from .metrics import StageRecord, ReductionReport, reduction_report, stage_record
from .network import BusId, Network

STAGES = ("d1", "d2", "tri")


@dataclass(frozen=True)
class Thresholds:
    """Gates for the greedy triangular stage.

    ``vthr`` is a nominal-voltage ceiling in kilovolts (None disables the
    filter); ``dthr`` is the degree ceiling, at least 4 so a triangle of
    degree-three nodes can collapse at all.
    """

    vthr: float | None = None
    dthr: int = 6

    def __post_init__(self):
        if self.dthr < 4:
            raise ValidationError(f"dThr must be >= 4, got {self.dthr}")
        if self.vthr is not None and self.vthr <= 0:
            raise ValidationError(f"vThr must be positive, got {self.vthr}")


def _pop_smallest(net: Network, heap: list[BusId], max_degree: int) -> BusId | None:
    """Smallest live bus on the heap whose degree is still below the bound."""
    while heap:
        bus = heapq.heappop(heap)
        if bus in net.buses and net.degree(bus) < max_degree:
            return bus
    return None


def _remove_leaf(net: Network, ledger: ReductionLedger, leaf: BusId,
                 stage: str) -> BusId:
    """Collapse a degree-one node into its neighbor, recording everything."""
    (root,) = net.neighbors(leaf)
    seq = ledger.next_seq()
    ledger.record_removed_line(leaf, root, net.remove_line(leaf, root))
    ledger.record_removed_bus(net.remove_bus(leaf))
    ledger.collapse_leaf(leaf, root, stage, seq)
    return root


def reduce_degree_one(net: Network, ledger: ReductionLedger
                      ) -> tuple[Network, ReductionLedger]:
    """Recursively collapse every tree onto its root.

    Mutates ``net`` and ``ledger`` in place and returns them; afterwards no
    node has degree below two.  A network that is itself a tree collapses
    toward a single node, which is an error.
    """
    heap = sorted(b for b in net.buses if net.degree(b) < 2)
    heapq.heapify(heap)
    while True:
        leaf = _pop_smallest(net, heap, 2)
        if leaf is None:
            return net, ledger
        if net.node_count == 1:
            raise DegenerateNetworkError("degenerate tree network: reduced to one node")
        if net.degree(leaf) == 0:
            raise ValidationError(f"bus {leaf!r} is isolated; network is disconnected")
        root = _remove_leaf(net, ledger, leaf, "d1")
        if net.degree(root) < 2:
            heapq.heappush(heap, root)


def reduce_degree_two(net: Network, ledger: ReductionLedger
                      ) -> tuple[Network, ReductionLedger]:
    """Map every degree-two node onto an edge between its neighbors.

    Prohibiting double lines means eliminating a member of a sparsely
    connected triangle leaves a degree-one node behind; the subroutine
    collapses that chain onto its terminal node and stores the triggering
    edge record at the front of the terminal's tree list.  Afterwards every
    node has degree at least three.
    """
    if any(net.degree(b) < 2 for b in net.buses):
        raise ValidationError("degree-two stage needs the degree-one stage output")
    heap = sorted(b for b in net.buses if net.degree(b) < 3)
    heapq.heapify(heap)
    while True:
        mid = _pop_smallest(net, heap, 3)
        if mid is None:
            return net, ledger
        if net.node_count <= 3:
            raise DegenerateNetworkError("degenerate ring network: fewer than 4 nodes left")
        b2, b3 = sorted(net.neighbors(mid))
        seq = ledger.next_seq()
        ledger.record_removed_line(mid, b2, net.remove_line(mid, b2))
        ledger.record_removed_line(mid, b3, net.remove_line(mid, b3))
        ledger.record_removed_bus(net.remove_bus(mid))
        created = not net.has_line(b2, b3)
        if created:
            # Placeholder admittance: meta-edge numerics are realized by the
            # Kron reduction at pipeline end, never on the topological net.
            net.add_line(b2, b3, 0j)
        ledger.eliminate_degree_two(mid, b2, b3, created, seq)

        # Sparsely connected triangle: the elimination dropped an endpoint to
        # degree one; collapse the resulting chain onto its terminal node.
        terminal = None
        while True:
            stranded = sorted(b for b in (b2, b3) if b in net.buses and net.degree(b) < 2)
            chain = stranded[0] if stranded else None
            if chain is None:
                break
            while chain is not None:
                if net.node_count <= 3:
                    raise DegenerateNetworkError(
                        "degenerate ring network: fewer than 4 nodes left")
                if net.degree(chain) == 0:
                    raise ValidationError(f"bus {chain!r} is isolated during collapse")
                terminal = _remove_leaf(net, ledger, chain, "d2")
                chain = terminal if net.degree(terminal) < 2 else None
        if terminal is not None:
            ledger.nest_edge_into_tree(b2, b3, terminal)
            if net.degree(terminal) < 3:
                heapq.heappush(heap, terminal)
        for endpoint in (b2, b3):
            if endpoint in net.buses and net.degree(endpoint) < 3:
                heapq.heappush(heap, endpoint)


def eligible_nodes(net: Network, ledger: ReductionLedger,
                   vthr: float | None) -> list[BusId]:
    """Nodes allowed into a triangle collapse under the voltage ceiling.

    A node is excluded if its own nominal voltage, any voltage inside its
    collapsed tree, or any voltage inside a collapsed edge it terminates
    exceeds ``vthr``.  ``None`` admits every node.
    """
    if vthr is None:
        return net.bus_ids()

    def collapsed_voltage_ok(key: str) -> bool:
        f = ledger.fields.get(key)
        if f is None:
            return True
        for node in ledger.nodes_in_items(f.items):
            rec = ledger.bus_data.get(node)
            if rec is None:
                raise LedgerIntegrityError(f"no attributes for collapsed bus {node!r}")
            if rec.voltage_kv > vthr:
                return False
        return True

    edge_fields_by_endpoint: dict[BusId, list[str]] = {}
    for f in ledger.fields.values():
        if f.kind == "e":
            for endpoint in f.anchors:
                edge_fields_by_endpoint.setdefault(endpoint, []).append(f.key)

    out = []
    for bus_id in net.bus_ids():
        if net.buses[bus_id].voltage_kv > vthr:
            continue
        if not collapsed_voltage_ok(f"t_{bus_id}"):
            continue
        if any(not collapsed_voltage_ok(key)
               for key in edge_fields_by_endpoint.get(bus_id, [])):
            continue
        out.append(bus_id)
    return out


def _find_triangle(net: Network, base: BusId, pool: set[BusId],
                   dthr: int) -> tuple[BusId, BusId] | None:
    """First eligible triangle at ``base``, scanning neighbor pairs in
    ascending bus-id order."""
    nbrs = sorted(net.neighbors(base))
    for i, x in enumerate(nbrs):
        if x not in pool or net.degree(x) >= dthr:
            continue
        for y in nbrs[i + 1:]:
            if y not in pool or net.degree(y) >= dthr:
                continue
            if net.has_line(x, y):
                return x, y
    return None


def greedy_triangle_reduce(net: Network, ledger: ReductionLedger,
                           thr: Thresholds, seed: int
                           ) -> tuple[Network, ReductionLedger]:
    """Randomized greedy collapse of triangles whose members pass both gates.

    Bases are drawn from a seeded Fisher-Yates permutation of the eligible
    nodes; every collapse absorbs the two partners into the base, rewires
    their lines there (dropping doubles and self lines) and resets the scan
    with a fresh permutation.  Ends when no permitted triangle remains.
    """
    from .rng import Xoshiro256StarStar

    rng = Xoshiro256StarStar(seed)
    pool = set(eligible_nodes(net, ledger, thr.vthr))
    order = sorted(pool)
    rng.shuffle(order)
    k, stop = 0, len(order)
    while k < stop:
        base = order[k]
        k += 1
        if base not in net.buses or net.degree(base) >= thr.dthr:
            continue
        while net.degree(base) < thr.dthr:
            found = _find_triangle(net, base, pool, thr.dthr)
            if found is None:
                break
            for member in found:
                seq = ledger.next_seq()
                recs = []
                for line in net.incident_lines(member):
                    other = line.b if line.a == member else line.a
                    adm = net.remove_line(member, other)
                    moved = False
                    if other != base and not net.has_line(base, other):
                        net.add_line(base, other, adm)
                        moved = True
                    recs.append(LineRecord(a=line.a, b=line.b,
                                           admittance=adm, moved=moved))
                ledger.record_removed_bus(net.remove_bus(member))
                ledger.absorb_into_triangle(base, member, recs, seq)
                pool.discard(member)
            order = sorted(pool)
            rng.shuffle(order)
            k, stop = 0, len(order)
    for f in sorted((f for f in ledger.fields.values() if f.kind == "tri"),
                    key=lambda f: f.min_seq):
        ledger.append_base_lines(f.root, [LineRecord(a=line.a, b=line.b,
                                                     admittance=line.admittance)
                                          for line in net.incident_lines(f.root)])
    return net, ledger


def _validate_stages(stages) -> tuple[str, ...]:
    chain = tuple(stages)
    if chain != STAGES[:len(chain)]:
        raise ValidationError(
            f"stages must be a prefix of {STAGES}, got {chain}")
    return chain


def reduce_pipeline(net: Network, stages=STAGES, thr: Thresholds = Thresholds(),
                    seed: int = 0) -> tuple[Network, ReductionLedger, list[StageRecord]]:
    """Run the requested stage prefix on a copy of ``net``.

    Returns the reduced network, the ledger describing every step, and the
    per-stage size records (starting from the unreduced network).
    """
    chain = _validate_stages(stages)
    work = net.copy()
    ledger = ReductionLedger()
    records = [stage_record("full", work)]
    for stage in chain:
        if stage == "d1":
            reduce_degree_one(work, ledger)
        elif stage == "d2":
            reduce_degree_two(work, ledger)
        else:
            greedy_triangle_reduce(work, ledger, thr, seed)
        records.append(stage_record(stage, work))
    ledger.meta = {
        "seed": seed,
        "thresholds": {"vthr": thr.vthr, "dthr": thr.dthr},
        "stages": list(chain),
        "stage_counts": [{"stage": r.tag, "nodes": r.nodes, "edges": r.edges}
                         for r in records],
    }
    return work, ledger, records


def aggregate_triangle_laplacian(lap: LoopyLaplacian, currents: np.ndarray,
                                 triple: tuple[BusId, BusId, BusId]
                                 ) -> tuple[LoopyLaplacian, np.ndarray]:
    """Linear aggregation of a triangle into its first member.

    The merged row/column carries the admittance sums of the three nodes
    (internal triangle lines cancel into the new diagonal), and the merged
    current is the plain sum, so the reduced model keeps every current and
    the super node's shunt is the sum of the member shunts.
    """
    base, m1, m2 = triple
    pos = lap.positions()
    for a, b in ((base, m1), (base, m2), (m1, m2)):
        if a not in pos or b not in pos:
            raise UnsupportedConfigurationError(f"bus {a!r} or {b!r} not in index")
        if lap.matrix[pos[a], pos[b]] == 0:
            raise UnsupportedConfigurationError(
                f"{triple} is not a triangle: no line {a!r}-{b!r}")
    c = np.asarray(currents, dtype=complex)
    if c.shape != (lap.n,):
        raise UnsupportedConfigurationError(
            f"current vector shape {c.shape} does not match index size {lap.n}")

    keep = [i for i, bid in enumerate(lap.index) if bid not in (m1, m2)]
    merged = {pos[base], pos[m1], pos[m2]}
    proj = sp.lil_matrix((lap.n, len(keep)), dtype=complex)
    for col, orig in enumerate(keep):
        proj[orig, col] = 1.0
    base_col = keep.index(pos[base])
    proj[pos[m1], base_col] = 1.0
    proj[pos[m2], base_col] = 1.0
    proj = proj.tocsr()

    reduced = (proj.T @ lap.matrix @ proj).toarray()
    reduced = _check_symmetric(reduced, "triangle aggregation")
    index = tuple(lap.index[i] for i in keep)
    merged_c = proj.T @ c
    return LoopyLaplacian(matrix=sp.csr_matrix(reduced), index=index), merged_c


def numeric_reduction_pipeline(net: Network, currents: np.ndarray | None = None,
                               stages=STAGES, thr: Thresholds = Thresholds(),
                               seed: int = 0
                               ) -> tuple[LoopyLaplacian, np.ndarray,
                                          ReductionLedger, ReductionReport]:
    """Topological stages plus their power-flow-equivalent numerics.

    The degree-one/degree-two survivors become the reference set of a single
    Kron reduction of the full loopy Laplacian; the triangle stage is then
    applied as sequential linear aggregations in recorded collapse order.
    ``currents`` aligns with the sorted-bus-id ordering of the full network
    and defaults to the currents stored on the buses.
    """
    chain = _validate_stages(stages)
    full = build_loopy_laplacian(net)
    if currents is None:
        currents = np.array([net.buses[b].current for b in full.index], dtype=complex)
    c = np.asarray(currents, dtype=complex)
    if c.shape != (full.n,):
        raise ValidationError(f"current vector shape {c.shape}, expected ({full.n},)")

    reduced_net, ledger, records = reduce_pipeline(net, chain, thr, seed)

    tri_triples = ledger.tri_collapse_triples()
    absorbed = {m for t in tri_triples for m in t[1:]}
    alpha = sorted(set(reduced_net.buses) | absorbed)

    if len(alpha) < full.n:
        kron = kron_reduce(full, alpha)
        lap = kron.q_red
        vec = reduced_currents(kron, c, full.index)
    else:
        lap, vec = full, c
    for triple in tri_triples:
        lap, vec = aggregate_triangle_laplacian(lap, vec, triple)

    report = reduction_report(records, ledger)
    return lap, vec, ledger, report
