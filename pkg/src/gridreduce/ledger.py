"""Hash-keyed reduction record and its exact inversion.

Every collapse performed by the reduction stages is written here under the
field grammar ``t_<id>`` (trees and generalized trees), ``e_<id>_<id>``
(strings of eliminated degree-two nodes, endpoints in ascending order) and
``tri_<id>`` (greedy triangle clusters).  Tree branches are arrays running
from the end leaf to the terminal node; strings are triples ``[a, m, b]``
read right to left for inversion; triangle clusters list each absorbed node
with the lines it held at collapse time.  Nested maps appear where one
structure was swallowed by another, exactly as the stage algorithms produce
them.

Alongside the structural record the ledger keeps the attribute data (bus
voltage/shunt/current and removed-line admittances) and a global sequence
number for every removal event, which makes any intermediate resolution
reachable and replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

from .errors import (
    DependencyError,
    LedgerIntegrityError,
    ParseError,
    TargetNotFoundError,
)
from .network import Bus, BusId, Network, line_key

FORMAT_VERSION = 1


@dataclass
class BusRecord:
    voltage_kv: float
    shunt: complex
    current: complex


@dataclass
class LineRecord:
    """A line held by a node absorbed into a triangle cluster.

    ``moved`` marks lines whose rewiring onto the base created a new line
    there; expanding the node removes those again ("formed uniquely").
    """

    a: BusId
    b: BusId
    admittance: complex
    moved: bool = False

    def other(self, node: BusId) -> BusId:
        return self.b if self.a == node else self.a


@dataclass
class BranchItem:
    """Collapsed branch ``path = [leaf, ..., root]``.

    ``seqs[i]`` is the sequence number of the event that removed ``path[i]``
    (and the line to ``path[i+1]``); extensions of the same branch share the
    sequence number of the removal that caused them.
    """

    path: list[BusId]
    seqs: list[int]
    stage: str  # "d1" for the first stage, "d2" for lasso collapses

    @property
    def min_seq(self) -> int:
        return self.seqs[0]


@dataclass
class EdgeNodeItem:
    """Degree-two elimination ``[a, m, b]``: m was mapped to the edge {a, b}."""

    triple: tuple[BusId, BusId, BusId]
    created_line: bool
    seq: int
    stage: str = "d2"

    @property
    def min_seq(self) -> int:
        return self.seq


@dataclass
class AbsorbedItem:
    """Node absorbed into a triangle cluster, with its lines at that moment."""

    node: BusId
    origin: BusId  # base the node was absorbed into
    lines: list[LineRecord]
    seq: int
    stage: str = "tri"

    @property
    def min_seq(self) -> int:
        return self.seq


@dataclass
class BaseLinesItem:
    """Terminal record of a cluster base's own lines; informational only."""

    node: BusId
    lines: list[LineRecord]
    seq: int
    stage: str = "tri"

    @property
    def min_seq(self) -> int:
        return self.seq


@dataclass
class NestedField:
    """A swallowed field: tree data inside an edge list, or the edge list
    that triggered a sparse-triangle collapse, prepended to the tree."""

    key: str
    anchors: tuple[BusId, ...]
    items: list
    seq: int
    stage: str

    @property
    def min_seq(self) -> int:
        inner = [it.min_seq for it in self.items]
        return min(inner) if inner else self.seq


Item = BranchItem | EdgeNodeItem | AbsorbedItem | BaseLinesItem | NestedField


@dataclass
class Field:
    key: str
    kind: str                 # "t" | "e" | "tri"
    anchors: tuple[BusId, ...]
    items: list[Item] = dc_field(default_factory=list)

    @property
    def min_seq(self) -> int:
        inner = [it.min_seq for it in self.items]
        return min(inner) if inner else 1 << 62

    @property
    def root(self) -> BusId:
        return self.anchors[0] if self.kind != "e" else ""


def tree_key(root: BusId) -> str:
    return f"t_{root}"


def edge_key(a: BusId, b: BusId) -> str:
    a, b = line_key(a, b)
    return f"e_{a}_{b}"


def tri_key(base: BusId) -> str:
    return f"tri_{base}"


@dataclass
class ExpansionTarget:
    kind: str                 # whole-field | single-leaf | single-edge-node | single-absorbed-node
    field_key: str
    member: BusId | None = None


class ReductionLedger:
    """Ordered record of every reduction step, replayable in both directions."""

    def __init__(self):
        self.fields: dict[str, Field] = {}
        self.bus_data: dict[BusId, BusRecord] = {}
        self.line_data: dict[tuple[BusId, BusId], complex] = {}
        self.meta: dict = {}
        self._next_seq = 0

    # -- recording (called by the reduction stages) -------------------------

    def next_seq(self) -> int:
        self._next_seq += 1
        return self._next_seq

    def record_removed_bus(self, bus: Bus) -> None:
        if bus.id in self.bus_data:
            raise LedgerIntegrityError(f"bus {bus.id!r} recorded as removed twice")
        self.bus_data[bus.id] = BusRecord(bus.voltage_kv, bus.shunt, bus.current)

    def record_removed_line(self, a: BusId, b: BusId, admittance: complex) -> None:
        key = line_key(a, b)
        if key in self.line_data:
            raise LedgerIntegrityError(f"line {key} recorded as removed twice")
        self.line_data[key] = admittance

    def _get_field(self, key: str, kind: str, anchors: tuple[BusId, ...]) -> Field:
        if key not in self.fields:
            self.fields[key] = Field(key=key, kind=kind, anchors=anchors)
        return self.fields[key]

    def tree_field(self, root: BusId) -> Field:
        return self._get_field(tree_key(root), "t", (root,))

    def edge_field(self, a: BusId, b: BusId) -> Field:
        a, b = line_key(a, b)
        return self._get_field(edge_key(a, b), "e", (a, b))

    def tri_field(self, base: BusId) -> Field:
        return self._get_field(tri_key(base), "tri", (base,))

    def collapse_leaf(self, leaf: BusId, root: BusId, stage: str, seq: int) -> None:
        """Degree-one collapse of ``leaf`` into ``root``: either extend and
        relocate an existing tree rooted at the leaf, or start a new branch."""
        lkey = tree_key(leaf)
        target = self.tree_field(root)
        if lkey in self.fields:
            moved = self.fields.pop(lkey)
            for item in moved.items:
                if isinstance(item, BranchItem):
                    item.path.append(root)
                    item.seqs.append(seq)
            target.items.extend(moved.items)
        else:
            target.items.append(BranchItem(path=[leaf, root], seqs=[seq], stage=stage))

    def eliminate_degree_two(self, mid: BusId, a: BusId, b: BusId,
                             created_line: bool, seq: int) -> Field:
        """Record mapping ``mid`` onto the edge {a, b}; merges any meta-edge
        history ending at ``mid`` and nests ``mid``'s tree data."""
        target = self.edge_field(a, b)
        for nb in sorted((a, b)):
            old_key = edge_key(mid, nb)
            if old_key in self.fields:
                old = self.fields.pop(old_key)
                target.items.extend(old.items)
        key_a, key_b = line_key(a, b)
        target.items.append(EdgeNodeItem(triple=(key_a, mid, key_b),
                                         created_line=created_line, seq=seq))
        tkey = tree_key(mid)
        if tkey in self.fields:
            tree = self.fields.pop(tkey)
            target.items.append(NestedField(key=tkey, anchors=(mid,),
                                            items=tree.items, seq=self.next_seq(),
                                            stage="d2"))
        return target

    def nest_edge_into_tree(self, a: BusId, b: BusId, terminal: BusId) -> None:
        """Prepend the edge field that triggered a sparse-triangle collapse to
        the tree of the terminal node the collapse ended at."""
        ekey = edge_key(a, b)
        if ekey not in self.fields:
            raise LedgerIntegrityError(f"no field {ekey!r} to nest")
        edge = self.fields.pop(ekey)
        target = self.tree_field(terminal)
        target.items.insert(0, NestedField(key=ekey, anchors=edge.anchors,
                                           items=edge.items, seq=self.next_seq(),
                                           stage="d2"))

    def absorb_into_triangle(self, base: BusId, node: BusId,
                             lines: list[LineRecord], seq: int) -> None:
        target = self.tri_field(base)
        target.items.append(AbsorbedItem(node=node, origin=base, lines=lines, seq=seq))
        old_key = tri_key(node)
        if old_key in self.fields:
            old = self.fields.pop(old_key)
            target.items.extend(old.items)

    def append_base_lines(self, base: BusId, lines: list[LineRecord]) -> None:
        self.tri_field(base).items.append(
            BaseLinesItem(node=base, lines=lines, seq=self.next_seq()))

    # -- queries -------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.fields and not self.bus_data and not self.line_data

    def ordered_fields(self) -> list[Field]:
        return sorted(self.fields.values(), key=lambda f: f.min_seq)

    def nodes_in_items(self, items: list[Item]) -> set[BusId]:
        """Every bus id the given items can restore, nested maps included."""
        out: set[BusId] = set()
        for item in items:
            if isinstance(item, BranchItem):
                out.update(item.path[:-1])
            elif isinstance(item, EdgeNodeItem):
                out.add(item.triple[1])
            elif isinstance(item, AbsorbedItem):
                out.add(item.node)
            elif isinstance(item, NestedField):
                out.update(self.nodes_in_items(item.items))
        return out

    def cluster_size(self, bus_id: BusId) -> int:
        """Nodes represented by a live bus, the bus itself included."""
        seen: set[BusId] = set()

        def count(node: BusId) -> int:
            if node in seen:
                return 0
            seen.add(node)
            total = 1
            for key in (tree_key(node), tri_key(node)):
                f = self.fields.get(key)
                if f is not None:
                    for inner in self.nodes_in_items(f.items):
                        total += count(inner)
            return total

        return count(bus_id)

    def expandable_fields(self, bus_id: BusId) -> list[str]:
        return [k for k in (tree_key(bus_id), tri_key(bus_id)) if k in self.fields]

    def find_restorer(self, node: BusId) -> str | None:
        """Target string (``key`` or ``key:member``) whose expansion would
        bring ``node`` back, if any."""
        for f in self.ordered_fields():
            hit = self._find_in_items(f, f.items, node, direct=True)
            if hit is not None:
                return hit
        return None

    def _find_in_items(self, f: Field, items: list[Item], node: BusId,
                       direct: bool) -> str | None:
        for item in items:
            if isinstance(item, BranchItem) and node in item.path[:-1]:
                return f"{f.key}:{item.path[0]}" if direct else f.key
            if isinstance(item, EdgeNodeItem) and item.triple[1] == node:
                return f"{f.key}:{node}" if direct else f.key
            if isinstance(item, AbsorbedItem) and item.node == node:
                return f"{f.key}:{node}" if direct else f.key
            if isinstance(item, NestedField):
                hit = self._find_in_items(f, item.items, node, direct=False)
                if hit is not None:
                    return hit
        return None

    # -- event stream ----------------------------------------------------------

    def events(self) -> list[tuple]:
        """Every removal event in chronological order.

        Shapes: ``("leaf", seq, stage, node, parent)``,
        ``("edge", seq, a, mid, b, created_line)``,
        ``("absorb", seq, base, node, line_records)``.
        """
        out: list[tuple] = []

        def walk(items: list[Item]) -> None:
            for item in items:
                if isinstance(item, BranchItem):
                    for i, seq in enumerate(item.seqs):
                        out.append(("leaf", seq, item.stage,
                                    item.path[i], item.path[i + 1]))
                elif isinstance(item, EdgeNodeItem):
                    a, m, b = item.triple
                    out.append(("edge", item.seq, a, m, b, item.created_line))
                elif isinstance(item, AbsorbedItem):
                    out.append(("absorb", item.seq, item.origin, item.node, item.lines))
                elif isinstance(item, NestedField):
                    walk(item.items)

        for f in self.fields.values():
            walk(f.items)
        # Extension events are shared between sibling branches; keep one copy.
        dedup: dict[int, tuple] = {}
        for ev in out:
            prior = dedup.get(ev[1])
            if prior is not None and prior != ev:
                raise LedgerIntegrityError(f"two different events share seq {ev[1]}")
            dedup[ev[1]] = ev
        return [dedup[s] for s in sorted(dedup)]

    def tri_collapse_triples(self) -> list[tuple[BusId, BusId, BusId]]:
        """Chronological (base, absorbed, absorbed) triples: each greedy
        collapse absorbs exactly two nodes in consecutive events."""
        absorbs = [ev for ev in self.events() if ev[0] == "absorb"]
        if len(absorbs) % 2:
            raise LedgerIntegrityError("odd number of triangle absorptions")
        triples = []
        for first, second in zip(absorbs[::2], absorbs[1::2]):
            if first[2] != second[2]:
                raise LedgerIntegrityError(
                    f"absorptions at seq {first[1]}/{second[1]} have different bases")
            triples.append((first[2], first[3], second[3]))
        return triples

    # -- replay (forward) -------------------------------------------------------

    def replay(self, original: Network) -> Network:
        """Re-run every recorded step on ``original``; the result must equal
        the reduced network this ledger was built against."""
        net = original.copy()
        for ev in self.events():
            try:
                if ev[0] == "leaf":
                    _, _, _, node, parent = ev
                    net.remove_line(node, parent)
                    net.remove_bus(node)
                elif ev[0] == "edge":
                    _, _, a, m, b, created = ev
                    net.remove_line(m, a)
                    net.remove_line(m, b)
                    net.remove_bus(m)
                    if created:
                        net.add_line(a, b, 0j)
                elif ev[0] == "absorb":
                    _, _, base, node, recs = ev
                    for rec in recs:
                        net.remove_line(rec.a, rec.b)
                        if rec.moved:
                            net.add_line(base, rec.other(node), rec.admittance)
                    net.remove_bus(node)
            except Exception as exc:
                raise LedgerIntegrityError(f"replay failed at seq {ev[1]}: {exc}") from exc
        return net

    # -- expansion ----------------------------------------------------------------

    def _restore_bus(self, net: Network, node: BusId) -> None:
        rec = self.bus_data.pop(node, None)
        if rec is None:
            raise LedgerIntegrityError(f"no stored attributes for bus {node!r}")
        net.add_bus(Bus(id=node, voltage_kv=rec.voltage_kv,
                        shunt=rec.shunt, current=rec.current))

    def _restore_line(self, net: Network, a: BusId, b: BusId) -> None:
        adm = self.line_data.pop(line_key(a, b), None)
        if adm is None:
            raise LedgerIntegrityError(f"no stored admittance for line {line_key(a, b)}")
        net.add_line(a, b, adm)

    def _require_present(self, net: Network, nodes: list[BusId], doing: str) -> None:
        missing = [n for n in nodes if n not in net.buses]
        if missing:
            prereqs = []
            for n in missing:
                restorer = self.find_restorer(n)
                prereqs.append(restorer if restorer is not None else f"<unknown:{n}>")
            raise DependencyError(
                f"{doing} needs {', '.join(repr(m) for m in missing)} restored first",
                prerequisites=prereqs)

    def _expand_branch(self, net: Network, item: BranchItem) -> None:
        path = item.path
        self._require_present(net, [path[-1]], f"expanding branch {path}")
        for i in range(len(path) - 2, -1, -1):
            if path[i] in net.buses:
                continue
            self._restore_bus(net, path[i])
            self._restore_line(net, path[i], path[i + 1])

    def _rewrite_siblings(self, net: Network, f: Field) -> None:
        """Truncate remaining branches at their nearest restored ancestor and
        move them under that ancestor's tree field."""
        for item in list(f.items):
            if not isinstance(item, BranchItem):
                continue
            cut = next((i for i, n in enumerate(item.path) if n in net.buses), None)
            if cut is None or cut == len(item.path) - 1:
                continue
            if cut == 0:
                raise LedgerIntegrityError(
                    f"branch head {item.path[0]!r} is present but unconsumed")
            f.items.remove(item)
            item.path = item.path[:cut + 1]
            item.seqs = item.seqs[:cut]
            if item.path[-1] == f.root:
                f.items.append(item)
            else:
                self.tree_field(item.path[-1]).items.append(item)

    def _expand_edge_node(self, net: Network, item: EdgeNodeItem) -> None:
        a, m, b = item.triple
        self._require_present(net, [a, b], f"expanding edge node {m!r}")
        self._restore_bus(net, m)
        self._restore_line(net, m, a)
        self._restore_line(net, m, b)
        if item.created_line:
            if not net.has_line(a, b):
                raise LedgerIntegrityError(
                    f"meta line {line_key(a, b)} missing while expanding {m!r}")
            net.remove_line(a, b)

    def _expand_absorbed(self, net: Network, item: AbsorbedItem) -> None:
        need = [item.origin] + [rec.other(item.node) for rec in item.lines]
        self._require_present(net, sorted(set(need)), f"expanding absorbed node {item.node!r}")
        self._restore_bus(net, item.node)
        for rec in item.lines:
            net.add_line(rec.a, rec.b, rec.admittance)
            if rec.moved:
                other = rec.other(item.node)
                if not net.has_line(item.origin, other):
                    raise LedgerIntegrityError(
                        f"moved line {line_key(item.origin, other)} missing while "
                        f"expanding {item.node!r}")
                net.remove_line(item.origin, other)

    def _pop_ready(self, net: Network) -> None:
        """Turn nested maps and relocated triangle records back into top-level
        fields once the nodes anchoring them exist again."""
        changed = True
        while changed:
            changed = False
            for f in list(self.fields.values()):
                for item in list(f.items):
                    if isinstance(item, NestedField) and all(
                            a in net.buses for a in item.anchors):
                        f.items.remove(item)
                        kind = "t" if item.key.startswith("t_") else "e"
                        target = self._get_field(item.key, kind, item.anchors)
                        target.items.extend(item.items)
                        changed = True
                    elif (isinstance(item, AbsorbedItem) and f.kind == "tri"
                          and item.origin != f.root and item.origin in net.buses):
                        f.items.remove(item)
                        self.tri_field(item.origin).items.append(item)
                        changed = True
        self._prune_empty()

    def _prune_empty(self) -> None:
        for key in list(self.fields):
            f = self.fields[key]
            if not f.items:
                del self.fields[key]
            elif f.kind == "tri" and all(isinstance(i, BaseLinesItem) for i in f.items):
                del self.fields[key]

    def expand(self, net: Network, target: ExpansionTarget) -> None:
        """Apply one expansion in place; consumed records leave the ledger.

        A whole-field expansion that hits a dependency partway through keeps
        its completed restorations (the pair stays replay-consistent); callers
        needing all-or-nothing semantics should snapshot first, as the
        exploration service does.
        """
        f = self.fields.get(target.field_key)
        if f is None:
            raise TargetNotFoundError(f"no field {target.field_key!r} in ledger")
        if target.member is None:
            self._expand_whole_field(net, f)
        elif f.kind == "t":
            self._expand_single_leaf(net, f, target.member)
        elif f.kind == "e":
            self._expand_single_edge_node(net, f, target.member)
        else:
            self._expand_single_absorbed(net, f, target.member)
        self._pop_ready(net)

    def _expand_whole_field(self, net: Network, f: Field) -> None:
        if f.kind != "e":
            self._require_present(net, [f.root], f"expanding field {f.key!r}")
        else:
            self._require_present(net, list(f.anchors), f"expanding field {f.key!r}")
        for item in reversed(list(f.items)):
            if isinstance(item, BranchItem):
                self._expand_branch(net, item)
                f.items.remove(item)
            elif isinstance(item, EdgeNodeItem):
                self._expand_edge_node(net, item)
                f.items.remove(item)
            elif isinstance(item, AbsorbedItem):
                if item.origin == f.root:
                    self._expand_absorbed(net, item)
                    f.items.remove(item)
                # else: relocated to its own base's field by _pop_ready once
                # that base is restored; "outer first".
            # NestedField items pop out via _pop_ready.

    def _expand_single_leaf(self, net: Network, f: Field, leaf: BusId) -> None:
        item = next((i for i in f.items
                     if isinstance(i, BranchItem) and i.path[0] == leaf), None)
        if item is None:
            restorer = self._find_in_items(f, f.items, leaf, direct=True)
            if restorer is not None:
                raise DependencyError(
                    f"{leaf!r} is not a leaf of {f.key!r}; it is restored by "
                    f"{restorer}", prerequisites=[restorer])
            raise TargetNotFoundError(f"no leaf {leaf!r} in field {f.key!r}")
        self._expand_branch(net, item)
        f.items.remove(item)
        self._rewrite_siblings(net, f)

    def _expand_single_edge_node(self, net: Network, f: Field, mid: BusId) -> None:
        item = next((i for i in f.items
                     if isinstance(i, EdgeNodeItem) and i.triple[1] == mid), None)
        if item is None:
            raise TargetNotFoundError(f"no eliminated node {mid!r} in field {f.key!r}")
        self._expand_edge_node(net, item)
        f.items.remove(item)

    def _expand_single_absorbed(self, net: Network, f: Field, node: BusId) -> None:
        item = next((i for i in f.items
                     if isinstance(i, AbsorbedItem) and i.node == node), None)
        if item is None:
            raise TargetNotFoundError(f"no absorbed node {node!r} in field {f.key!r}")
        if item.origin != f.root and item.origin not in net.buses:
            raise DependencyError(
                f"absorbed node {node!r} belongs to cluster {item.origin!r}",
                prerequisites=[f"{f.key}:{item.origin}"])
        self._expand_absorbed(net, item)
        f.items.remove(item)

    def expand_all(self, net: Network) -> Network:
        """Undo every recorded event in exact reverse order; empties the ledger."""
        events = self.events()
        for ev in reversed(events):
            try:
                if ev[0] == "leaf":
                    _, _, _, node, parent = ev
                    self._restore_bus(net, node)
                    self._restore_line(net, node, parent)
                elif ev[0] == "edge":
                    _, _, a, m, b, created = ev
                    if created:
                        net.remove_line(a, b)
                    self._restore_bus(net, m)
                    self._restore_line(net, m, a)
                    self._restore_line(net, m, b)
                else:
                    _, _, base, node, recs = ev
                    self._restore_bus(net, node)
                    for rec in recs:
                        net.add_line(rec.a, rec.b, rec.admittance)
                        if rec.moved:
                            net.remove_line(base, rec.other(node))
            except Exception as exc:
                if isinstance(exc, LedgerIntegrityError):
                    raise
                raise LedgerIntegrityError(
                    f"expand_all failed at seq {ev[1]}: {exc}") from exc
        self.fields.clear()
        if self.bus_data or self.line_data:
            raise LedgerIntegrityError(
                f"{len(self.bus_data)} bus and {len(self.line_data)} line records "
                f"were never consumed")
        return net


def parse_target(text: str, ledger: ReductionLedger) -> ExpansionTarget:
    """Resolve a ``KEY[:MEMBER]`` string against the ledger's fields."""
    if text in ledger.fields:
        return ExpansionTarget(kind="whole-field", field_key=text)
    if ":" in text:
        key, member = text.rsplit(":", 1)
        if key in ledger.fields:
            kind = {"t": "single-leaf", "e": "single-edge-node",
                    "tri": "single-absorbed-node"}[ledger.fields[key].kind]
            return ExpansionTarget(kind=kind, field_key=key, member=member)
    raise TargetNotFoundError(f"no field matching target {text!r}")


# -- serialization ------------------------------------------------------------


def _item_to_json(item: Item) -> dict:
    if isinstance(item, BranchItem):
        return {"kind": "branch", "stage": item.stage,
                "path": item.path, "seqs": item.seqs}
    if isinstance(item, EdgeNodeItem):
        return {"kind": "edge_node", "seq": item.seq, "triple": list(item.triple),
                "created_line": item.created_line}
    if isinstance(item, AbsorbedItem):
        return {"kind": "absorbed", "seq": item.seq, "node": item.node,
                "origin": item.origin, "lines": [_line_to_json(r) for r in item.lines]}
    if isinstance(item, BaseLinesItem):
        return {"kind": "base_lines", "seq": item.seq, "node": item.node,
                "lines": [_line_to_json(r) for r in item.lines]}
    if isinstance(item, NestedField):
        return {"kind": "nested", "seq": item.seq, "stage": item.stage,
                "key": item.key, "anchors": list(item.anchors),
                "items": [_item_to_json(i) for i in item.items]}
    raise TypeError(f"unknown item {item!r}")


def _line_to_json(rec: LineRecord) -> dict:
    return {"a": rec.a, "b": rec.b, "adm_re": rec.admittance.real,
            "adm_im": rec.admittance.imag, "moved": rec.moved}


def _item_from_json(doc: dict) -> Item:
    kind = doc["kind"]
    if kind == "branch":
        return BranchItem(path=list(doc["path"]), seqs=list(doc["seqs"]),
                          stage=doc["stage"])
    if kind == "edge_node":
        return EdgeNodeItem(triple=tuple(doc["triple"]),
                            created_line=doc["created_line"], seq=doc["seq"])
    if kind == "absorbed":
        return AbsorbedItem(node=doc["node"], origin=doc["origin"],
                            lines=[_line_from_json(r) for r in doc["lines"]],
                            seq=doc["seq"])
    if kind == "base_lines":
        return BaseLinesItem(node=doc["node"],
                             lines=[_line_from_json(r) for r in doc["lines"]],
                             seq=doc["seq"])
    if kind == "nested":
        return NestedField(key=doc["key"], anchors=tuple(doc["anchors"]),
                           items=[_item_from_json(i) for i in doc["items"]],
                           seq=doc["seq"], stage=doc["stage"])
    raise ParseError(f"unknown ledger item kind {kind!r}")


def serialize(ledger: ReductionLedger) -> bytes:
    meta = ledger.meta
    doc = {
        "format_version": FORMAT_VERSION,
        "seed": meta.get("seed"),
        "thresholds": meta.get("thresholds", {}),
        "stages": meta.get("stages", []),
        "stage_counts": meta.get("stage_counts", []),
        "entries": [
            {"key": f.key, "kind": f.kind, "anchors": list(f.anchors),
             "items": [_item_to_json(i) for i in f.items]}
            for f in ledger.ordered_fields()
        ],
        "bus_data": [
            {"id": bid, "voltage_kv": rec.voltage_kv,
             "shunt_re": rec.shunt.real, "shunt_im": rec.shunt.imag,
             "current_re": rec.current.real, "current_im": rec.current.imag}
            for bid, rec in sorted(ledger.bus_data.items())
        ],
        "line_data": [
            {"a": a, "b": b, "adm_re": adm.real, "adm_im": adm.imag}
            for (a, b), adm in sorted(ledger.line_data.items())
        ],
        "next_seq": ledger._next_seq,
    }
    return (json.dumps(doc, indent=2) + "\n").encode()


def deserialize(data: bytes) -> ReductionLedger:
    try:
        doc = json.loads(data.decode())
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), location=f"{exc.lineno}:{exc.colno}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported ledger format {doc.get('format_version')!r}")
    ledger = ReductionLedger()
    ledger.meta = {
        "seed": doc.get("seed"),
        "thresholds": doc.get("thresholds", {}),
        "stages": doc.get("stages", []),
        "stage_counts": doc.get("stage_counts", []),
    }
    ledger._next_seq = doc.get("next_seq", 0)
    for entry in doc.get("entries", []):
        f = Field(key=entry["key"], kind=entry["kind"],
                  anchors=tuple(entry["anchors"]),
                  items=[_item_from_json(i) for i in entry["items"]])
        ledger.fields[f.key] = f
    for rec in doc.get("bus_data", []):
        ledger.bus_data[rec["id"]] = BusRecord(
            voltage_kv=rec["voltage_kv"],
            shunt=complex(rec["shunt_re"], rec["shunt_im"]),
            current=complex(rec["current_re"], rec["current_im"]))
    for rec in doc.get("line_data", []):
        ledger.line_data[(rec["a"], rec["b"])] = complex(rec["adm_re"], rec["adm_im"])
    return ledger


def _line_from_json(doc: dict) -> LineRecord:
    return LineRecord(a=doc["a"], b=doc["b"],
                      admittance=complex(doc["adm_re"], doc["adm_im"]),
                      moved=doc["moved"])
