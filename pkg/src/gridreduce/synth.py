"""Synthetic multiscale networks with reduction counts known by construction.

The generator assembles a braced backbone ring (every node degree three via
antipodal chords, girth above three so it is triangle-free) and hangs the
classic reducible motifs off it:

* trees rooted at ring nodes — eaten whole by the degree-one stage;
* transmission strings bridging two ring nodes at distance three — their
  interiors are eaten by the degree-two stage;
* "pure" triangle pockets, each member tied to its own ring node — the
  greedy triangular stage absorbs exactly two nodes per pocket;
* optional triangular-lattice mesh pockets anchored at their four corners,
  whose overlapping triangles make the greedy collapse outcome depend on
  the base permutation (used for seed-sensitivity studies; their counts
  are deliberately not predicted).

Attachment sites are spaced so no stage can interact with another motif,
which is what makes the per-stage counts exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, SpecError
from .network import Bus, Network, is_connected
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class TreeSpec:
    """Complete ``branching``-ary tree of the given depth below a ring root."""

    depth: int
    branching: int

    def added_nodes(self) -> int:
        if self.branching == 1:
            return self.depth
        return self.branching * (self.branching ** self.depth - 1) // (self.branching - 1)


@dataclass
class SyntheticSpec:
    ring_size: int = 12
    trees: list[TreeSpec] = field(default_factory=list)
    strings: list[int] = field(default_factory=list)   # length incl. both endpoints
    pockets: int = 0
    meshes: list[tuple[int, int]] = field(default_factory=list)   # (rows, cols)
    ring_kv: float = 345.0
    tree_kv: float = 69.0
    string_kv: float = 230.0
    pocket_kv: float = 138.0
    mesh_kv: float = 138.0
    seed: int = 0

    def validate(self) -> None:
        if self.ring_size < 10 or self.ring_size % 2:
            raise SpecError(f"ring_size must be even and >= 10, got {self.ring_size}")
        if self.meshes and self.ring_size < 16:
            raise SpecError("mesh pockets need ring_size >= 16 to place their anchors")
        for t in self.trees:
            if t.depth < 1 or t.branching < 1:
                raise SpecError(f"tree needs depth >= 1 and branching >= 1, got {t}")
        for length in self.strings:
            if length < 3:
                raise SpecError(f"string length counts both endpoints; need >= 3, got {length}")
        if self.pockets < 0:
            raise SpecError("pockets must be non-negative")
        for rows, cols in self.meshes:
            if rows < 2 or cols < 2:
                raise SpecError(f"mesh needs rows, cols >= 2, got ({rows}, {cols})")
        # One attachment cursor walks the ring; motifs reserve enough slots
        # that no two attachment neighborhoods touch (wrap-around included).
        needed = (6 * self.pockets + 7 * len(self.strings) + 9 * len(self.meshes)
                  + 2 * len(self.trees))
        if needed > self.ring_size - 1:
            raise SpecError(f"ring_size {self.ring_size} cannot host all motifs "
                            f"(needs {needed + 1} slots)")


@dataclass
class SyntheticPrediction:
    """Exact per-stage outcomes forced by the construction."""

    nodes: dict[str, int]
    edges: dict[str, int]
    removed: dict[str, int]
    tri_exact: bool   # False when meshes make the triangular count seed-dependent

    def to_json_dict(self) -> dict:
        return {"nodes": self.nodes, "edges": self.edges,
                "removed": self.removed, "tri_exact": self.tri_exact}


def predict(spec: SyntheticSpec) -> SyntheticPrediction:
    spec.validate()
    tree_nodes = sum(t.added_nodes() for t in spec.trees)
    string_interiors = sum(length - 2 for length in spec.strings)
    mesh_nodes = sum(r * c for r, c in spec.meshes)
    mesh_edges = sum(3 * r * c - 2 * r - 2 * c + 1 + 4 for r, c in spec.meshes)
    n_full = spec.ring_size + tree_nodes + string_interiors + 3 * spec.pockets + mesh_nodes
    e_full = (spec.ring_size + spec.ring_size // 2 + tree_nodes
              + sum(length - 1 for length in spec.strings)
              + 6 * spec.pockets + mesh_edges)
    nodes = {"full": n_full, "d1": n_full - tree_nodes,
             "d2": n_full - tree_nodes - string_interiors}
    edges = {"full": e_full, "d1": e_full - tree_nodes,
             "d2": e_full - tree_nodes - string_interiors}
    removed = {"d1": tree_nodes, "d2": string_interiors}
    tri_exact = not spec.meshes
    if tri_exact:
        nodes["tri"] = nodes["d2"] - 2 * spec.pockets
        edges["tri"] = edges["d2"] - 3 * spec.pockets
        removed["tri"] = 2 * spec.pockets
    return SyntheticPrediction(nodes=nodes, edges=edges, removed=removed,
                               tri_exact=tri_exact)


def generate_synthetic(spec: SyntheticSpec) -> Network:
    """Build the network described by ``spec``; strictly inductive, connected,
    with zero injected currents."""
    spec.validate()
    rng = Xoshiro256StarStar(spec.seed)
    net = Network()

    def adm() -> complex:
        # inductive line admittance, weight in [0.5, 2.5)
        return complex(0, -(0.5 + 2.0 * rng.next_u64() / 2 ** 64))

    def shunt() -> complex:
        return complex(0, -(0.01 + 0.09 * rng.next_u64() / 2 ** 64))

    ring = [f"r{i:04d}" for i in range(spec.ring_size)]
    for rid in ring:
        net.add_bus(Bus(id=rid, voltage_kv=spec.ring_kv, shunt=shunt()))
    for i in range(spec.ring_size):
        net.add_line(ring[i], ring[(i + 1) % spec.ring_size], adm())
    for i in range(spec.ring_size // 2):
        net.add_line(ring[i], ring[i + spec.ring_size // 2], adm())

    cursor = 0

    def take(slots: int) -> int:
        nonlocal cursor
        at = cursor
        cursor += slots
        return at

    for j in range(spec.pockets):
        at = take(6)
        members = [f"p{j:03d}_{ch}" for ch in "abc"]
        for k, member in enumerate(members):
            net.add_bus(Bus(id=member, voltage_kv=spec.pocket_kv, shunt=shunt()))
            net.add_line(member, ring[at + 2 * k], adm())
        net.add_line(members[0], members[1], adm())
        net.add_line(members[0], members[2], adm())
        net.add_line(members[1], members[2], adm())

    for j, length in enumerate(spec.strings):
        at = take(7)
        prev = ring[at]
        for k in range(length - 2):
            node = f"s{j:03d}_{k:03d}"
            net.add_bus(Bus(id=node, voltage_kv=spec.string_kv, shunt=shunt()))
            net.add_line(prev, node, adm())
            prev = node
        net.add_line(prev, ring[at + 3], adm())

    for j, (rows, cols) in enumerate(spec.meshes):
        at = take(9)
        grid = {}
        for r in range(rows):
            for c in range(cols):
                node = f"m{j:03d}_{r:02d}_{c:02d}"
                grid[(r, c)] = node
                net.add_bus(Bus(id=node, voltage_kv=spec.mesh_kv, shunt=shunt()))
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    net.add_line(grid[(r, c)], grid[(r, c + 1)], adm())
                if r + 1 < rows:
                    net.add_line(grid[(r, c)], grid[(r + 1, c)], adm())
                    if c + 1 < cols:
                        net.add_line(grid[(r, c)], grid[(r + 1, c + 1)], adm())
        corners = [(0, 0), (0, cols - 1), (rows - 1, 0), (rows - 1, cols - 1)]
        for k, corner in enumerate(corners):
            net.add_line(grid[corner], ring[at + 2 * k], adm())

    for j, tree in enumerate(spec.trees):
        at = take(2)
        frontier = [ring[at]]
        count = 0
        for level in range(tree.depth):
            next_frontier = []
            for parent in frontier:
                for _ in range(tree.branching):
                    node = f"t{j:03d}_{count:04d}"
                    count += 1
                    net.add_bus(Bus(id=node, voltage_kv=spec.tree_kv, shunt=shunt()))
                    net.add_line(parent, node, adm())
                    next_frontier.append(node)
            frontier = next_frontier

    if not is_connected(net):
        raise SpecError("generated network is disconnected")
    return net


def load_spec(path: str | Path) -> SyntheticSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), location=f"{path}:{exc.lineno}:{exc.colno}") from None
    except OSError as exc:
        raise ParseError(str(exc), location=str(path)) from None
    try:
        trees = [TreeSpec(depth=t["depth"], branching=t["branching"])
                 for t in doc.get("trees", [])]
        spec = SyntheticSpec(
            ring_size=doc.get("ring_size", 12),
            trees=trees,
            strings=list(doc.get("strings", [])),
            pockets=doc.get("pockets", 0),
            meshes=[tuple(m) for m in doc.get("meshes", [])],
            ring_kv=doc.get("ring_kv", 345.0),
            tree_kv=doc.get("tree_kv", 69.0),
            string_kv=doc.get("string_kv", 230.0),
            pocket_kv=doc.get("pocket_kv", 138.0),
            mesh_kv=doc.get("mesh_kv", 138.0),
            seed=doc.get("seed", 0),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad synthetic spec: {exc}", location=str(path)) from None
    spec.validate()
    return spec
