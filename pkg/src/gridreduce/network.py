"""Grid domain model: buses, lines, validation and pure-topology primitives.

Bus identifiers are opaque strings ordered by ordinary string comparison;
every reduction keeps the identifier of the surviving root/base node, so an
identifier never changes meaning over the life of a pipeline run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateNetworkError, ValidationError

BusId = str

# Relative tolerance used for "purely imaginary" checks.  Real data carries
# rounding noise on the resistive part, so the test is scaled against the
# inductive magnitude rather than absolute.
IMAG_RTOL = 1e-9


def line_key(a: BusId, b: BusId) -> tuple[BusId, BusId]:
    """Canonical unordered-pair key for a line."""
    return (a, b) if a <= b else (b, a)


@dataclass
class Bus:
    id: BusId
    voltage_kv: float
    shunt: complex = 0j      # self-loop admittance A_ii, siemens
    current: complex = 0j    # injected current, amperes


@dataclass(frozen=True)
class Line:
    a: BusId
    b: BusId
    admittance: complex

    @property
    def key(self) -> tuple[BusId, BusId]:
        return line_key(self.a, self.b)


@dataclass
class RawLine:
    """Unvalidated line as read from disk; may be parallel or self-referential."""

    a: BusId
    b: BusId
    admittance: complex


@dataclass
class RawNetwork:
    """Unvalidated input: may hold zero-voltage buses, parallel and self lines,
    and several connected components."""

    buses: list[Bus] = field(default_factory=list)
    lines: list[RawLine] = field(default_factory=list)


class Network:
    """Simple undirected graph of buses and admittance-weighted lines.

    Lines are stored once per unordered pair; the adjacency map is kept in
    sync by the mutators so degree queries stay O(1).
    """

    def __init__(self, buses: list[Bus] | None = None,
                 lines: list[Line] | None = None):
        self.buses: dict[BusId, Bus] = {}
        self.lines: dict[tuple[BusId, BusId], complex] = {}
        self._adj: dict[BusId, set[BusId]] = {}
        for bus in buses or []:
            self.add_bus(bus)
        for line in lines or []:
            self.add_line(line.a, line.b, line.admittance)

    # -- mutators ---------------------------------------------------------

    def add_bus(self, bus: Bus) -> None:
        if bus.id in self.buses:
            raise ValidationError(f"duplicate bus id {bus.id!r}")
        self.buses[bus.id] = bus
        self._adj[bus.id] = set()

    def add_line(self, a: BusId, b: BusId, admittance: complex) -> None:
        if a == b:
            raise ValidationError(f"self line at bus {a!r}")
        if a not in self.buses or b not in self.buses:
            missing = a if a not in self.buses else b
            raise ValidationError(f"line {a!r}-{b!r} references unknown bus {missing!r}")
        key = line_key(a, b)
        if key in self.lines:
            raise ValidationError(f"duplicate line {key[0]!r}-{key[1]!r}")
        self.lines[key] = admittance
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_line(self, a: BusId, b: BusId) -> complex:
        key = line_key(a, b)
        adm = self.lines.pop(key)
        self._adj[a].discard(b)
        self._adj[b].discard(a)
        return adm

    def remove_bus(self, bus_id: BusId) -> Bus:
        """Remove a bus; its incident lines must already be gone."""
        if self._adj[bus_id]:
            raise ValidationError(f"bus {bus_id!r} still has incident lines")
        del self._adj[bus_id]
        return self.buses.pop(bus_id)

    # -- queries ----------------------------------------------------------

    def neighbors(self, bus_id: BusId) -> set[BusId]:
        return self._adj[bus_id]

    def degree(self, bus_id: BusId) -> int:
        return len(self._adj[bus_id])

    def has_line(self, a: BusId, b: BusId) -> bool:
        return line_key(a, b) in self.lines

    def admittance(self, a: BusId, b: BusId) -> complex:
        return self.lines[line_key(a, b)]

    def incident_lines(self, bus_id: BusId) -> list[Line]:
        return [Line(*line_key(bus_id, other), self.lines[line_key(bus_id, other)])
                for other in sorted(self._adj[bus_id])]

    @property
    def node_count(self) -> int:
        return len(self.buses)

    @property
    def edge_count(self) -> int:
        return len(self.lines)

    def bus_ids(self) -> list[BusId]:
        return sorted(self.buses)

    def copy(self) -> "Network":
        net = Network()
        for bus in self.buses.values():
            net.add_bus(replace(bus))
        for (a, b), adm in self.lines.items():
            net.add_line(a, b, adm)
        return net

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        if set(self.buses) != set(other.buses) or set(self.lines) != set(other.lines):
            return False
        for bid, bus in self.buses.items():
            ob = other.buses[bid]
            if (bus.voltage_kv, bus.shunt, bus.current) != (ob.voltage_kv, ob.shunt, ob.current):
                return False
        return all(self.lines[k] == other.lines[k] for k in self.lines)

    def __repr__(self) -> str:
        return f"Network(|N|={self.node_count}, |E|={self.edge_count})"


DegreeMap = dict[BusId, int]


def degree_map(net: Network) -> DegreeMap:
    """Topological degree of every bus, self loops (shunts) excluded."""
    return {bid: net.degree(bid) for bid in net.buses}


def connected_components(net: Network) -> list[set[BusId]]:
    seen: set[BusId] = set()
    components = []
    for start in net.buses:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            for nb in net.neighbors(node):
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        seen |= comp
        components.append(comp)
    return components


def is_connected(net: Network) -> bool:
    return net.node_count > 0 and len(connected_components(net)) == 1


def graph_density(net: Network) -> float:
    """2|E| / (|N|(|N|-1)); 1.0 is a complete graph."""
    n = net.node_count
    if n < 2:
        raise ValidationError(f"graph density needs at least 2 buses, got {n}")
    return 2.0 * net.edge_count / (n * (n - 1))


def topological_connectivity(net: Network,
                             ordering: list[BusId] | None = None) -> np.ndarray:
    """Symmetric 0/1 matrix with zero diagonal; entry (i, j) is 1 iff a line
    joins buses ``ordering[i]`` and ``ordering[j]``."""
    if ordering is None:
        ordering = net.bus_ids()
    pos = {bid: i for i, bid in enumerate(ordering)}
    if len(pos) != net.node_count or set(pos) != set(net.buses):
        raise ValidationError("ordering is not a permutation of the network's buses")
    t = np.zeros((len(ordering), len(ordering)), dtype=np.int8)
    for a, b in net.lines:
        t[pos[a], pos[b]] = 1
        t[pos[b], pos[a]] = 1
    return t


def _is_pure_imaginary(y: complex) -> bool:
    return abs(y.real) <= IMAG_RTOL * max(1.0, abs(y.imag))


def preprocess_degree_zero(raw: RawNetwork) -> Network:
    """Clean a raw network into a single usable component.

    Drops zero-voltage buses together with their lines, merges parallel lines
    by admittance sum, folds self-referential lines into the bus shunt, and
    keeps only the largest connected component (ties broken by the smallest
    minimum bus id).  Idempotent: feeding the result back through changes
    nothing.
    """
    keep = {bus.id: bus for bus in raw.buses if bus.voltage_kv > 0.0}

    merged: dict[tuple[BusId, BusId], complex] = {}
    shunt_extra: dict[BusId, complex] = {}
    for line in raw.lines:
        if line.a not in keep or line.b not in keep:
            continue
        if line.a == line.b:
            shunt_extra[line.a] = shunt_extra.get(line.a, 0j) + line.admittance
            continue
        key = line_key(line.a, line.b)
        merged[key] = merged.get(key, 0j) + line.admittance

    if not keep:
        raise DegenerateNetworkError("no usable component: every bus was filtered out")

    net = Network()
    for bid in sorted(keep):
        bus = replace(keep[bid])
        bus.shunt = bus.shunt + shunt_extra.get(bid, 0j)
        net.add_bus(bus)
    for (a, b), adm in merged.items():
        net.add_line(a, b, adm)

    components = connected_components(net)
    best = min(components, key=lambda comp: (-len(comp), min(comp)))
    if len(best) < net.node_count:
        for bid in list(net.buses):
            if bid not in best:
                for nb in list(net.neighbors(bid)):
                    net.remove_line(bid, nb)
                net.remove_bus(bid)
    return net


@dataclass
class Violation:
    kind: str
    subject: str
    message: str


@dataclass
class ValidationReport:
    mode: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(net: Network, mode: str = "lenient") -> ValidationReport:
    """Check a network against the inductive and balance requirements.

    ``strict`` raises :class:`ValidationError` on the first violation found;
    ``lenient`` collects every violation into the report as warnings.  Net
    power balance is only evaluated if some current is injected and the
    current-balance solve succeeds.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown validation mode {mode!r}")
    report = ValidationReport(mode=mode)

    def record(kind: str, subject: str, message: str) -> None:
        report.violations.append(Violation(kind, subject, message))
        if mode == "strict":
            raise ValidationError(f"{kind} at {subject}: {message}")

    for bid in sorted(net.buses):
        bus = net.buses[bid]
        if not (0.0 < bus.voltage_kv < 1000.0):
            record("voltage-range", bid,
                   f"nominal voltage {bus.voltage_kv} kV outside (0, 1000)")
        if bus.shunt != 0 and (not _is_pure_imaginary(bus.shunt) or bus.shunt.imag > 0):
            record("non-inductive-shunt", bid,
                   f"shunt {bus.shunt} is not purely imaginary with Im <= 0")

    for (a, b) in sorted(net.lines):
        y = net.lines[(a, b)]
        if not _is_pure_imaginary(y) or y.imag >= 0:
            record("non-inductive-line", f"{a}-{b}",
                   f"admittance {y} is not purely imaginary with Im < 0")

    if all(bus.shunt == 0 for bus in net.buses.values()):
        record("no-nonzero-shunt", "<network>",
               "no non-zero diagonal: every bus shunt is zero")

    if not is_connected(net):
        record("disconnected", "<network>",
               f"{len(connected_components(net))} connected components")

    if report.ok and any(bus.current != 0 for bus in net.buses.values()):
        # Net-power imbalance is reported but never raises, even in strict
        # mode: on a strictly inductive network the reactive losses make an
        # exactly-zero complex net power impossible for nonzero currents, so
        # balance can only ever hold approximately.
        from .laplacian import build_loopy_laplacian, power_injections, solve_voltages

        lap = build_loopy_laplacian(net)
        currents = np.array([net.buses[b].current for b in lap.index])
        try:
            volts = solve_voltages(lap, currents)
        except Exception:
            report.violations.append(Violation(
                "net-power-unchecked", "<network>",
                "current balance solve failed; net power not evaluated"))
        else:
            s = power_injections(volts, currents)
            total, scale = abs(s.sum()), np.abs(s).sum()
            if total > 1e-9 * max(scale, 1e-300):
                report.violations.append(Violation(
                    "net-power-imbalance", "<network>",
                    f"|sum S| = {total:.3e} exceeds 1e-9 * sum|S| = {1e-9 * scale:.3e}"))

    return report
