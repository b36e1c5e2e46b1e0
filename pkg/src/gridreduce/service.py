"""Session-scoped HTTP service for interactive de-clustering.

One process serves one analyst session: the current reduced network, the
remaining ledger, and an undo stack of full snapshots.  Mutating requests
are serialized by a lock (reads take it too, so session state is
linearizable); layout stays client-side and the service only supplies the
anchor node whose position seeds newly expanded nodes.
"""

from __future__ import annotations

import copy
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import DependencyError, GridReduceError, TargetNotFoundError
from .ledger import ReductionLedger, parse_target
from .metrics import reduction_report, stage_record, wasserstein1
from .network import BusId, Network

logger = logging.getLogger(__name__)


class Session:
    """Reduced network plus ledger with snapshot-based undo."""

    def __init__(self, net: Network, ledger: ReductionLedger):
        self.net = net
        self.ledger = ledger
        self.undo_stack: list[tuple[Network, ReductionLedger]] = []
        self.lock = threading.Lock()
        original = copy.deepcopy(ledger).expand_all(net.copy())
        self.original_record = stage_record("original", original)

    # -- documents --------------------------------------------------------

    def graph_document(self) -> dict:
        nodes = []
        for bus_id in self.net.bus_ids():
            bus = self.net.buses[bus_id]
            nodes.append({
                "id": bus_id,
                "voltage_kv": bus.voltage_kv,
                "degree": self.net.degree(bus_id),
                "cluster_size": self.ledger.cluster_size(bus_id),
                "expandable_fields": self.ledger.expandable_fields(bus_id),
            })
        edges = [{"a": a, "b": b,
                  "is_meta": f"e_{a}_{b}" in self.ledger.fields}
                 for a, b in sorted(self.net.lines)]
        return {"nodes": nodes, "edges": edges}

    def stats_document(self) -> dict:
        current = stage_record("current", self.net)
        report = reduction_report([self.original_record, current], self.ledger)
        doc = report.to_json_dict()
        doc["wasserstein_to_original"] = wasserstein1(
            self.original_record.distribution, current.distribution)
        return doc

    # -- mutations ---------------------------------------------------------

    def expand(self, target_text: str) -> dict:
        target = parse_target(target_text, self.ledger)
        snapshot = (self.net.copy(), copy.deepcopy(self.ledger))
        before_nodes = set(self.net.buses)
        before_edges = set(self.net.lines)
        anchor = self._anchor_for(target.field_key, target.member)
        try:
            self.ledger.expand(self.net, target)
        except Exception:
            self.net, self.ledger = snapshot
            raise
        self.undo_stack.append(snapshot)
        return self._delta(before_nodes, before_edges, anchor)

    def undo(self) -> dict:
        if not self.undo_stack:
            raise IndexError("undo stack is empty")
        before_nodes = set(self.net.buses)
        before_edges = set(self.net.lines)
        self.net, self.ledger = self.undo_stack.pop()
        return self._delta(before_nodes, before_edges, anchor=None)

    def _anchor_for(self, field_key: str, member: BusId | None) -> BusId:
        field = self.ledger.fields[field_key]
        if field.kind == "e":
            present = [a for a in field.anchors if a in self.net.buses]
            return min(present) if present else field.anchors[0]
        return field.root

    def _delta(self, before_nodes: set, before_edges: set, anchor) -> dict:
        after_nodes = set(self.net.buses)
        after_edges = set(self.net.lines)
        return {
            "added_nodes": sorted(after_nodes - before_nodes),
            "added_edges": [list(e) for e in sorted(after_edges - before_edges)],
            "removed_edges": [list(e) for e in sorted(before_edges - after_edges)],
            "anchor": anchor,
        }


class _Handler(BaseHTTPRequestHandler):
    session: Session = None  # set by make_server

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self):  # CORS preflight
        self._send(204, {})

    def do_GET(self):
        with self.session.lock:
            if self.path == "/api/network":
                self._send(200, self.session.graph_document())
            elif self.path == "/api/stats":
                self._send(200, self.session.stats_document())
            else:
                self._send(404, {"error": "not-found", "message": self.path})

    def do_POST(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            payload = json.loads(raw.decode() or "{}")
        except json.JSONDecodeError:
            self._send(400, {"error": "bad-request", "message": "invalid JSON body"})
            return
        with self.session.lock:
            if self.path == "/api/expand":
                self._expand(payload)
            elif self.path == "/api/undo":
                self._undo()
            else:
                self._send(404, {"error": "not-found", "message": self.path})

    def _expand(self, payload: dict) -> None:
        target = payload.get("target")
        if not isinstance(target, str):
            self._send(400, {"error": "bad-request", "message": "missing 'target'"})
            return
        try:
            self._send(200, self.session.expand(target))
        except TargetNotFoundError as exc:
            self._send(404, {"error": "target-not-found", "message": str(exc)})
        except DependencyError as exc:
            self._send(409, {"error": "dependency", "message": str(exc),
                             "prerequisites": exc.prerequisites})
        except GridReduceError as exc:
            self._send(500, {"error": type(exc).__name__, "message": str(exc)})

    def _undo(self) -> None:
        try:
            self._send(200, self.session.undo())
        except IndexError as exc:
            self._send(409, {"error": "empty-undo-stack", "message": str(exc)})

    def log_message(self, fmt, *args):
        logger.debug("%s - %s", self.address_string(), fmt % args)


def make_server(net: Network, ledger: ReductionLedger,
                port: int, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    session = Session(net, ledger)
    handler = type("SessionHandler", (_Handler,), {"session": session})
    return ThreadingHTTPServer((host, port), handler)


def serve(net: Network, ledger: ReductionLedger, port: int) -> None:
    server = make_server(net, ledger, port)
    logger.info("exploration service on http://127.0.0.1:%d", server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
