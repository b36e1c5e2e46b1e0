import json
import threading
import urllib.request
from urllib.error import HTTPError

import numpy as np
import pytest

from gridreduce.ledger import deserialize, serialize
from gridreduce.metrics import stage_record
from gridreduce.reduction import Thresholds, reduce_pipeline
from gridreduce.service import make_server

from conftest import random_multiscale_network


@pytest.fixture
def server(request, fig2_tree_network):
    net0 = getattr(request, "param", None) or fig2_tree_network
    reduced, ledger, _ = reduce_pipeline(net0, ("d1",), Thresholds(None, 6), seed=0)
    srv = make_server(reduced.copy(), deserialize(serialize(ledger)), port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    yield base, net0, reduced, ledger
    srv.shutdown()
    srv.server_close()


def get(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read().decode())


def post(base, path, payload):
    req = urllib.request.Request(
        base + path, data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"}, method="POST")
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read().decode())


class TestNetworkDocument:
    def test_cluster_sizes_and_fields(self, server):
        base, net0, reduced, _ = server
        doc = get(base, "/api/network")
        by_id = {n["id"]: n for n in doc["nodes"]}
        assert set(by_id) == set(reduced.buses)
        assert by_id["b1"]["cluster_size"] == 7
        assert "t_b1" in by_id["b1"]["expandable_fields"]
        assert all(n["degree"] == reduced.degree(n["id"]) for n in doc["nodes"])

    def test_get_does_not_mutate(self, server):
        base, *_ = server
        first = get(base, "/api/network")
        for _ in range(3):
            assert get(base, "/api/network") == first


class TestExpandEndpoint:
    def test_expand_tree_field(self, server):
        base, net0, reduced, _ = server
        delta = post(base, "/api/expand", {"target": "t_b1"})
        assert delta["anchor"] == "b1"
        assert len(delta["added_nodes"]) == 6
        doc = get(base, "/api/network")
        assert len(doc["nodes"]) == reduced.node_count + 6

    def test_unknown_target_404(self, server):
        base, *_ = server
        with pytest.raises(HTTPError) as info:
            post(base, "/api/expand", {"target": "t_none"})
        assert info.value.code == 404

    def test_dependency_409_with_prerequisites(self):
        from gridreduce.network import Bus, Network
        net = Network()
        for i in range(4):
            net.add_bus(Bus(id=f"a{i}", voltage_kv=345.0, shunt=-0.05j))
        for i in range(4):
            net.add_line(f"a{i}", f"a{(i + 1) % 4}", -1j)
        net.add_line("a0", "a2", -1j)
        net.add_line("a1", "a3", -1j)
        net.remove_line("a0", "a1")
        for i in range(2, 5):
            net.add_bus(Bus(id=f"s{i}", voltage_kv=230.0, shunt=-0.02j))
        net.add_line("a0", "s2", -1j)
        net.add_line("s2", "s3", -1j)
        net.add_line("s3", "s4", -1j)
        net.add_line("s4", "a1", -1j)
        reduced, ledger, _ = reduce_pipeline(net, ("d1", "d2"))
        srv = make_server(reduced, ledger, port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        try:
            with pytest.raises(HTTPError) as info:
                post(base, "/api/expand", {"target": "e_a0_a1:s2"})
            assert info.value.code == 409
            body = json.loads(info.value.read().decode())
            assert body["prerequisites"] == ["e_a0_a1:s3"]
        finally:
            srv.shutdown()
            srv.server_close()


class TestUndo:
    def test_expand_then_undo_restores_document(self, server):
        base, *_ = server
        before = get(base, "/api/network")
        post(base, "/api/expand", {"target": "t_b1"})
        post(base, "/api/undo", {})
        assert get(base, "/api/network") == before

    def test_undo_empty_stack_409(self, server):
        base, *_ = server
        with pytest.raises(HTTPError) as info:
            post(base, "/api/undo", {})
        assert info.value.code == 409

    def test_two_expands_two_undos(self, server):
        base, net0, reduced, ledger = server
        before = get(base, "/api/network")
        delta = post(base, "/api/expand", {"target": "t_b1:b6"})
        assert delta["added_nodes"] == ["b4", "b5", "b6"]
        mid = get(base, "/api/network")
        post(base, "/api/expand", {"target": "t_b5:b7"})
        post(base, "/api/undo", {})
        assert get(base, "/api/network") == mid
        post(base, "/api/undo", {})
        assert get(base, "/api/network") == before


class TestStats:
    def test_stats_match_direct_record(self, server):
        base, net0, reduced, _ = server
        doc = get(base, "/api/stats")
        record = stage_record("current", reduced)
        current = [s for s in doc["stages"] if s["stage"] == "current"][0]
        assert current["nodes"] == record.nodes
        assert current["edges"] == record.edges
        assert current["degree_mean"] == pytest.approx(record.degree_mean)

    def test_full_expansion_reaches_original(self, server):
        base, net0, reduced, ledger = server
        while True:
            doc = get(base, "/api/network")
            fields = [f for n in doc["nodes"] for f in n["expandable_fields"]]
            fields += [f"e_{e['a']}_{e['b']}" for e in doc["edges"] if e["is_meta"]]
            if not fields:
                break
            post(base, "/api/expand", {"target": fields[0]})
        stats = get(base, "/api/stats")
        current = [s for s in stats["stages"] if s["stage"] == "current"][0]
        assert current["nodes"] == net0.node_count
        assert stats["wasserstein_to_original"] == 0.0
        doc = get(base, "/api/network")
        assert all(n["cluster_size"] == 1 for n in doc["nodes"])


class TestInterleavings:
    def test_random_expand_undo_sequences_stay_consistent(self):
        rng = np.random.default_rng(3)
        net0 = random_multiscale_network(903, 36)
        reduced, ledger, _ = reduce_pipeline(net0, ("d1", "d2", "tri"),
                                             Thresholds(None, 6), seed=3)
        srv = make_server(reduced.copy(), deserialize(serialize(ledger)), port=0)
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{srv.server_address[1]}"
        session = srv.RequestHandlerClass.session
        try:
            for _ in range(25):
                doc = get(base, "/api/network")
                fields = [f for n in doc["nodes"] for f in n["expandable_fields"]]
                fields += [f"e_{e['a']}_{e['b']}" for e in doc["edges"] if e["is_meta"]]
                if fields and rng.random() < 0.65:
                    target = fields[int(rng.integers(0, len(fields)))]
                    try:
                        post(base, "/api/expand", {"target": target})
                    except HTTPError as err:
                        assert err.code in (404, 409)
                else:
                    try:
                        post(base, "/api/undo", {})
                    except HTTPError as err:
                        assert err.code == 409
                with session.lock:
                    check = deserialize(serialize(session.ledger))
                    assert check.expand_all(session.net.copy()) == net0
        finally:
            srv.shutdown()
            srv.server_close()
