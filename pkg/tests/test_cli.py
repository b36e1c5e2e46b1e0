import json
from pathlib import Path

import pytest

from gridreduce.cli import main
from gridreduce.io_tables import load_network, save_network
from gridreduce.network import Network
from gridreduce.synth import SyntheticSpec, TreeSpec, generate_synthetic

from conftest import random_multiscale_network


@pytest.fixture
def grid_dir(tmp_path):
    net = generate_synthetic(SyntheticSpec(
        ring_size=30, trees=[TreeSpec(2, 2)], strings=[5], pockets=1, seed=4))
    save_network(net, tmp_path / "buses.csv", tmp_path / "lines.csv")
    return tmp_path, net


def run(*argv):
    return main([str(a) for a in argv])


def load_dir(path: Path) -> Network:
    raw = load_network(path / "buses.csv", path / "lines.csv")
    net = Network(buses=raw.buses)
    for line in raw.lines:
        net.add_line(line.a, line.b, line.admittance)
    return net


class TestReduceExpand:
    def test_reduce_outputs(self, grid_dir, capsys):
        src, _ = grid_dir
        out = src / "out"
        assert run("reduce", "--buses", src / "buses.csv", "--lines", src / "lines.csv",
                   "--stages", "d1,d2,tri", "--vthr", "none", "--dthr", 6,
                   "--seed", 3, "--out-dir", out, "--strict") == 0
        for name in ("buses.csv", "lines.csv", "ledger.json", "report.json",
                     "report.txt", "kron_buses.csv", "kron_lines.csv"):
            assert (out / name).exists()
        assert "stage" in capsys.readouterr().out
        # the numeric equivalent is itself a clean inductive network
        from gridreduce.network import validate
        raw = load_network(out / "kron_buses.csv", out / "kron_lines.csv")
        kron_net = Network(buses=raw.buses)
        for line in raw.lines:
            kron_net.add_line(line.a, line.b, line.admittance)
        assert validate(kron_net, "lenient").ok

    def test_reduce_then_expand_all_roundtrip(self, grid_dir):
        src, original = grid_dir
        out = src / "out"
        run("reduce", "--buses", src / "buses.csv", "--lines", src / "lines.csv",
            "--stages", "d1,d2,tri", "--vthr", "none", "--dthr", 6,
            "--seed", 3, "--out-dir", out)
        back = src / "back"
        assert run("expand", "--net", out, "--ledger", out / "ledger.json",
                   "--target", "ALL", "--out-dir", back) == 0
        assert load_dir(back) == original
        # byte-identical tables up to canonical ordering
        assert (back / "buses.csv").read_bytes() == (src / "buses.csv").read_bytes()
        assert (back / "lines.csv").read_bytes() == (src / "lines.csv").read_bytes()

    def test_single_target_expand(self, grid_dir):
        src, original = grid_dir
        out = src / "out"
        run("reduce", "--buses", src / "buses.csv", "--lines", src / "lines.csv",
            "--stages", "d1,d2,tri", "--vthr", "none", "--dthr", 6,
            "--seed", 3, "--out-dir", out)
        ledger_doc = json.loads((out / "ledger.json").read_text())
        key = ledger_doc["entries"][0]["key"]
        step = src / "step"
        assert run("expand", "--net", out, "--ledger", out / "ledger.json",
                   "--target", key, "--out-dir", step) == 0
        assert load_dir(step).node_count > load_dir(out).node_count

    def test_byte_identical_reruns(self, grid_dir):
        src, _ = grid_dir
        outs = []
        for name in ("o1", "o2"):
            out = src / name
            run("reduce", "--buses", src / "buses.csv", "--lines", src / "lines.csv",
                "--stages", "d1,d2,tri", "--vthr", "138", "--dthr", 7,
                "--seed", 11, "--out-dir", out)
            outs.append(out)
        for name in ("buses.csv", "lines.csv", "ledger.json", "report.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_error_exit_code(self, grid_dir, capsys):
        src, _ = grid_dir
        assert run("reduce", "--buses", src / "missing.csv", "--lines",
                   src / "lines.csv", "--out-dir", src / "x") == 1
        assert "ParseError" in capsys.readouterr().err


class TestStats:
    def test_stats_prints_record(self, grid_dir, capsys):
        src, net = grid_dir
        assert run("stats", "--net", src) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["nodes"] == net.node_count
        assert doc["edges"] == net.edge_count

    def test_compare_adds_wasserstein(self, grid_dir, capsys):
        src, _ = grid_dir
        out = src / "out"
        run("reduce", "--buses", src / "buses.csv", "--lines", src / "lines.csv",
            "--stages", "d1,d2", "--vthr", "none", "--dthr", 6,
            "--seed", 0, "--out-dir", out)
        capsys.readouterr()
        assert run("stats", "--net", src, "--compare", out) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["wasserstein"] > 0


class TestSynthCli:
    def test_synth_writes_prediction(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text('{"ring_size": 12, "pockets": 1}')
        out = tmp_path / "net"
        assert run("synth", "--spec", spec, "--seed", 9, "--out-dir", out) == 0
        pred = json.loads((out / "prediction.json").read_text())
        assert pred["removed"]["tri"] == 2
        net = load_dir(out)
        assert net.node_count == pred["nodes"]["full"]


class TestEnsemble:
    def test_histogram_spread_with_mesh(self, tmp_path, capsys):
        net = generate_synthetic(SyntheticSpec(ring_size=16, meshes=[(4, 5)], seed=5))
        save_network(net, tmp_path / "buses.csv", tmp_path / "lines.csv")
        out = tmp_path / "ens.json"
        assert run("ensemble", "--runs", 30, "--seed", 0,
                   "--buses", tmp_path / "buses.csv", "--lines", tmp_path / "lines.csv",
                   "--stages", "d1,d2,tri", "--vthr", "none", "--dthr", 6,
                   "--out", out) == 0
        doc = json.loads(out.read_text())
        assert sum(doc["histogram"].values()) == 30
        assert len(doc["histogram"]) > 1

    def test_deterministic_merge_order(self, tmp_path, capsys):
        net = generate_synthetic(SyntheticSpec(ring_size=16, meshes=[(3, 4)], seed=1))
        save_network(net, tmp_path / "buses.csv", tmp_path / "lines.csv")
        docs = []
        for name in ("e1.json", "e2.json"):
            run("ensemble", "--runs", 10, "--seed", 5, "--workers", 3,
                "--buses", tmp_path / "buses.csv", "--lines", tmp_path / "lines.csv",
                "--out", tmp_path / name)
            docs.append((tmp_path / name).read_bytes())
        assert docs[0] == docs[1]
