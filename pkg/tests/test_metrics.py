import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridreduce.errors import ValidationError
from gridreduce.ledger import ReductionLedger
from gridreduce.metrics import (
    degree_distribution,
    format_summary_table,
    reduction_report,
    stage_record,
    wasserstein1,
)
from gridreduce.network import Bus, Network
from gridreduce.reduction import Thresholds, reduce_pipeline

from conftest import lp_wasserstein, random_distribution, random_multiscale_network


def bus(bid, kv=138.0):
    return Bus(id=bid, voltage_kv=kv, shunt=-0.05j)


class TestDegreeDistribution:
    def test_triangle(self):
        net = Network(buses=[bus("b1"), bus("b2"), bus("b3")])
        for a, b in [("b1", "b2"), ("b1", "b3"), ("b2", "b3")]:
            net.add_line(a, b, -1j)
        assert degree_distribution(net) == {2: 1.0}

    def test_path(self):
        net = Network(buses=[bus("b1"), bus("b2"), bus("b3")])
        net.add_line("b1", "b2", -1j)
        net.add_line("b2", "b3", -1j)
        dist = degree_distribution(net)
        assert dist[1] == pytest.approx(2 / 3)
        assert dist[2] == pytest.approx(1 / 3)

    def test_star(self):
        net = Network(buses=[bus("hub")] + [bus(f"l{i}") for i in range(4)])
        for i in range(4):
            net.add_line("hub", f"l{i}", -1j)
        assert degree_distribution(net) == {1: 0.8, 4: 0.2}

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            degree_distribution(Network())


class TestWasserstein:
    def test_pure_translation(self):
        assert wasserstein1({2: 1.0}, {5: 1.0}) == pytest.approx(3.0)

    def test_identical_distributions(self):
        p = {1: 0.25, 3: 0.5, 7: 0.25}
        assert wasserstein1(p, dict(p)) == 0.0

    def test_split_vs_point(self):
        assert wasserstein1({1: 0.5, 3: 0.5}, {2: 1.0}) == pytest.approx(1.0)
        assert lp_wasserstein({1: 0.5, 3: 0.5}, {2: 1.0}) == pytest.approx(1.0)

    def test_against_lp_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            p = random_distribution(rng)
            q = random_distribution(rng)
            assert wasserstein1(p, q) == pytest.approx(lp_wasserstein(p, q), abs=1e-9)

    def test_metric_axioms(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            p, q, r = (random_distribution(rng) for _ in range(3))
            dpq = wasserstein1(p, q)
            assert dpq >= 0
            assert dpq == pytest.approx(wasserstein1(q, p), abs=1e-12)
            assert wasserstein1(p, r) <= dpq + wasserstein1(q, r) + 1e-9
            assert wasserstein1(p, dict(p)) == 0.0

    def test_invalid_distribution(self):
        with pytest.raises(ValidationError):
            wasserstein1({1: 0.4}, {2: 1.0})
        with pytest.raises(ValidationError):
            wasserstein1({1: -0.5, 2: 1.5}, {2: 1.0})

    @settings(max_examples=60, deadline=None)
    @given(st.dictionaries(st.integers(0, 30), st.floats(0.01, 1.0),
                           min_size=1, max_size=6),
           st.dictionaries(st.integers(0, 30), st.floats(0.01, 1.0),
                           min_size=1, max_size=6))
    def test_closed_form_equals_lp(self, raw_p, raw_q):
        p = {k: v / sum(raw_p.values()) for k, v in raw_p.items()}
        q = {k: v / sum(raw_q.values()) for k, v in raw_q.items()}
        assert wasserstein1(p, q) == pytest.approx(lp_wasserstein(p, q), abs=1e-9)


class TestReductionReport:
    def test_tree_figure_histogram(self, fig2_tree_network):
        reduced, ledger, records = reduce_pipeline(fig2_tree_network, ("d1",))
        report = reduction_report(records, ledger)
        assert report.tree_length_hist == {7: 1}
        assert report.meta_edge_hist == {}

    def test_no_reductions_empty_histograms(self, fig2_tree_network):
        reduced, ledger, records = reduce_pipeline(fig2_tree_network, ())
        report = reduction_report(records, ledger)
        assert not report.tree_length_hist
        assert not report.meta_edge_hist
        assert not report.tri_cluster_hist

    def test_string_figure_histogram(self):
        net = Network()
        for i in range(4):
            net.add_bus(bus(f"a{i}", kv=345.0))
        for i in range(4):
            net.add_line(f"a{i}", f"a{(i + 1) % 4}", -1j)
        net.add_line("a0", "a2", -1j)
        net.add_line("a1", "a3", -1j)
        net.remove_line("a0", "a1")
        for i in range(3):
            net.add_bus(bus(f"s{i}", kv=230.0))
        net.add_line("a0", "s0", -1j)
        net.add_line("s0", "s1", -1j)
        net.add_line("s1", "s2", -1j)
        net.add_line("s2", "a1", -1j)
        reduced, ledger, records = reduce_pipeline(net, ("d1", "d2"))
        report = reduction_report(records, ledger)
        assert report.meta_edge_hist == {3: 1}

    @pytest.mark.parametrize("seed", range(5))
    def test_conservation(self, seed):
        net = random_multiscale_network(seed + 50, 50)
        reduced, ledger, records = reduce_pipeline(
            net, ("d1", "d2", "tri"), Thresholds(None, 6), seed)
        report = reduction_report(records, ledger)
        removed = sum(k - 1 for k, c in report.tree_length_hist.items() for _ in range(c))
        removed += sum((k - 1) * c for k, c in report.gentree_length_hist.items())
        removed += sum(k * c for k, c in report.meta_edge_hist.items())
        removed += sum((k - 1) * c for k, c in report.tri_cluster_hist.items())
        assert removed == net.node_count - reduced.node_count
        for record in report.stages:
            assert record.density is None or 0.0 < record.density <= 1.0

    def test_summary_table_shape(self, fig2_tree_network):
        reduced, ledger, records = reduce_pipeline(fig2_tree_network, ("d1",))
        table = format_summary_table(reduction_report(records, ledger))
        lines = table.splitlines()
        assert lines[0].split() == ["stage", "nodes", "edges", "density",
                                    "mean_deg", "std_deg", "max_deg", "W1_vs_full"]
        assert len(lines) == 2 + len(records)

    def test_wasserstein_entries(self):
        net = random_multiscale_network(9, 40)
        reduced, ledger, records = reduce_pipeline(net, ("d1", "d2", "tri"))
        report = reduction_report(records, ledger)
        assert set(report.wasserstein) == {
            "full->d1", "full->d2", "full->tri", "d1->d2", "d2->tri"}
        assert all(v >= 0 for v in report.wasserstein.values())
