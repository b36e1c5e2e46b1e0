"""Degree distributions, the 1-D earth mover's distance, and the per-stage
reduction report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .ledger import AbsorbedItem, BranchItem, EdgeNodeItem, NestedField, ReductionLedger
from .network import Network, degree_map, graph_density

DegreeDistribution = dict[int, float]

MASS_TOL = 1e-12


def degree_distribution(net: Network) -> DegreeDistribution:
    """Empirical probability mass over integer node degrees."""
    if net.node_count < 1:
        raise ValidationError("degree distribution of an empty network")
    counts: dict[int, int] = {}
    for deg in degree_map(net).values():
        counts[deg] = counts.get(deg, 0) + 1
    n = net.node_count
    return {deg: counts[deg] / n for deg in sorted(counts)}


def _check_distribution(dist: DegreeDistribution, name: str) -> None:
    if not dist:
        raise ValidationError(f"{name} is empty")
    total = 0.0
    for deg, mass in dist.items():
        if not isinstance(deg, (int, np.integer)) or deg < 0:
            raise ValidationError(f"{name} has invalid degree bin {deg!r}")
        if mass < 0:
            raise ValidationError(f"{name} has negative mass at degree {deg}")
        total += mass
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(f"{name} masses sum to {total!r}, not 1")


def wasserstein1(p: DegreeDistribution, q: DegreeDistribution) -> float:
    """First Wasserstein distance with the L1 ground metric on degrees.

    On the integer line the optimal transport cost reduces to the area
    between the two CDFs, summed over unit intervals.
    """
    _check_distribution(p, "p")
    _check_distribution(q, "q")
    lo = min(min(p), min(q))
    hi = max(max(p), max(q))
    total = 0.0
    cdf_p = cdf_q = 0.0
    for k in range(lo, hi):
        cdf_p += p.get(k, 0.0)
        cdf_q += q.get(k, 0.0)
        total += abs(cdf_p - cdf_q)
    return total


@dataclass
class StageRecord:
    """Size and degree statistics of the network after one stage."""

    tag: str
    nodes: int
    edges: int
    density: float | None
    degree_mean: float
    degree_std: float
    degree_max: int
    distribution: DegreeDistribution

    def to_json_dict(self) -> dict:
        return {
            "stage": self.tag, "nodes": self.nodes, "edges": self.edges,
            "density": self.density, "degree_mean": self.degree_mean,
            "degree_std": self.degree_std, "degree_max": self.degree_max,
            "degree_distribution": {str(k): v for k, v in self.distribution.items()},
        }


def stage_record(tag: str, net: Network) -> StageRecord:
    degrees = np.array(sorted(degree_map(net).values()), dtype=float)
    return StageRecord(
        tag=tag,
        nodes=net.node_count,
        edges=net.edge_count,
        density=graph_density(net) if net.node_count >= 2 else None,
        degree_mean=float(degrees.mean()),
        degree_std=float(degrees.std()),
        degree_max=int(degrees.max()),
        distribution=degree_distribution(net),
    )


@dataclass
class ReductionReport:
    """Everything the summary table and the comparison figures need."""

    stages: list[StageRecord]
    tree_length_hist: dict[int, int] = field(default_factory=dict)
    gentree_length_hist: dict[int, int] = field(default_factory=dict)
    meta_edge_hist: dict[int, int] = field(default_factory=dict)
    tri_cluster_hist: dict[int, int] = field(default_factory=dict)
    wasserstein: dict[str, float] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "stages": [s.to_json_dict() for s in self.stages],
            "tree_length_hist": {str(k): v for k, v in sorted(self.tree_length_hist.items())},
            "gentree_length_hist": {str(k): v for k, v in sorted(self.gentree_length_hist.items())},
            "meta_edge_hist": {str(k): v for k, v in sorted(self.meta_edge_hist.items())},
            "tri_cluster_hist": {str(k): v for k, v in sorted(self.tri_cluster_hist.items())},
            "wasserstein": self.wasserstein,
        }


def _has_stage(ledger: ReductionLedger, items, stage: str) -> bool:
    for item in items:
        if isinstance(item, (BranchItem, EdgeNodeItem, AbsorbedItem)) and item.stage == stage:
            return True
        if isinstance(item, NestedField) and (
                item.stage == stage or _has_stage(ledger, item.items, stage)):
            return True
    return False


def reduction_report(records: list[StageRecord],
                     ledger: ReductionLedger) -> ReductionReport:
    """Histograms and distribution distances for a finished pipeline run.

    Tree and cluster lengths count the nodes aggregated into the super node
    including the root itself; meta-edge sizes count interior nodes only.
    A tree field touched by the degree-two stage counts as a generalized
    tree, and anything nested inside a structure counts with that structure.
    """
    report = ReductionReport(stages=list(records))
    for f in ledger.ordered_fields():
        if f.kind == "t":
            length = len(ledger.nodes_in_items(f.items)) + 1
            hist = (report.gentree_length_hist
                    if _has_stage(ledger, f.items, "d2") else report.tree_length_hist)
            hist[length] = hist.get(length, 0) + 1
        elif f.kind == "e":
            interior = len(ledger.nodes_in_items(f.items))
            report.meta_edge_hist[interior] = report.meta_edge_hist.get(interior, 0) + 1
        else:
            absorbed = sum(1 for i in f.items if isinstance(i, AbsorbedItem))
            size = absorbed + 1
            report.tri_cluster_hist[size] = report.tri_cluster_hist.get(size, 0) + 1

    full = records[0]
    for later in records[1:]:
        report.wasserstein[f"{full.tag}->{later.tag}"] = wasserstein1(
            full.distribution, later.distribution)
    for prev, later in zip(records[1:], records[2:]):
        report.wasserstein[f"{prev.tag}->{later.tag}"] = wasserstein1(
            prev.distribution, later.distribution)
    return report


def format_summary_table(report: ReductionReport) -> str:
    """Fixed-width per-stage summary in the style of the reduction table."""
    header = (f"{'stage':<6} {'nodes':>8} {'edges':>8} {'density':>12} "
              f"{'mean_deg':>9} {'std_deg':>8} {'max_deg':>8} {'W1_vs_full':>11}")
    lines = [header, "-" * len(header)]
    full_tag = report.stages[0].tag
    for rec in report.stages:
        dens = f"{rec.density:.6e}" if rec.density is not None else "-"
        w1 = report.wasserstein.get(f"{full_tag}->{rec.tag}")
        w1_text = f"{w1:.4f}" if w1 is not None else "-"
        lines.append(f"{rec.tag:<6} {rec.nodes:>8} {rec.edges:>8} {dens:>12} "
                     f"{rec.degree_mean:>9.3f} {rec.degree_std:>8.3f} "
                     f"{rec.degree_max:>8} {w1_text:>11}")
    return "\n".join(lines)
