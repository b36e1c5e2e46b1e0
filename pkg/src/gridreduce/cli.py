"""Command-line surface: reduce, expand, stats, synth, ensemble, serve.

All commands exit 0 on success and nonzero with a typed message on stderr.
Every piece of randomness flows from ``--seed``; identical flags and inputs
give byte-identical outputs.  Set GRIDREDUCE_LOG to change the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import ledger as ledger_mod
from .errors import GridReduceError, ValidationError
from .io_tables import load_network, save_network
from .laplacian import adjacency_from_laplacian, build_loopy_laplacian
from .metrics import format_summary_table, stage_record, wasserstein1
from .network import Network, preprocess_degree_zero, validate
from .reduction import STAGES, Thresholds, numeric_reduction_pipeline, reduce_pipeline
from .service import serve
from .synth import generate_synthetic, load_spec, predict

logger = logging.getLogger("gridreduce")


def _configure_logging() -> None:
    level = os.environ.get("GRIDREDUCE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_preprocessed(buses: str, lines: str, strict: bool) -> Network:
    net = preprocess_degree_zero(load_network(buses, lines))
    validate(net, "strict" if strict else "lenient")
    return net


def _parse_vthr(text: str) -> float | None:
    if text.lower() == "none":
        return None
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"--vthr must be a voltage in kV or 'none', got {text!r}") from None


def _parse_stages(text: str) -> tuple[str, ...]:
    if not text:
        return ()
    stages = tuple(part.strip() for part in text.split(","))
    for stage in stages:
        if stage not in STAGES:
            raise ValidationError(f"unknown stage {stage!r}; choose from {','.join(STAGES)}")
    return stages


def _write_network_dir(net: Network, out_dir: Path, prefix: str = "") -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    save_network(net, out_dir / f"{prefix}buses.csv", out_dir / f"{prefix}lines.csv")


def cmd_reduce(args) -> int:
    net = _load_preprocessed(args.buses, args.lines, args.strict)
    thr = Thresholds(vthr=_parse_vthr(args.vthr), dthr=args.dthr)
    stages = _parse_stages(args.stages)
    out_dir = Path(args.out_dir)

    reduced, ledger, records = reduce_pipeline(net, stages, thr, args.seed)
    _write_network_dir(reduced, out_dir)
    (out_dir / "ledger.json").write_bytes(ledger_mod.serialize(ledger))

    from .metrics import reduction_report
    report = reduction_report(records, ledger)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_json_dict(), indent=2) + "\n")
    table = format_summary_table(report)
    (out_dir / "report.txt").write_text(table + "\n")
    print(table)

    if args.strict:
        # Numeric power-flow equivalent of the reduced model.
        lap, currents, _, _ = numeric_reduction_pipeline(net, None, stages, thr, args.seed)
        equivalent = adjacency_from_laplacian(lap)
        scale = max(max(abs(b.shunt) for b in equivalent.buses.values()), 1.0)
        for i, bus_id in enumerate(lap.index):
            bus = equivalent.buses[bus_id]
            bus.voltage_kv = reduced.buses[bus_id].voltage_kv
            bus.current = complex(currents[i])
            if abs(bus.shunt) < 1e-12 * scale:  # drop elimination round-off
                bus.shunt = 0j
        _write_network_dir(equivalent, out_dir, prefix="kron_")
    return 0


def cmd_expand(args) -> int:
    net_dir = Path(args.net)
    raw = load_network(net_dir / "buses.csv", net_dir / "lines.csv")
    net = Network(buses=raw.buses)
    for line in raw.lines:
        net.add_line(line.a, line.b, line.admittance)
    ledger = ledger_mod.deserialize(Path(args.ledger).read_bytes())

    if args.target == "ALL":
        net = ledger.expand_all(net)
    else:
        ledger.expand(net, ledger_mod.parse_target(args.target, ledger))

    out_dir = Path(args.out_dir)
    _write_network_dir(net, out_dir)
    (out_dir / "ledger.json").write_bytes(ledger_mod.serialize(ledger))
    print(f"{net.node_count} buses, {net.edge_count} lines "
          f"({'empty ledger' if ledger.is_empty else 'ledger remaining'})")
    return 0


def _load_dir(net_dir: str) -> Network:
    path = Path(net_dir)
    raw = load_network(path / "buses.csv", path / "lines.csv")
    net = Network(buses=raw.buses)
    for line in raw.lines:
        net.add_line(line.a, line.b, line.admittance)
    return net


def cmd_stats(args) -> int:
    net = _load_dir(args.net)
    record = stage_record("current", net)
    doc = record.to_json_dict()
    if args.compare:
        other = stage_record("compare", _load_dir(args.compare))
        doc["compare"] = other.to_json_dict()
        doc["wasserstein"] = wasserstein1(record.distribution, other.distribution)
    print(json.dumps(doc, indent=2))
    return 0


def cmd_synth(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    net = generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    _write_network_dir(net, out_dir)
    (out_dir / "prediction.json").write_text(
        json.dumps(predict(spec).to_json_dict(), indent=2) + "\n")
    print(f"{net.node_count} buses, {net.edge_count} lines")
    return 0


def cmd_ensemble(args) -> int:
    net = _load_preprocessed(args.buses, args.lines, args.strict)
    thr = Thresholds(vthr=_parse_vthr(args.vthr), dthr=args.dthr)
    stages = _parse_stages(args.stages)

    def run(seed: int) -> tuple[int, int]:
        reduced, _, _ = reduce_pipeline(net, stages, thr, seed)
        return seed, reduced.node_count

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        sizes = dict(pool.map(run, range(args.seed, args.seed + args.runs)))

    hist: dict[int, int] = {}
    for size in sizes.values():
        hist[size] = hist.get(size, 0) + 1
    doc = {"runs": args.runs, "base_seed": args.seed,
           "sizes_by_seed": {str(s): n for s, n in sorted(sizes.items())},
           "histogram": {str(k): hist[k] for k in sorted(hist)}}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"{'|triN|':>8} {'runs':>6}")
    for size in sorted(hist):
        print(f"{size:>8} {hist[size]:>6}")
    return 0


def cmd_serve(args) -> int:
    net = _load_dir(args.net)
    ledger = ledger_mod.deserialize(Path(args.ledger).read_bytes())
    serve(net, ledger, args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridreduce",
        description="Reduce multiscale grid graphs to power-flow-equivalent "
                    "conceptual networks, and restore resolution selectively.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", help="run the reduction pipeline")
    p.add_argument("--buses", required=True)
    p.add_argument("--lines", required=True)
    p.add_argument("--stages", default="d1,d2,tri")
    p.add_argument("--vthr", default="none")
    p.add_argument("--dthr", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strict", action="store_true",
                   help="reject non-inductive inputs and emit the "
                        "Kron-equivalent tables")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("expand", help="restore resolution from a ledger")
    p.add_argument("--net", required=True, help="directory with buses.csv/lines.csv")
    p.add_argument("--ledger", required=True)
    p.add_argument("--target", required=True, help="KEY[:MEMBER], or ALL")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("stats", help="print network statistics")
    p.add_argument("--net", required=True)
    p.add_argument("--compare", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic network")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ensemble", help="reduce under many seeds and histogram |triN|")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--buses", required=True)
    p.add_argument("--lines", required=True)
    p.add_argument("--stages", default="d1,d2,tri")
    p.add_argument("--vthr", default="none")
    p.add_argument("--dthr", type=int, default=6)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("serve", help="start the exploration service")
    p.add_argument("--net", required=True)
    p.add_argument("--ledger", required=True)
    p.add_argument("--port", type=int, required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GridReduceError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
