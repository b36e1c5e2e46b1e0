"""Delimited-text network tables.

Two CSV files describe a network: a bus table (id, voltage_kv, shunt_re,
shunt_im, current_re, current_im) and a line table (from_id, to_id, adm_re,
adm_im).  Saving writes buses sorted by id and lines by (min id, max id)
with shortest-round-trip floats, so save followed by load is lossless and
equal networks produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

from .errors import ParseError, ValidationError
from .network import Bus, Network, RawLine, RawNetwork, line_key

BUS_COLUMNS = ["id", "voltage_kv", "shunt_re", "shunt_im", "current_re", "current_im"]
LINE_COLUMNS = ["from_id", "to_id", "adm_re", "adm_im"]


def _parse_float(text: str, where: str, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"column {column!r}: {text!r} is not a number",
                         location=where) from None
    if not math.isfinite(value):
        raise ParseError(f"column {column!r}: {text!r} is not finite", location=where)
    return value


def _check_id(token: str, where: str) -> str:
    if not token or any(ch.isspace() for ch in token):
        raise ParseError(f"invalid bus id {token!r}", location=where)
    return token


def _read_rows(path: Path, columns: list[str]):
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError("empty file", location=f"{path}:1") from None
            if header != columns:
                raise ParseError(f"expected header {','.join(columns)}, got "
                                 f"{','.join(header)}", location=f"{path}:1")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(columns):
                    raise ParseError(f"expected {len(columns)} fields, got {len(row)}",
                                     location=f"{path}:{lineno}")
                yield f"{path}:{lineno}", row
    except OSError as exc:
        raise ParseError(str(exc), location=str(path)) from None


def load_network(buses_path: str | Path, lines_path: str | Path) -> RawNetwork:
    """Read the two tables into a raw (unvalidated) network.

    Duplicate bus ids and lines naming unknown buses are rejected here;
    everything else (zero voltages, parallel and self lines, disconnection)
    is left for preprocessing.
    """
    raw = RawNetwork()
    seen: set[str] = set()
    for where, row in _read_rows(Path(buses_path), BUS_COLUMNS):
        bus_id = _check_id(row[0], where)
        if bus_id in seen:
            raise ParseError(f"duplicate bus id {bus_id!r}", location=where)
        seen.add(bus_id)
        raw.buses.append(Bus(
            id=bus_id,
            voltage_kv=_parse_float(row[1], where, "voltage_kv"),
            shunt=complex(_parse_float(row[2], where, "shunt_re"),
                          _parse_float(row[3], where, "shunt_im")),
            current=complex(_parse_float(row[4], where, "current_re"),
                            _parse_float(row[5], where, "current_im")),
        ))
    for where, row in _read_rows(Path(lines_path), LINE_COLUMNS):
        a = _check_id(row[0], where)
        b = _check_id(row[1], where)
        for endpoint in (a, b):
            if endpoint not in seen:
                raise ParseError(f"line references unknown bus {endpoint!r}",
                                 location=where)
        raw.lines.append(RawLine(a=a, b=b, admittance=complex(
            _parse_float(row[2], where, "adm_re"),
            _parse_float(row[3], where, "adm_im"))))
    return raw


def save_network(net: Network, buses_path: str | Path, lines_path: str | Path) -> None:
    """Write the canonical tables for a network."""
    for bus_id in net.buses:
        if not bus_id or any(ch.isspace() for ch in bus_id):
            raise ValidationError(f"bus id {bus_id!r} cannot be serialized")
    with open(buses_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(BUS_COLUMNS)
        for bus_id in net.bus_ids():
            bus = net.buses[bus_id]
            writer.writerow([bus_id, repr(bus.voltage_kv),
                             repr(bus.shunt.real), repr(bus.shunt.imag),
                             repr(bus.current.real), repr(bus.current.imag)])
    with open(lines_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(LINE_COLUMNS)
        for a, b in sorted(net.lines):
            adm = net.lines[line_key(a, b)]
            writer.writerow([a, b, repr(adm.real), repr(adm.imag)])
