"""Readers and writers for the on-disk formats.

Sample CSV: header ``id,recruiter_id,degree,outcome[,wave]``; an empty
recruiter_id marks a seed. Graph: an edge list with one ``u v`` pair per line
plus a node CSV ``id,z,degree``. Any line starting with ``#`` is a comment;
writers put ``# manifest: <hash>`` on the first line when given a hash.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from rds_ss.domain import RdsRecord, RdsSample
from rds_ss.errors import ParseError, RdsIOError
from rds_ss.netgen import Graph

SAMPLE_COLUMNS = ("id", "recruiter_id", "degree", "outcome", "wave")


def fmt_float(x: float) -> str:
    """Shortest text that parses back to the same float; integral values print bare."""
    x = float(x)
    if math.isfinite(x) and x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _header(hash_: Optional[str]) -> str:
    return f"# manifest: {hash_}\n" if hash_ else ""


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise RdsIOError(f"cannot read {path}: {e}") from e


def _write_text(path, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise RdsIOError(f"cannot write {path}: {e}") from e


def _data_lines(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() and not line.lstrip().startswith("#"):
            yield lineno, line


def parse_sample_csv(text: str) -> RdsSample:
    lines = list(_data_lines(text))
    if not lines:
        raise ParseError("no header line", 1)
    head_no, head = lines[0]
    header = [h.strip() for h in next(csv.reader([head]))]
    required = list(SAMPLE_COLUMNS[:4])
    if header[:4] != required or len(header) > 5 or (len(header) == 5 and header[4] != "wave"):
        raise ParseError(f"header must be {','.join(SAMPLE_COLUMNS)} (wave optional)", head_no)
    has_wave = len(header) == 5
    records = []
    waves: dict[str, int] = {}
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
        rid, rec, deg, out = (c.strip() for c in row[:4])
        if not rid:
            raise ParseError("empty id", lineno)
        try:
            degree = int(deg)
        except ValueError:
            raise ParseError(f"degree {deg!r} is not an integer", lineno) from None
        try:
            outcome = float(out)
        except ValueError:
            raise ParseError(f"outcome {out!r} is not a number", lineno) from None
        recruiter = rec or None
        if has_wave:
            try:
                wave = int(row[4])
            except ValueError:
                raise ParseError(f"wave {row[4]!r} is not an integer", lineno) from None
        else:
            wave = 0 if recruiter is None else waves.get(recruiter, -1) + 1
        waves.setdefault(rid, wave)
        records.append(RdsRecord(rid, recruiter, degree, outcome, wave))
    return RdsSample(tuple(records))


def read_sample_csv(path) -> RdsSample:
    return parse_sample_csv(_read_text(path))


def format_sample_csv(sample: RdsSample, hash_: Optional[str] = None) -> str:
    buf = io.StringIO()
    buf.write(_header(hash_))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SAMPLE_COLUMNS)
    for r in sample.records:
        w.writerow([r.id, r.recruiter_id or "", r.degree, fmt_float(r.outcome), r.wave])
    return buf.getvalue()


def write_sample_csv(sample: RdsSample, path, hash_: Optional[str] = None) -> None:
    _write_text(path, format_sample_csv(sample, hash_))


def write_graph(g: Graph, edge_path, node_path, hash_: Optional[str] = None) -> None:
    edges = "".join(f"{u} {v}\n" for u, v in g.edges.tolist())
    _write_text(edge_path, _header(hash_) + edges)
    nodes = "".join(f"{i},{int(z)},{int(d)}\n" for i, (z, d) in enumerate(zip(g.z, g.degrees)))
    _write_text(node_path, _header(hash_) + "id,z,degree\n" + nodes)


def read_graph(edge_path, node_path) -> Graph:
    node_lines = list(_data_lines(_read_text(node_path)))
    if not node_lines or node_lines[0][1].strip() != "id,z,degree":
        raise ParseError("node file header must be id,z,degree", node_lines[0][0] if node_lines else 1)
    z = []
    for lineno, line in node_lines[1:]:
        parts = line.split(",")
        try:
            i, zi = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise ParseError("bad node row", lineno) from None
        if i != len(z):
            raise ParseError(f"node ids must be 0..N-1 in order, got {i}", lineno)
        z.append(zi)
    edges = []
    for lineno, line in _data_lines(_read_text(edge_path)):
        parts = line.split()
        try:
            u, v = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise ParseError("edge line must be 'u v'", lineno) from None
        edges.append((u, v))
    return Graph(len(z), np.array(z, dtype=np.int8), np.array(edges, dtype=np.int64).reshape(-1, 2))


def format_rows_csv(rows: Iterable[dict], columns: Sequence[str], hash_: Optional[str] = None) -> str:
    buf = io.StringIO()
    buf.write(_header(hash_))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(
            [fmt_float(row[c]) if isinstance(row.get(c), float) else ("" if row.get(c) is None else row[c])
             for c in columns]
        )
    return buf.getvalue()


def write_rows_csv(rows, columns, path, hash_: Optional[str] = None) -> None:
    _write_text(path, format_rows_csv(rows, columns, hash_))


def read_rows_csv(path) -> list[dict]:
    lines = [line for _, line in _data_lines(_read_text(path))]
    return list(csv.DictReader(lines))


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def write_json(obj, path) -> None:
    _write_text(path, dump_json(obj))


def read_json(path) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno) from e
