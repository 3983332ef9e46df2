"""Parse and serialize Steiner-forest instances; generate planar test grids.

The file format follows SteinLib conventions (SECTION Graph with E lines)
extended with a Demands section.  A Terminals section is accepted for
Steiner-tree style inputs and is expanded into a star of demands against the
first terminal.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Graph, normalize_demands


class InstanceFormatError(ValueError):
    """Malformed instance text; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)


def parse_instance(text):
    """Parse sectioned instance text into (Graph, demands).

    Vertices are 1-indexed in files.  Errors report the offending line.
    """
    n = None
    m_declared = None
    edges = []
    demands = []
    terminals = []
    section = None
    saw_graph = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0].upper()
        if key in ("NAME", "COMMENT", "EOF", "CREATOR", "REMARK"):
            continue
        if key == "SECTION":
            if len(parts) < 2:
                raise InstanceFormatError("SECTION needs a name", lineno)
            section = parts[1].lower()
            if section == "graph":
                saw_graph = True
            continue
        if key == "END":
            section = None
            continue
        if section == "graph":
            if key == "NODES":
                n = _int_field(parts, 1, lineno)
            elif key == "EDGES":
                m_declared = _int_field(parts, 1, lineno)
            elif key == "E":
                if len(parts) != 4:
                    raise InstanceFormatError("edge line needs 'E u v w'", lineno)
                u = _int_field(parts, 1, lineno)
                v = _int_field(parts, 2, lineno)
                w = _int_field(parts, 3, lineno)
                if w < 0:
                    raise InstanceFormatError("negative edge weight %d" % w, lineno)
                edges.append((u, v, w, lineno))
            else:
                raise InstanceFormatError("unexpected token %r in Graph section" % parts[0], lineno)
        elif section == "demands":
            if key != "D" or len(parts) != 3:
                raise InstanceFormatError("demand line needs 'D s t'", lineno)
            s = _int_field(parts, 1, lineno)
            t = _int_field(parts, 2, lineno)
            demands.append((s, t, lineno))
        elif section == "terminals":
            if key != "T" or len(parts) != 2:
                raise InstanceFormatError("terminal line needs 'T v'", lineno)
            terminals.append((_int_field(parts, 1, lineno), lineno))
        elif section is None:
            raise InstanceFormatError("content outside any SECTION: %r" % line, lineno)
        # unknown sections are skipped silently

    if not saw_graph or n is None:
        raise InstanceFormatError("missing Graph section with Nodes count")
    if m_declared is not None and m_declared != len(edges):
        raise InstanceFormatError(
            "Edges declares %d but %d E lines given" % (m_declared, len(edges))
        )

    def check_vertex(v, lineno):
        if not 1 <= v <= n:
            raise InstanceFormatError("vertex %d out of range 1..%d" % (v, n), lineno)

    graph_edges = []
    for eid, (u, v, w, lineno) in enumerate(edges, start=1):
        check_vertex(u, lineno)
        check_vertex(v, lineno)
        graph_edges.append((eid, u, v, Fraction(w)))
    g = Graph(range(1, n + 1), graph_edges)

    out_demands = []
    for s, t, lineno in demands:
        check_vertex(s, lineno)
        check_vertex(t, lineno)
        if s == t:
            raise InstanceFormatError("demand endpoints coincide (%d)" % s, lineno)
        out_demands.append((s, t))
    if not demands and terminals:
        for v, lineno in terminals:
            check_vertex(v, lineno)
        hub = terminals[0][0]
        out_demands = [(hub, v) for v, _ in terminals[1:] if v != hub]
    return g, out_demands


def _int_field(parts, idx, lineno):
    try:
        return int(parts[idx])
    except (IndexError, ValueError):
        raise InstanceFormatError("expected integer in field %d" % idx, lineno) from None


def serialize_instance(g, demands, name="instance", comment=None):
    """Inverse of parse_instance for graphs on contiguous 1..n integer vertices."""
    verts = sorted(g.vertices())
    n = len(verts)
    if verts != list(range(1, n + 1)):
        raise ValueError("serialization requires vertices 1..n")
    lines = ["NAME %s" % name]
    if comment:
        lines.append("COMMENT %s" % comment)
    lines.append("SECTION Graph")
    lines.append("Nodes %d" % n)
    lines.append("Edges %d" % g.n_edges)
    for eid in sorted(g.edge_ids()):
        u, v = g.endpoints(eid)
        ln = g.length(eid)
        if ln.denominator != 1:
            raise ValueError("file weights are integers; got %s" % ln)
        lines.append("E %d %d %d" % (u, v, ln))
    lines.append("END")
    lines.append("SECTION Demands")
    for s, t in normalize_demands(demands):
        lines.append("D %d %d" % (s, t))
    lines.append("END")
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def generate_grid_instance(rows, cols, n_demands, max_length=1, seed=0):
    """Random grid instance: planar by construction, deterministic per seed.

    Lengths are drawn uniformly from 1..max_length; demand pairs use 2k
    distinct random vertices.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid needs rows, cols >= 1")
    n = rows * cols
    if n_demands > n // 2:
        raise ValueError("too many demands: %d > floor(%d/2)" % (n_demands, n // 2))
    rng = random.Random(seed)

    def vid(r, c):
        return r * cols + c + 1

    edges = []
    eid = 0
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                eid += 1
                edges.append((eid, vid(r, c), vid(r, c + 1), _draw(rng, max_length)))
            if r + 1 < rows:
                eid += 1
                edges.append((eid, vid(r, c), vid(r + 1, c), _draw(rng, max_length)))
    g = Graph(range(1, n + 1), edges)
    chosen = rng.sample(range(1, n + 1), 2 * n_demands)
    demands = [(chosen[2 * i], chosen[2 * i + 1]) for i in range(n_demands)]
    return g, demands


def _draw(rng, max_length):
    if max_length <= 1:
        return Fraction(1)
    return Fraction(rng.randint(1, max_length))


@dataclass
class ResultRecord:
    """One solver run: edge set, exact length, parameters, optional oracle data."""

    algorithm: str
    edges: list
    total_length: Fraction
    feasible: bool
    parameters: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    instance: str = ""
    opt: Fraction = None
    ratio: float = None

    def __post_init__(self):
        if (self.opt is None) != (self.ratio is None):
            if self.opt is not None and self.opt > 0 and self.ratio is None:
                self.ratio = float(Fraction(self.total_length) / Fraction(self.opt))
            elif self.ratio is not None and self.opt is None:
                raise ValueError("ratio present without opt")

    def check(self, g):
        got = g.total_length(self.edges)
        if got != Fraction(self.total_length):
            raise ValueError("length %s != sum of edge lengths %s" % (self.total_length, got))


def emit_result(record):
    """Serialize to JSON text with stable key order; exact lengths as strings."""
    payload = {
        "algorithm": record.algorithm,
        "edges": sorted(record.edges),
        "feasible": record.feasible,
        "instance": record.instance,
        "opt": None if record.opt is None else str(Fraction(record.opt)),
        "parameters": {k: _param_out(v) for k, v in sorted(record.parameters.items())},
        "ratio": record.ratio,
        "total_length": str(Fraction(record.total_length)),
        "wall_time_s": record.wall_time_s,
    }
    return json.dumps(payload, sort_keys=True)


def parse_result(text):
    payload = json.loads(text)
    return ResultRecord(
        algorithm=payload["algorithm"],
        edges=list(payload["edges"]),
        total_length=Fraction(payload["total_length"]),
        feasible=payload["feasible"],
        parameters={k: _param_in(v) for k, v in payload["parameters"].items()},
        wall_time_s=payload["wall_time_s"],
        instance=payload.get("instance", ""),
        opt=None if payload.get("opt") is None else Fraction(payload["opt"]),
        ratio=payload.get("ratio"),
    )


def _param_out(v):
    if isinstance(v, Fraction):
        return {"frac": str(v)}
    return v


def _param_in(v):
    if isinstance(v, dict) and set(v) == {"frac"}:
        return Fraction(v["frac"])
    return v
