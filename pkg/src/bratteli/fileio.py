"""Readers and writers for the JSON file formats.

Diagram files carry the graded graph plus optional walk data: per-edge "p"
(rational as 'num/den' or integer), per-edge "rho" (group element: integer,
integer array, or 'num/den' string), and a top-level "nu0" map.  Inclusion
graph files are the same format restricted to a single floor, plus an "X"
object mapping points to vertices of the upper level.  Structural problems
with a file raise FileFormatError (a parse failure); values that parse but
violate a domain invariant surface later as BratteliError.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .diagram import BratteliDiagram, FinitePath
from .errors import FileFormatError, IncompatibleData, InvalidDiagram
from .fdalg import AlgebraElement, FiniteEquivRelation, InclusionGraph
from .rational import as_fraction
from .skew import EdgePotential, MultiplicativeRationals, ZLattice
from .walk import RandomWalk, build_walk


def _load_json(source):
    if isinstance(source, (dict, list)):
        return source
    text = Path(source).read_text(encoding="utf-8")
    return json.loads(text)


def _rational(raw, where: str) -> Fraction:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise FileFormatError(
            f"{where}: rationals must be 'num/den' strings or integers, got {raw!r}"
        )
    try:
        return as_fraction(raw)
    except IncompatibleData as exc:
        raise FileFormatError(f"{where}: {exc}") from None


def _string(raw, where: str) -> str:
    if not isinstance(raw, str):
        raise FileFormatError(f"{where}: expected a string, got {raw!r}")
    return raw


@dataclass
class DiagramFile:
    """Parsed diagram file: the graph plus whatever walk data was present."""

    diagram: BratteliDiagram
    p_levels: list | None
    nu0: dict | None
    rho_levels: list | None


def load_diagram(source) -> DiagramFile:
    """Parse a diagram file (path, or an already-decoded JSON object)."""
    data = _load_json(source)
    if not isinstance(data, dict):
        raise FileFormatError("diagram file must be a JSON object")
    if "vertices" not in data or "edges" not in data:
        raise FileFormatError("diagram file needs 'vertices' and 'edges'")
    raw_vertices = data["vertices"]
    raw_edges = data["edges"]
    if not isinstance(raw_vertices, list) or not all(isinstance(l, list) for l in raw_vertices):
        raise FileFormatError("'vertices' must be an array of arrays of strings")
    vertices = [
        [_string(v, f"vertices level {n}") for v in level] for n, level in enumerate(raw_vertices)
    ]
    if not isinstance(raw_edges, list) or not all(isinstance(l, list) for l in raw_edges):
        raise FileFormatError("'edges' must be an array of arrays of edge records")
    edges = []
    p_levels: list = []
    rho_levels: list = []
    has_p = no_p = has_rho = no_rho = 0
    for m, level in enumerate(raw_edges):
        row = []
        p_row: dict = {}
        rho_row: dict = {}
        for rec in level:
            if not isinstance(rec, dict):
                raise FileFormatError(f"edge level {m + 1}: records must be objects, got {rec!r}")
            for key in ("id", "src", "rng"):
                if key not in rec:
                    raise FileFormatError(f"edge level {m + 1}: record lacks '{key}': {rec!r}")
            eid = _string(rec["id"], f"edge level {m + 1}")
            row.append((eid, _string(rec["src"], eid), _string(rec["rng"], eid)))
            if "p" in rec:
                has_p += 1
                p_row[eid] = _rational(rec["p"], f"edge '{eid}' field 'p'")
            else:
                no_p += 1
            if "rho" in rec:
                has_rho += 1
                rho_row[eid] = rec["rho"]
            else:
                no_rho += 1
        edges.append(row)
        p_levels.append(p_row)
        rho_levels.append(rho_row)
    if has_p and no_p:
        raise FileFormatError("some edges carry 'p' and some do not; supply all or none")
    if has_rho and no_rho:
        raise FileFormatError("some edges carry 'rho' and some do not; supply all or none")
    nu0 = None
    if "nu0" in data:
        if not isinstance(data["nu0"], dict):
            raise FileFormatError("'nu0' must be an object mapping vertices to rationals")
        nu0 = {
            _string(v, "nu0"): _rational(x, f"nu0['{v}']") for v, x in data["nu0"].items()
        }
    try:
        diagram = BratteliDiagram(vertices, edges)
    except InvalidDiagram as exc:
        # level counts that cannot even form a diagram are a file problem
        raise FileFormatError(str(exc)) from None
    return DiagramFile(
        diagram=diagram,
        p_levels=p_levels if has_p else None,
        nu0=nu0,
        rho_levels=rho_levels if has_rho else None,
    )


def walk_from_file(df: DiagramFile) -> RandomWalk:
    if df.p_levels is None:
        raise IncompatibleData("diagram file carries no 'p' fields; cannot build a walk")
    if df.nu0 is None:
        raise IncompatibleData("diagram file carries no 'nu0' map; cannot build a walk")
    return build_walk(df.diagram, df.p_levels, df.nu0)


def potential_from_file(df: DiagramFile) -> EdgePotential:
    """Build the edge potential, inferring the group from the 'rho' values.

    Integer scalars or equal-length integer arrays mean a lattice; 'num/den'
    strings mean the positive rationals under multiplication.
    """
    if df.rho_levels is None:
        raise IncompatibleData("diagram file carries no 'rho' fields; cannot build a potential")
    kinds = set()
    ranks = set()
    for row in df.rho_levels:
        for value in row.values():
            if isinstance(value, bool):
                raise FileFormatError(f"'rho' value {value!r} is not a group element")
            if isinstance(value, int):
                kinds.add("lattice")
                ranks.add(1)
            elif isinstance(value, list):
                if not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
                    raise FileFormatError(f"'rho' array {value!r} must hold integers")
                kinds.add("lattice")
                ranks.add(len(value))
            elif isinstance(value, str):
                kinds.add("rational")
            else:
                raise FileFormatError(f"'rho' value {value!r} is not a group element")
    if kinds == {"lattice"}:
        if len(ranks) != 1:
            raise FileFormatError(f"'rho' arrays mix ranks {sorted(ranks)}")
        group = ZLattice(ranks.pop())
    elif kinds == {"rational"}:
        group = MultiplicativeRationals()
    else:
        raise FileFormatError("'rho' values mix lattice and rational group elements")
    return EdgePotential(df.diagram, group, df.rho_levels)


def load_measure_table(d: BratteliDiagram, source) -> tuple[dict, int]:
    """Read a cylinder table {'empty': {vertex: rat}, 'paths': {'e1,e2': rat}}.

    Returns the table keyed by FinitePath and the depth (longest path seen).
    """
    data = _load_json(source)
    if not isinstance(data, dict):
        raise FileFormatError("measure file must be a JSON object")
    table: dict[FinitePath, Fraction] = {}
    depth = 0
    empty = data.get("empty", {})
    if not isinstance(empty, dict):
        raise FileFormatError("'empty' must be an object mapping vertices to rationals")
    for v, raw in empty.items():
        table[d.empty_path(_string(v, "empty"))] = _rational(raw, f"empty['{v}']")
    paths = data.get("paths", {})
    if not isinstance(paths, dict):
        raise FileFormatError("'paths' must be an object mapping edge lists to rationals")
    for label, raw in paths.items():
        ids = _string(label, "paths").split(",")
        a = d.path(ids)
        table[a] = _rational(raw, f"paths['{label}']")
        depth = max(depth, len(a))
    return table, depth


def load_terminal(source) -> dict:
    """Read terminal data {vertex: rational}."""
    data = _load_json(source)
    if not isinstance(data, dict):
        raise FileFormatError("terminal file must be a JSON object")
    return {_string(v, "terminal"): _rational(x, f"terminal['{v}']") for v, x in data.items()}


def load_inclusion_graph(source) -> tuple[InclusionGraph, dict | None]:
    """Read an inclusion graph: a single-floor diagram file plus an 'X' map."""
    data = _load_json(source)
    if not isinstance(data, dict):
        raise FileFormatError("inclusion graph file must be a JSON object")
    if "X" not in data or not isinstance(data["X"], dict):
        raise FileFormatError("inclusion graph file needs an 'X' object mapping points to vertices")
    df = load_diagram({k: v for k, v in data.items() if k in ("vertices", "edges")})
    d = df.diagram
    if d.depth != 1:
        raise FileFormatError(
            f"inclusion graph file must have exactly one edge level, got {d.depth}"
        )
    X = []
    vertex_of = {}
    for x, v in data["X"].items():
        X.append(_string(x, "X"))
        vertex_of[x] = _string(v, f"X['{x}']")
    graph = InclusionGraph(
        X,
        d.vertices(0),
        [e.id for e in d.edges(1)],
        d.vertices(1),
        vertex_of,
        {e.id: e.src for e in d.edges(1)},
        {e.id: e.rng for e in d.edges(1)},
    )
    p = df.p_levels[0] if df.p_levels is not None else None
    return graph, p


def dump_element(elem: AlgebraElement) -> list:
    """Serialize as [x, y, re, im] rows in the relation's pair order."""
    rows = []
    for pair in elem.relation.pairs():
        if pair in elem.entries:
            x, y = pair
            v = complex(elem.entries[pair])
            rows.append([_point_out(x), _point_out(y), v.real, v.imag])
    return rows


def load_element(rel: FiniteEquivRelation, data) -> AlgebraElement:
    """Deserialize [x, y, re, im] rows onto the given relation."""
    if not isinstance(data, list):
        raise FileFormatError("algebra element must be an array of [x, y, re, im] rows")
    entries = {}
    for rec in data:
        if not isinstance(rec, list) or len(rec) != 4:
            raise FileFormatError(f"algebra element row must be [x, y, re, im], got {rec!r}")
        x, y, re, im = rec
        if isinstance(re, bool) or isinstance(im, bool):
            raise FileFormatError(f"algebra element row has non-numeric parts: {rec!r}")
        if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
            raise FileFormatError(f"algebra element row has non-numeric parts: {rec!r}")
        entries[(_point_in(x), _point_in(y))] = complex(re, im)
    return AlgebraElement(rel, entries)


def _point_out(x):
    return list(x) if isinstance(x, tuple) else x


def _point_in(x):
    return tuple(x) if isinstance(x, list) else x


def dump_diagram(d: BratteliDiagram, p: Mapping | None = None, nu0: Mapping | None = None,
                 rho: Mapping | None = None) -> dict:
    """The JSON object for a diagram, optionally with walk and potential data.

    ``p`` and ``rho`` map (level, edge id) to values; nu0 maps vertex ids.
    """
    from .rational import format_fraction

    out: dict = {
        "vertices": [list(d.vertices(n)) for n in range(d.depth + 1)],
        "edges": [],
    }
    for n in range(1, d.depth + 1):
        row = []
        for e in d.edges(n):
            rec: dict = {"id": e.id, "src": e.src, "rng": e.rng}
            if p is not None:
                rec["p"] = format_fraction(p[(n, e.id)])
            if rho is not None:
                rec["rho"] = rho[(n, e.id)]
            row.append(rec)
        out["edges"].append(row)
    if nu0 is not None:
        out["nu0"] = {v: format_fraction(nu0[v]) for v in d.vertices(0)}
    return out
