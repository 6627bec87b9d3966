"""Graded Bratteli diagrams, finite paths, and cylinders.

A diagram of depth N has vertex levels V(0)..V(N) and edge levels E(1)..E(N);
every edge of E(n) runs from V(n-1) to V(n).  Identifiers are opaque strings
in the public interface and are mapped to dense integer indices internally;
all outputs use the original strings.

Diagrams are immutable after construction and every operation here is a pure
function, so values may be shared freely across threads.  Path enumeration is
part of the public contract: paths come back in lexicographic order by edge
index, and tests and CLI output depend on that order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InvalidDiagram, PathError


@dataclass(frozen=True)
class Edge:
    """A single edge: identifier plus source/range vertex identifiers."""

    id: str
    src: str
    rng: str


@dataclass(frozen=True)
class Violation:
    """One broken diagram invariant: the level, the offender, the rule."""

    level: int
    subject: str
    rule: str

    def __str__(self):
        return f"level {self.level}: {self.subject}: {self.rule}"


@dataclass(frozen=True)
class FinitePath:
    """A composable run of edges e_{m+1}..e_{m+k} starting at level m.

    ``anchor`` is the source vertex and ``terminus`` the range vertex; for the
    empty path both equal the vertex the path is anchored at.  Instances are
    built through :meth:`BratteliDiagram.path` (or enumeration), which checks
    composability, so a constructed path is always contained in its diagram.
    """

    start_level: int
    anchor: str
    edges: tuple[str, ...]
    terminus: str

    def __len__(self):
        return len(self.edges)

    @property
    def end_level(self) -> int:
        return self.start_level + len(self.edges)

    def label(self) -> str:
        """Comma-joined edge ids; '@vertex' for the empty path."""
        return ",".join(self.edges) if self.edges else "@" + self.anchor


@dataclass(frozen=True)
class Cylinder:
    """The set Z(a) of full-depth paths extending the level-0 path ``a``."""

    base: FinitePath

    def __post_init__(self):
        if self.base.start_level != 0:
            raise PathError("cylinder base must start at level 0")


class LevelGraph:
    """One floor of a diagram: the edges of E(n) with their endpoint maps."""

    def __init__(self, n: int, edges: Sequence[Edge]):
        self.n = n
        self.edges = tuple(edges)

    def __len__(self):
        return len(self.edges)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.edges)


class BratteliDiagram:
    """A finite-depth Bratteli diagram.

    ``vertices`` is one ordered id list per level 0..N; ``edges`` is one
    ordered list per level 1..N of edges (``Edge`` instances or
    ``(id, src, rng)`` triples).  Construction accepts malformed content so
    that :meth:`validate` can report it; operations that need a valid diagram
    call :meth:`require_valid` first.
    """

    def __init__(self, vertices, edges):
        vs = tuple(tuple(level) for level in vertices)
        if len(vs) < 2:
            raise InvalidDiagram("a diagram needs depth >= 1 (at least two vertex levels)")
        es = []
        for level in edges:
            row = []
            for e in level:
                row.append(e if isinstance(e, Edge) else Edge(*e))
            es.append(tuple(row))
        if len(es) != len(vs) - 1:
            raise InvalidDiagram(
                f"got {len(vs)} vertex levels but {len(es)} edge levels; need one edge level per floor"
            )
        self._vertices = vs
        self._edges = tuple(es)
        self._vidx = tuple({v: i for i, v in enumerate(level)} for level in vs)
        self._eidx = tuple({e.id: i for i, e in enumerate(level)} for level in self._edges)
        self._violations = tuple(self._scan())
        if not self._violations:
            self._build_adjacency()

    # -- structure accessors ------------------------------------------------

    @property
    def depth(self) -> int:
        return len(self._vertices) - 1

    def vertices(self, n: int) -> tuple[str, ...]:
        """Ordered vertex ids of V(n)."""
        if not 0 <= n <= self.depth:
            raise PathError(f"vertex level {n} out of range 0..{self.depth}")
        return self._vertices[n]

    def edges(self, n: int) -> tuple[Edge, ...]:
        """Ordered edges of E(n), n = 1..depth."""
        if not 1 <= n <= self.depth:
            raise PathError(f"edge level {n} out of range 1..{self.depth}")
        return self._edges[n - 1]

    def level(self, n: int) -> LevelGraph:
        return LevelGraph(n, self.edges(n))

    def edge(self, n: int, edge_id: str) -> Edge:
        idx = self._eidx[n - 1].get(edge_id)
        if idx is None:
            raise PathError(f"no edge '{edge_id}' at level {n}")
        return self._edges[n - 1][idx]

    def edge_index(self, n: int, edge_id: str) -> int:
        idx = self._eidx[n - 1].get(edge_id)
        if idx is None:
            raise PathError(f"no edge '{edge_id}' at level {n}")
        return idx

    def vertex_index(self, n: int, vertex_id: str) -> int:
        idx = self._vidx[n].get(vertex_id)
        if idx is None:
            raise PathError(f"no vertex '{vertex_id}' at level {n}")
        return idx

    def has_vertex(self, n: int, vertex_id: str) -> bool:
        return 0 <= n <= self.depth and vertex_id in self._vidx[n]

    def out_edges(self, n: int, vertex_id: str) -> tuple[Edge, ...]:
        """Edges of E(n+1) with source ``vertex_id`` in V(n), in edge order."""
        self.require_valid()
        vi = self.vertex_index(n, vertex_id)
        row = self._edges[n]
        return tuple(row[k] for k in self._out[n][vi])

    def in_edges(self, n: int, vertex_id: str) -> tuple[Edge, ...]:
        """Edges of E(n) with range ``vertex_id`` in V(n), in edge order."""
        self.require_valid()
        vi = self.vertex_index(n, vertex_id)
        row = self._edges[n - 1]
        return tuple(row[k] for k in self._in[n - 1][vi])

    # -- validation ----------------------------------------------------------

    def _scan(self):
        found = []
        for n, level in enumerate(self._vertices):
            if not level:
                found.append(Violation(n, f"V({n})", "level has no vertices"))
            if len(self._vidx[n]) != len(level):
                seen = set()
                for v in level:
                    if v in seen:
                        found.append(Violation(n, f"vertex '{v}'", "duplicate identifier"))
                    seen.add(v)
        for m, row in enumerate(self._edges):
            n = m + 1
            if len(self._eidx[m]) != len(row):
                seen = set()
                for e in row:
                    if e.id in seen:
                        found.append(Violation(n, f"edge '{e.id}'", "duplicate identifier"))
                    seen.add(e.id)
            for e in row:
                if e.src not in self._vidx[n - 1]:
                    found.append(Violation(n, f"edge '{e.id}'", f"source '{e.src}' not in V({n - 1})"))
                if e.rng not in self._vidx[n]:
                    found.append(Violation(n, f"edge '{e.id}'", f"range '{e.rng}' not in V({n})"))
        # emission / reception, only meaningful where endpoints resolve
        for m, row in enumerate(self._edges):
            n = m + 1
            emitting = {e.src for e in row}
            receiving = {e.rng for e in row}
            for v in self._vertices[n - 1]:
                if v not in emitting:
                    found.append(Violation(n - 1, f"vertex '{v}'", "emits no edge"))
            for v in self._vertices[n]:
                if v not in receiving:
                    found.append(Violation(n, f"vertex '{v}'", "receives no edge"))
        return found

    def _build_adjacency(self):
        out, inc = [], []
        for m, row in enumerate(self._edges):
            o = [[] for _ in self._vertices[m]]
            i = [[] for _ in self._vertices[m + 1]]
            for k, e in enumerate(row):
                o[self._vidx[m][e.src]].append(k)
                i[self._vidx[m + 1][e.rng]].append(k)
            out.append(tuple(tuple(x) for x in o))
            inc.append(tuple(tuple(x) for x in i))
        self._out = tuple(out)
        self._in = tuple(inc)

    def validate(self) -> list[Violation]:
        """All invariant violations; empty iff the diagram is valid."""
        return list(self._violations)

    @property
    def is_valid(self) -> bool:
        return not self._violations

    def require_valid(self):
        if self._violations:
            raise InvalidDiagram(str(self._violations[0]))

    # -- paths ---------------------------------------------------------------

    def path(self, edge_ids: Iterable[str], start_level: int = 0, anchor: str | None = None) -> FinitePath:
        """Build and check a path from consecutive edge ids.

        For the empty path ``anchor`` names the vertex the path sits at.
        Raises PathError when an edge is unknown or consecutive edges do not
        compose.
        """
        self.require_valid()
        ids = tuple(edge_ids)
        if not 0 <= start_level <= self.depth:
            raise PathError(f"start level {start_level} out of range 0..{self.depth}")
        if start_level + len(ids) > self.depth:
            raise PathError("path not in diagram: runs past the last level")
        if not ids:
            if anchor is None:
                raise PathError("empty path needs an anchor vertex")
            self.vertex_index(start_level, anchor)
            return FinitePath(start_level, anchor, (), anchor)
        at = None
        for off, eid in enumerate(ids):
            e = self.edge(start_level + off + 1, eid)
            if at is not None and e.src != at:
                raise PathError(
                    f"path not in diagram: edge '{eid}' starts at '{e.src}', expected '{at}'"
                )
            if at is None:
                first_src = e.src
            at = e.rng
        if anchor is not None and anchor != first_src:
            raise PathError(f"anchor '{anchor}' does not match first edge source '{first_src}'")
        return FinitePath(start_level, first_src, ids, at)

    def empty_path(self, vertex_id: str, level: int = 0) -> FinitePath:
        return self.path((), start_level=level, anchor=vertex_id)

    def contains_path(self, p: FinitePath) -> bool:
        try:
            rebuilt = self.path(p.edges, p.start_level, p.anchor)
        except PathError:
            return False
        return rebuilt == p

    def extensions(self, p: FinitePath) -> list[FinitePath]:
        """All one-edge extensions of ``p``, in edge order."""
        self.require_valid()
        n = p.end_level
        if n >= self.depth:
            return []
        return [
            FinitePath(p.start_level, p.anchor, p.edges + (e.id,), e.rng)
            for e in self.out_edges(n, p.terminus)
        ]

    def path_edges(self, p: FinitePath) -> list[Edge]:
        return [self.edge(p.start_level + i + 1, eid) for i, eid in enumerate(p.edges)]


def validate_diagram(d: BratteliDiagram) -> list[Violation]:
    """Every broken invariant of ``d``; empty list iff valid."""
    return d.validate()


def enumerate_paths(d: BratteliDiagram, from_level: int, to_level: int) -> list[FinitePath]:
    """All paths from ``from_level`` to ``to_level``, lexicographic by edge index.

    Equal levels yield one empty path per vertex, in vertex order.
    """
    d.require_valid()
    if not 0 <= from_level <= to_level <= d.depth:
        raise PathError(
            f"level range {from_level}..{to_level} out of bounds for depth {d.depth}"
        )
    if from_level == to_level:
        return [d.empty_path(v, from_level) for v in d.vertices(from_level)]
    result: list[FinitePath] = []
    # depth-first over edge indices; sorted branches give lexicographic order
    def grow(prefix: tuple[str, ...], at: str, level: int):
        if level == to_level:
            result.append(FinitePath(from_level, prefix_anchor[0], prefix, at))
            return
        for e in d.out_edges(level, at):
            grow(prefix + (e.id,), e.rng, level + 1)

    prefix_anchor = [None]
    for e in d.edges(from_level + 1):
        prefix_anchor[0] = e.src
        grow((e.id,), e.rng, from_level + 1)
    return result


def count_paths(d: BratteliDiagram, from_level: int, to_level: int) -> dict[str, int]:
    """Path counts into each vertex of V(to_level), by the incidence recursion."""
    d.require_valid()
    counts = {v: 1 for v in d.vertices(from_level)}
    for n in range(from_level + 1, to_level + 1):
        nxt = {v: 0 for v in d.vertices(n)}
        for e in d.edges(n):
            nxt[e.rng] += counts[e.src]
        counts = nxt
    return counts


def tail_related(a: FinitePath, b: FinitePath) -> bool:
    """Whether (a, b) lies in the level-n relation: same length, same range.

    Both paths must start at level 0; cylinders Z(a, b) over such pairs
    generate the tail equivalence on the path space.
    """
    if a.start_level != 0 or b.start_level != 0:
        raise PathError("tail relation is defined on paths starting at level 0")
    return len(a) == len(b) and a.terminus == b.terminus


def subdiagram(d: BratteliDiagram, keep_vertices, keep_edges) -> BratteliDiagram:
    """Restriction of ``d`` to the given vertex/edge id sets (order preserved).

    ``keep_vertices``: one set per level 0..N; ``keep_edges``: one set per
    level 1..N.  The result reuses the original identifiers.
    """
    vs = [
        [v for v in d.vertices(n) if v in keep_vertices[n]]
        for n in range(d.depth + 1)
    ]
    es = [
        [e for e in d.edges(n) if e.id in keep_edges[n - 1]]
        for n in range(1, d.depth + 1)
    ]
    return BratteliDiagram(vs, es)
