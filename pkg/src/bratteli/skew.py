"""Skew products by group-valued edge potentials, and the worked generators.

An edge potential assigns each edge an element of an exact group (an integer
lattice or the positive rationals under multiplication).  The skew product
puts a group coordinate on every vertex: an edge (e, g) runs from (s(e), g)
to (r(e), g * rho(e)).  Only the finitely many coordinates reachable from a
user-supplied initial window are materialized, level by level; the windowed
construction is equivariant under a common left translation of the window.

Two generator families live here as well: the binomial triangle with its
t-walk (whose cotransition is t-independent), and single-vertex diagrams
built from weighted group supports, where the potential is the inclusion of
the edge set into the group.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .diagram import BratteliDiagram, Edge, FinitePath, tail_related
from .errors import (
    IncompatibleData,
    NotTailRelated,
    SupportViolation,
    WindowError,
)
from .harmonic import HarmonicSequence, harmonic_from_terminal
from .rational import as_fraction, format_fraction
from .walk import RandomWalk, build_walk


class ZLattice:
    """Integer vectors of a fixed rank under addition."""

    def __init__(self, rank: int = 1):
        if rank < 1:
            raise IncompatibleData(f"lattice rank must be >= 1, got {rank}")
        self.rank = rank
        self.identity = (0,) * rank

    def op(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def parse(self, raw):
        if isinstance(raw, bool):
            raise IncompatibleData(f"not a lattice element: {raw!r}")
        if isinstance(raw, int):
            raw = (raw,)
        if isinstance(raw, str):
            try:
                raw = tuple(int(part) for part in raw.split("_"))
            except ValueError:
                raise IncompatibleData(f"not a lattice element: {raw!r}") from None
        if isinstance(raw, (list, tuple)):
            if len(raw) != self.rank or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in raw
            ):
                raise IncompatibleData(
                    f"not a rank-{self.rank} lattice element: {raw!r}"
                )
            return tuple(raw)
        raise IncompatibleData(f"not a lattice element: {raw!r}")

    def format(self, g) -> str:
        return "_".join(str(x) for x in g)

    def __eq__(self, other):
        return isinstance(other, ZLattice) and other.rank == self.rank

    def __hash__(self):
        return hash(("ZLattice", self.rank))


class MultiplicativeRationals:
    """Positive rationals under multiplication."""

    identity = Fraction(1)

    def op(self, a, b):
        return a * b

    def inv(self, a):
        return 1 / a

    def parse(self, raw):
        value = as_fraction(raw)
        if value <= 0:
            raise IncompatibleData(f"not a positive rational: {raw!r}")
        return value

    def format(self, g) -> str:
        return format_fraction(g)

    def __eq__(self, other):
        return isinstance(other, MultiplicativeRationals)

    def __hash__(self):
        return hash("MultiplicativeRationals")


class EdgePotential:
    """A group element on every edge, one mapping per level."""

    def __init__(self, d: BratteliDiagram, group, values: Sequence[Mapping[str, object]]):
        d.require_valid()
        self.diagram = d
        self.group = group
        levels = list(values)
        if len(levels) != d.depth:
            raise IncompatibleData(
                f"potential: got {len(levels)} levels of values, diagram has {d.depth} edge levels"
            )
        rows = []
        for m, mapping in enumerate(levels):
            n = m + 1
            row = {}
            for e in d.edges(n):
                if e.id not in mapping:
                    raise IncompatibleData(f"potential: no value for edge '{e.id}' at level {n}")
                row[e.id] = group.parse(mapping[e.id])
            rows.append(row)
        self._rho = tuple(rows)

    def __call__(self, n: int, edge_id: str):
        self.diagram.edge_index(n, edge_id)
        return self._rho[n - 1][edge_id]

    def of_path(self, a: FinitePath):
        """Ordered product of the potential along ``a``."""
        value = self.group.identity
        for off, eid in enumerate(a.edges):
            value = self.group.op(value, self(a.start_level + off + 1, eid))
        return value


def group_cocycle(rho: EdgePotential, a: FinitePath, b: FinitePath):
    """rho(a) * rho(b)^{-1} on a tail-related pair of paths."""
    if not tail_related(a, b):
        raise NotTailRelated("paths not tail equivalent")
    return rho.group.op(rho.of_path(a), rho.group.inv(rho.of_path(b)))


def cotransition_potential(w: RandomWalk) -> EdgePotential:
    """The walk's cotransition as a multiplicative-rational edge potential, so
    that the group cocycle coincides with the walk's density cocycle."""
    values = [w.cotransition.level(n) for n in range(1, w.depth + 1)]
    return EdgePotential(w.diagram, MultiplicativeRationals(), values)


@dataclass(frozen=True, eq=False)
class SkewDiagram:
    """A windowed skew product: the base diagram with group coordinates.

    ``diagram`` is itself a valid Bratteli diagram whose ids are
    'base@element'; ``pairs`` recovers (base id, group element) per level."""

    base: BratteliDiagram
    group: object
    potential: EdgePotential
    initial_window: tuple
    diagram: BratteliDiagram
    _vertex_pairs: tuple
    _edge_pairs: tuple

    def window(self, n: int) -> tuple:
        """Group elements present at level n, sorted."""
        return tuple(sorted({g for (_, g) in self._vertex_pairs[n]}))

    def vertex_pairs(self, n: int) -> tuple:
        """(base vertex id, group element) per skew vertex, in vertex order."""
        return self._vertex_pairs[n]

    def edge_pairs(self, n: int) -> tuple:
        """(base edge id, source group element) per skew edge, in edge order."""
        return self._edge_pairs[n - 1]

    def vertex_id(self, n: int, base_vertex: str, g) -> str:
        name = f"{base_vertex}@{self.group.format(g)}"
        if not self.diagram.has_vertex(n, name):
            raise WindowError(
                f"group element {self.group.format(g)} is not in the level-{n} window "
                f"(vertex '{base_vertex}')"
            )
        return name

    def source_range_law_holds(self) -> bool:
        """s(e,g) = (s(e), g) and r(e,g) = (r(e), g rho(e)) on every skew edge."""
        for n in range(1, self.diagram.depth + 1):
            for edge, (base_id, g) in zip(self.diagram.edges(n), self._edge_pairs[n - 1]):
                base_edge = self.base.edge(n, base_id)
                g2 = self.group.op(g, self.potential(n, base_id))
                if edge.src != f"{base_edge.src}@{self.group.format(g)}":
                    return False
                if edge.rng != f"{base_edge.rng}@{self.group.format(g2)}":
                    return False
        return True


def skew_product(d: BratteliDiagram, rho: EdgePotential, initial_window) -> SkewDiagram:
    """Build the reachable part of the skew product over the initial window."""
    d.require_valid()
    if rho.diagram is not d:
        raise IncompatibleData("potential must be built on the diagram being skewed")
    group = rho.group
    window0 = sorted({group.parse(g) for g in initial_window})
    if not window0:
        raise WindowError("initial window is empty")
    fmt = group.format
    vertex_pairs = [tuple((v, g) for v in d.vertices(0) for g in window0)]
    vertex_levels = [[f"{v}@{fmt(g)}" for (v, g) in vertex_pairs[0]]]
    edge_levels = []
    edge_pairs = []
    for n in range(1, d.depth + 1):
        reached = set()
        edges_here = []
        pairs_here = []
        for (v, g) in vertex_pairs[n - 1]:
            for e in d.out_edges(n - 1, v):
                g2 = group.op(g, rho(n, e.id))
                reached.add((e.rng, g2))
                edges_here.append(
                    Edge(f"{e.id}@{fmt(g)}", f"{v}@{fmt(g)}", f"{e.rng}@{fmt(g2)}")
                )
                pairs_here.append((e.id, g))
        ordered = sorted(reached, key=lambda p: (d.vertex_index(n, p[0]), p[1]))
        vertex_pairs.append(tuple(ordered))
        vertex_levels.append([f"{v}@{fmt(g)}" for (v, g) in ordered])
        edge_levels.append(edges_here)
        edge_pairs.append(tuple(pairs_here))
    skewed = BratteliDiagram(vertex_levels, edge_levels)
    skewed.require_valid()
    return SkewDiagram(
        base=d,
        group=group,
        potential=rho,
        initial_window=tuple(window0),
        diagram=skewed,
        _vertex_pairs=tuple(vertex_pairs),
        _edge_pairs=tuple(edge_pairs),
    )


def lift_walk(sd: SkewDiagram, w: RandomWalk, lam0: Mapping) -> RandomWalk:
    """The base walk on the skew diagram: p(e,g) = p(e), initial mass
    nu0(v) * lam0(g) normalized over the initial window."""
    if w.diagram is not sd.base:
        raise IncompatibleData("walk must live on the skew product's base diagram")
    weights = {}
    for raw, value in lam0.items():
        g = sd.group.parse(raw)
        if g not in sd.initial_window:
            raise WindowError(
                f"initial weight given for {sd.group.format(g)}, which is outside the window"
            )
        weights[g] = as_fraction(value)
    for g in sd.initial_window:
        if g not in weights:
            raise WindowError(f"no initial weight for window element {sd.group.format(g)}")
        if weights[g] <= 0:
            raise SupportViolation(
                f"initial weight of {sd.group.format(g)} is {weights[g]}, not positive"
            )
    total = sum(weights.values())
    fmt = sd.group.format
    nu0 = {
        f"{v}@{fmt(g)}": w.initial(v) * weights[g] / total for (v, g) in sd.vertex_pairs(0)
    }
    p_levels = []
    for n in range(1, sd.diagram.depth + 1):
        p_levels.append(
            {
                edge.id: w.p(n, base_id)
                for edge, (base_id, _) in zip(sd.diagram.edges(n), sd.edge_pairs(n))
            }
        )
    return build_walk(sd.diagram, p_levels, nu0)


def skew_harmonic(
    sd: SkewDiagram, w: RandomWalk, lam0: Mapping, terminal: Mapping
) -> HarmonicSequence:
    """Harmonic sequence on the skew diagram from terminal data keyed by
    (base vertex id, group element) pairs."""
    lifted = lift_walk(sd, w, lam0)
    n = sd.diagram.depth
    data = {}
    for (v, raw), value in terminal.items():
        g = sd.group.parse(raw)
        data[sd.vertex_id(n, v, g)] = as_fraction(value)
    return harmonic_from_terminal(lifted, data)


# -- generators ---------------------------------------------------------------


def pascal_diagram(depth: int, t) -> tuple[BratteliDiagram, RandomWalk]:
    """The binomial triangle of the given depth with the (1-t, t) walk.

    Vertices are 'n:k'; the two edges out of (n-1, k) are 'n-1:k:0' (stay,
    probability 1-t) and 'n-1:k:1' (step, probability t).  The cotransition
    works out to 1 - k/n and k/n on the in-edges of (n, k), independent of t.
    """
    if depth < 1:
        raise IncompatibleData(f"depth must be >= 1, got {depth}")
    t = as_fraction(t)
    if not 0 < t < 1:
        raise SupportViolation(f"t must satisfy 0 < t < 1, got {t}")
    vertices = [[f"{n}:{k}" for k in range(n + 1)] for n in range(depth + 1)]
    edges = []
    p_levels = []
    for n in range(1, depth + 1):
        row = []
        p_row = {}
        for k in range(n):
            stay = f"{n - 1}:{k}:0"
            step = f"{n - 1}:{k}:1"
            row.append(Edge(stay, f"{n - 1}:{k}", f"{n}:{k}"))
            row.append(Edge(step, f"{n - 1}:{k}", f"{n}:{k + 1}"))
            p_row[stay] = 1 - t
            p_row[step] = t
        edges.append(row)
        p_levels.append(p_row)
    d = BratteliDiagram(vertices, edges)
    return d, build_walk(d, p_levels, {"0:0": 1})


def pascal_edge_potential(d: BratteliDiagram) -> EdgePotential:
    """The step indicator as a rank-1 lattice potential on a triangle diagram."""
    values = [
        {e.id: (int(e.id.rsplit(":", 1)[1]),) for e in d.edges(n)}
        for n in range(1, d.depth + 1)
    ]
    return EdgePotential(d, ZLattice(1), values)


def pascal_path(d: BratteliDiagram, bits: str) -> FinitePath:
    """The path of a 0/1 word: start at '0:0' and follow the labeled edges."""
    k = 0
    ids = []
    for n, bit in enumerate(bits):
        if bit not in "01":
            raise IncompatibleData(f"path word must be over 0/1, got {bits!r}")
        ids.append(f"{n}:{k}:{bit}")
        k += int(bit)
    return d.path(ids) if ids else d.empty_path("0:0")


def uhf_from_group_walk(
    group, supports: Sequence[Mapping]
) -> tuple[BratteliDiagram, RandomWalk, EdgePotential]:
    """Single-vertex levels whose edges are weighted group elements.

    Level n has one vertex 'u<n>' and one edge per element of the n-th
    support, weighted by the given probabilities; the potential sends each
    edge to its group element, so the cylinder measure of a word is the
    product of its letter weights.
    """
    if not supports:
        raise IncompatibleData("need at least one support level")
    parsed = []
    for m, support in enumerate(supports):
        if not support:
            raise IncompatibleData(f"support at level {m + 1} is empty")
        row = []
        for raw, weight in support.items():
            g = group.parse(raw)
            wt = as_fraction(weight)
            if wt <= 0:
                raise SupportViolation(
                    f"weight of {group.format(g)} at level {m + 1} is {wt}, not positive"
                )
            row.append((g, wt))
        row.sort(key=lambda item: item[0])
        total = sum(wt for _, wt in row)
        if total != 1:
            raise SupportViolation(f"weights at level {m + 1} sum to {total}, not 1")
        parsed.append(row)
    vertices = [[f"u{n}"] for n in range(len(parsed) + 1)]
    edges = []
    p_levels = []
    rho_levels = []
    for m, row in enumerate(parsed):
        n = m + 1
        level = []
        p_row = {}
        rho_row = {}
        for g, wt in row:
            eid = f"{n}:{group.format(g)}"
            level.append(Edge(eid, f"u{n - 1}", f"u{n}"))
            p_row[eid] = wt
            rho_row[eid] = g
        edges.append(level)
        p_levels.append(p_row)
        rho_levels.append(rho_row)
    d = BratteliDiagram(vertices, edges)
    walk = build_walk(d, p_levels, {"u0": 1})
    rho = EdgePotential(d, group, rho_levels)
    return d, walk, rho
