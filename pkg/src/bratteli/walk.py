"""Random walks on a Bratteli diagram.

A walk is a pair (p, nu0): transition probabilities on the out-edges of each
vertex plus an initial distribution on V(0).  From these the level
distributions nu_n and the cotransition probabilities q_n on in-edges are
derived once at construction, exactly.  The edge measure identity
nu_{n-1}(s(e)) p_n(e) = nu_n(r(e)) q_n(e) holds by definition of q and is the
source of every formula below.

Everything here is exact rational arithmetic; there is no floating point in
this module apart from the seeded sampler, which only uses floats to draw.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping, Sequence

from .diagram import BratteliDiagram, FinitePath, enumerate_paths, tail_related
from .errors import (
    IncompatibleData,
    NotAMeasure,
    NotTailRelated,
    PathError,
    SupportViolation,
)
from .rational import as_fraction

ONE = Fraction(1)


def _per_level_values(d: BratteliDiagram, levels, what: str) -> tuple[tuple[Fraction, ...], ...]:
    """Align per-level {edge id: rational} maps with the diagram's edge order."""
    levels = list(levels)
    if len(levels) != d.depth:
        raise IncompatibleData(
            f"{what}: got {len(levels)} levels of values, diagram has {d.depth} edge levels"
        )
    rows = []
    for m, mapping in enumerate(levels):
        n = m + 1
        edges = d.edges(n)
        unknown = set(mapping) - {e.id for e in edges}
        if unknown:
            raise IncompatibleData(f"{what}: unknown edge '{sorted(unknown)[0]}' at level {n}")
        row = []
        for e in edges:
            if e.id not in mapping:
                raise IncompatibleData(f"{what}: no value for edge '{e.id}' at level {n}")
            row.append(as_fraction(mapping[e.id]))
        rows.append(tuple(row))
    return tuple(rows)


class TransitionProbability:
    """Positive edge weights with unit sums over the out-edges of each vertex."""

    def __init__(self, d: BratteliDiagram, values: Sequence[Mapping[str, object]]):
        d.require_valid()
        self.diagram = d
        self._p = _per_level_values(d, values, "transition probability")
        for m, row in enumerate(self._p):
            n = m + 1
            for e, val in zip(d.edges(n), row):
                if val <= 0:
                    raise SupportViolation(
                        f"transition probability: p({e.id}) = {val} at level {n} is not positive"
                    )
            for v in d.vertices(n - 1):
                total = sum(row[d.edge_index(n, e.id)] for e in d.out_edges(n - 1, v))
                if total != ONE:
                    raise SupportViolation(
                        f"transition probability: out-edges of '{v}' at level {n - 1} sum to {total}, not 1"
                    )

    @classmethod
    def uniform(cls, d: BratteliDiagram) -> "TransitionProbability":
        values = []
        for n in range(1, d.depth + 1):
            row = {}
            for v in d.vertices(n - 1):
                out = d.out_edges(n - 1, v)
                for e in out:
                    row[e.id] = Fraction(1, len(out))
            values.append(row)
        return cls(d, values)

    def __call__(self, n: int, edge_id: str) -> Fraction:
        return self._p[n - 1][self.diagram.edge_index(n, edge_id)]

    def level(self, n: int) -> dict[str, Fraction]:
        return {e.id: v for e, v in zip(self.diagram.edges(n), self._p[n - 1])}


class InitialDistribution:
    """A strictly positive probability vector on V(0)."""

    def __init__(self, d: BratteliDiagram, values: Mapping[str, object]):
        d.require_valid()
        self.diagram = d
        top = d.vertices(0)
        unknown = set(values) - set(top)
        if unknown:
            raise IncompatibleData(f"initial distribution: unknown vertex '{sorted(unknown)[0]}'")
        vec = []
        for v in top:
            if v not in values:
                raise IncompatibleData(f"initial distribution: no value for vertex '{v}'")
            x = as_fraction(values[v])
            if x <= 0:
                raise SupportViolation(f"initial distribution: nu0({v}) = {x} is not positive")
            vec.append(x)
        total = sum(vec)
        if total != ONE:
            raise SupportViolation(f"initial distribution sums to {total}, not 1")
        self._nu0 = tuple(vec)

    @classmethod
    def point_mass(cls, d: BratteliDiagram, vertex: str) -> "InitialDistribution":
        if len(d.vertices(0)) != 1:
            raise SupportViolation(
                "point mass needs a single level-0 vertex; "
                "initial distributions must be strictly positive everywhere"
            )
        return cls(d, {vertex: ONE})

    @classmethod
    def uniform(cls, d: BratteliDiagram) -> "InitialDistribution":
        top = d.vertices(0)
        return cls(d, {v: Fraction(1, len(top)) for v in top})

    def __call__(self, vertex_id: str) -> Fraction:
        return self._nu0[self.diagram.vertex_index(0, vertex_id)]

    def as_dict(self) -> dict[str, Fraction]:
        return {v: x for v, x in zip(self.diagram.vertices(0), self._nu0)}


class CotransitionProbability:
    """Positive edge weights with unit sums over the in-edges of each vertex."""

    def __init__(self, d: BratteliDiagram, values: Sequence[Mapping[str, object]]):
        d.require_valid()
        self.diagram = d
        self._q = _per_level_values(d, values, "cotransition probability")
        for m, row in enumerate(self._q):
            n = m + 1
            for e, val in zip(d.edges(n), row):
                if val <= 0:
                    raise SupportViolation(
                        f"cotransition probability: q({e.id}) = {val} at level {n} is not positive"
                    )
            for w in d.vertices(n):
                total = sum(row[d.edge_index(n, e.id)] for e in d.in_edges(n, w))
                if total != ONE:
                    raise SupportViolation(
                        f"cotransition probability: in-edges of '{w}' at level {n} sum to {total}, not 1"
                    )

    def __call__(self, n: int, edge_id: str) -> Fraction:
        return self._q[n - 1][self.diagram.edge_index(n, edge_id)]

    def level(self, n: int) -> dict[str, Fraction]:
        return {e.id: v for e, v in zip(self.diagram.edges(n), self._q[n - 1])}

    def of_path(self, a: FinitePath) -> Fraction:
        """Product of the per-edge cotransitions along ``a``; 1 on empty paths."""
        value = ONE
        for off, eid in enumerate(a.edges):
            value *= self(a.start_level + off + 1, eid)
        return value


class RandomWalk:
    """A diagram with (p, nu0) and the derived distributions and cotransition.

    nu_n(w) = sum over edges e into w of p_n(e) nu_{n-1}(s(e)), and
    q_n(e) = nu_{n-1}(s(e)) p_n(e) / nu_n(r(e)).  Full support makes every
    nu_n strictly positive, so q is always defined.  Instances are immutable;
    share them freely.
    """

    def __init__(self, d: BratteliDiagram, p: TransitionProbability, nu0: InitialDistribution):
        d.require_valid()
        if p.diagram is not d or nu0.diagram is not d:
            raise IncompatibleData("walk data must be built on the walk's own diagram")
        self.diagram = d
        self.transition = p
        self.initial = nu0
        nus = [tuple(nu0(v) for v in d.vertices(0))]
        qs = []
        for n in range(1, d.depth + 1):
            prev = nus[-1]
            nxt = [Fraction(0)] * len(d.vertices(n))
            for e in d.edges(n):
                nxt[d.vertex_index(n, e.rng)] += p(n, e.id) * prev[d.vertex_index(n - 1, e.src)]
            nus.append(tuple(nxt))
            qrow = []
            for e in d.edges(n):
                qrow.append(
                    prev[d.vertex_index(n - 1, e.src)] * p(n, e.id) / nxt[d.vertex_index(n, e.rng)]
                )
            qs.append({e.id: val for e, val in zip(d.edges(n), qrow)})
        self._nus = tuple(nus)
        self.cotransition = CotransitionProbability(d, qs)

    @property
    def depth(self) -> int:
        return self.diagram.depth

    def p(self, n: int, edge_id: str) -> Fraction:
        return self.transition(n, edge_id)

    def q(self, n: int, edge_id: str) -> Fraction:
        return self.cotransition(n, edge_id)

    def nu(self, n: int) -> dict[str, Fraction]:
        """The level-n distribution as a fresh {vertex: mass} dict."""
        if not 0 <= n <= self.depth:
            raise PathError(f"distribution level {n} out of range 0..{self.depth}")
        return {v: x for v, x in zip(self.diagram.vertices(n), self._nus[n])}

    def nu_at(self, n: int, vertex_id: str) -> Fraction:
        if not 0 <= n <= self.depth:
            raise PathError(f"distribution level {n} out of range 0..{self.depth}")
        return self._nus[n][self.diagram.vertex_index(n, vertex_id)]


def build_walk(d: BratteliDiagram, p, nu0) -> RandomWalk:
    """Construct a walk; ``p`` and ``nu0`` may be raw mappings or typed values."""
    if not isinstance(p, TransitionProbability):
        p = TransitionProbability(d, p)
    if not isinstance(nu0, InitialDistribution):
        nu0 = InitialDistribution(d, nu0)
    return RandomWalk(d, p, nu0)


def _check_in_diagram(w: RandomWalk, a: FinitePath):
    if a.start_level != 0:
        raise PathError("cylinder paths must start at level 0")
    if not w.diagram.contains_path(a):
        raise PathError(f"path not in diagram: {a.label()}")


def cylinder_measure(w: RandomWalk, a: FinitePath) -> Fraction:
    """Mass of the cylinder over ``a``: nu0(s(a)) times the edge transitions."""
    _check_in_diagram(w, a)
    value = w.initial(a.anchor)
    for off, eid in enumerate(a.edges):
        value *= w.p(off + 1, eid)
    return value


def cotransition_of_path(w: RandomWalk, a: FinitePath) -> Fraction:
    """q(a) = product of per-edge cotransitions: the probability the walk
    traversed ``a`` given that it sits at r(a) at time len(a)."""
    _check_in_diagram(w, a)
    return w.cotransition.of_path(a)


def radon_nikodym(w: RandomWalk, a: FinitePath, b: FinitePath) -> Fraction:
    """The walk's quasi-product cocycle q(a)/q(b) on the cylinder pair (a, b)."""
    if not tail_related(a, b):
        raise NotTailRelated("paths not tail equivalent")
    return cotransition_of_path(w, a) / cotransition_of_path(w, b)


def from_cotransition(d: BratteliDiagram, q, nus: Sequence[Mapping[str, object]]) -> RandomWalk:
    """The unique walk with cotransition ``q`` and level distributions ``nus``.

    Compatibility demands nu_{n-1}(v) = sum over out-edges e of v of
    q_n(e) nu_n(r(e)), exactly, at every level; the first offending level and
    vertex are reported.  Transitions are recovered from the edge measure
    identity and the walk is rebuilt, so the result round-trips to the exact
    same (q, nus).
    """
    d.require_valid()
    if not isinstance(q, CotransitionProbability):
        q = CotransitionProbability(d, q)
    if q.diagram is not d:
        raise IncompatibleData("cotransition must be built on the same diagram")
    nus = list(nus)
    if len(nus) != d.depth + 1:
        raise IncompatibleData(
            f"need one distribution per level 0..{d.depth}, got {len(nus)}"
        )
    levels = []
    for n, mapping in enumerate(nus):
        vs = d.vertices(n)
        unknown = set(mapping) - set(vs)
        if unknown:
            raise IncompatibleData(f"distribution at level {n}: unknown vertex '{sorted(unknown)[0]}'")
        row = []
        for v in vs:
            if v not in mapping:
                raise IncompatibleData(f"distribution at level {n}: no value for vertex '{v}'")
            row.append(as_fraction(mapping[v]))
        levels.append(row)
    for n in range(1, d.depth + 1):
        for v in d.vertices(n - 1):
            pushed = sum(
                q(n, e.id) * levels[n][d.vertex_index(n, e.rng)] for e in d.out_edges(n - 1, v)
            )
            have = levels[n - 1][d.vertex_index(n - 1, v)]
            if pushed != have:
                raise IncompatibleData(
                    f"distributions not compatible with cotransition at level {n}, "
                    f"vertex '{v}': nu_{n - 1}({v}) = {have} but the level-{n} "
                    f"pushforward gives {pushed}"
                )
    p_values = []
    for n in range(1, d.depth + 1):
        row = {}
        for e in d.edges(n):
            src = levels[n - 1][d.vertex_index(n - 1, e.src)]
            if src == 0:
                raise SupportViolation(
                    f"distribution at level {n - 1} vanishes at '{e.src}'; walk has no full support"
                )
            row[e.id] = q(n, e.id) * levels[n][d.vertex_index(n, e.rng)] / src
        p_values.append(row)
    return build_walk(d, p_values, dict(zip(d.vertices(0), levels[0])))


# -- cylinder tables and the q-measure criterion ------------------------------

CylinderTable = dict  # FinitePath -> Fraction, all paths of length <= depth


def markov_cylinder_table(w: RandomWalk, depth: int) -> dict[FinitePath, Fraction]:
    """The walk's own cylinder masses on all paths of length <= depth."""
    if not 0 <= depth <= w.depth:
        raise PathError(f"table depth {depth} out of range 0..{w.depth}")
    table = {}
    for n in range(depth + 1):
        for a in enumerate_paths(w.diagram, 0, n):
            table[a] = cylinder_measure(w, a)
    return table


def table_from_leaves(
    d: BratteliDiagram, depth: int, leaf_masses: Mapping[FinitePath, Fraction]
) -> dict[FinitePath, Fraction]:
    """Extend masses on length-``depth`` paths to an additive cylinder table."""
    table = {}
    for a in enumerate_paths(d, 0, depth):
        if a not in leaf_masses:
            raise NotAMeasure(f"no mass for path {a.label()}")
        table[a] = as_fraction(leaf_masses[a])
    for n in range(depth - 1, -1, -1):
        for a in enumerate_paths(d, 0, n):
            table[a] = sum(table[b] for b in d.extensions(a))
    return table


def _q_measure_witness(d, q, table, depth):
    if not isinstance(q, CotransitionProbability):
        q = CotransitionProbability(d, q)
    if not 0 <= depth <= d.depth:
        raise PathError(f"depth {depth} out of range 0..{d.depth}")
    paths_by_level = [enumerate_paths(d, 0, n) for n in range(depth + 1)]
    for level in paths_by_level:
        for a in level:
            if a not in table:
                raise NotAMeasure(f"no mass for path {a.label()}")
            if as_fraction(table[a]) < 0:
                raise NotAMeasure(f"negative mass on path {a.label()}")
    total = sum(as_fraction(table[a]) for a in paths_by_level[0])
    if total != ONE:
        raise NotAMeasure(f"empty-path masses sum to {total}, not 1")
    for n in range(depth):
        for a in paths_by_level[n]:
            parts = sum(as_fraction(table[b]) for b in d.extensions(a))
            if as_fraction(table[a]) != parts:
                raise NotAMeasure(
                    f"not additive at {a.label()}: mass {as_fraction(table[a])}, "
                    f"extensions sum to {parts}"
                )
    # criterion: masses are q(a) times the measure's own level marginal
    for n in range(depth + 1):
        marginal = {v: Fraction(0) for v in d.vertices(n)}
        for a in paths_by_level[n]:
            marginal[a.terminus] += as_fraction(table[a])
        for a in paths_by_level[n]:
            expected = q.of_path(a) * marginal[a.terminus]
            if as_fraction(table[a]) != expected:
                return (a, expected, as_fraction(table[a]))
    return None


def check_q_measure(d: BratteliDiagram, q, table, depth: int) -> bool:
    """Whether the cylinder table is the Markov measure of some walk with
    cotransition ``q``, i.e. factors through the backward expectation chain.

    At finite depth the criterion is m(Z(a)) = q(a) times m's own level-n
    marginal at r(a), for every path a of length n <= depth.
    """
    return _q_measure_witness(d, q, table, depth) is None


def q_measure_witness(d: BratteliDiagram, q, table, depth: int):
    """None if the table passes; else (path, expected mass, actual mass)."""
    return _q_measure_witness(d, q, table, depth)


def sample_path(w: RandomWalk, seed: int, depth: int) -> FinitePath:
    """Draw a path of length ``depth`` from the Markov measure, reproducibly."""
    if not 0 <= depth <= w.depth:
        raise PathError(f"sample depth {depth} out of range 0..{w.depth}")
    rng = random.Random(seed)

    def draw(items, weights):
        u = rng.random()
        acc = 0.0
        for item, wt in zip(items, weights):
            acc += float(wt)
            if u < acc:
                return item
        return items[-1]

    top = w.diagram.vertices(0)
    at = draw(top, [w.initial(v) for v in top])
    edges = []
    for n in range(depth):
        out = w.diagram.out_edges(n, at)
        e = draw(out, [w.p(n + 1, f.id) for f in out])
        edges.append(e.id)
        at = e.rng
    return w.diagram.path(edges) if edges else w.diagram.empty_path(at)


class QuasiProductCocycle:
    """D(az, bz) = phi(a) phi(b)^{-1} for an edge potential phi into a group.

    The default group is the positive rationals under multiplication; any
    group object with ``op``, ``inv`` and ``identity`` works (the skew module
    provides lattice and multiplicative-rational groups).
    """

    def __init__(self, d: BratteliDiagram, potential: Sequence[Mapping[str, object]], group=None):
        d.require_valid()
        self.diagram = d
        self.group = group
        levels = list(potential)
        if len(levels) != d.depth:
            raise IncompatibleData(
                f"potential: got {len(levels)} levels, diagram has {d.depth} edge levels"
            )
        rows = []
        for m, mapping in enumerate(levels):
            n = m + 1
            row = {}
            for e in d.edges(n):
                if e.id not in mapping:
                    raise IncompatibleData(f"potential: no value for edge '{e.id}' at level {n}")
                val = mapping[e.id]
                row[e.id] = val if group is not None else as_fraction(val)
            rows.append(row)
        self._phi = tuple(rows)

    def _op(self, a, b):
        return self.group.op(a, b) if self.group is not None else a * b

    def _inv(self, a):
        return self.group.inv(a) if self.group is not None else 1 / a

    def _identity(self):
        return self.group.identity if self.group is not None else ONE

    def edge_value(self, n: int, edge_id: str):
        self.diagram.edge_index(n, edge_id)
        return self._phi[n - 1][edge_id]

    def of_path(self, a: FinitePath):
        """Ordered product of the potential along ``a``."""
        value = self._identity()
        for off, eid in enumerate(a.edges):
            value = self._op(value, self.edge_value(a.start_level + off + 1, eid))
        return value

    def value(self, a: FinitePath, b: FinitePath):
        if not tail_related(a, b):
            raise NotTailRelated("paths not tail equivalent")
        return self._op(self.of_path(a), self._inv(self.of_path(b)))
