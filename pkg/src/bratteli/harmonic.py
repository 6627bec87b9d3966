"""Bounded harmonic sequences and the finite-depth tail boundary.

A harmonic sequence assigns a rational to every vertex so that each value is
the p-expectation of the next level: h_{n-1}(v) = sum over out-edges e of v
of p_n(e) h_n(r(e)).  At finite depth these sequences are in linear bijection
with functions of the terminal vertex, which are exactly the tail-invariant
functions of the truncated path space; the bijection is implemented here
together with the induced measures h mu and the ergodic decomposition by
terminal vertex.  The infinite-depth statements are the projective limit of
what this module verifies exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .diagram import BratteliDiagram, FinitePath, enumerate_paths, subdiagram
from .errors import NotAMeasure, NotHarmonic, ShapeMismatch
from .rational import as_fraction
from .walk import RandomWalk, build_walk, cylinder_measure


def _aligned_levels(d: BratteliDiagram, levels, what: str) -> tuple[dict, ...]:
    levels = list(levels)
    if len(levels) != d.depth + 1:
        raise ShapeMismatch(
            f"{what}: got {len(levels)} levels of values, diagram has {d.depth + 1} vertex levels"
        )
    rows = []
    for n, mapping in enumerate(levels):
        vs = d.vertices(n)
        unknown = set(mapping) - set(vs)
        if unknown:
            raise ShapeMismatch(f"{what}: unknown vertex '{sorted(unknown)[0]}' at level {n}")
        row = {}
        for v in vs:
            if v not in mapping:
                raise ShapeMismatch(f"{what}: no value for vertex '{v}' at level {n}")
            row[v] = as_fraction(mapping[v])
        rows.append(row)
    return tuple(rows)


class HarmonicSequence:
    """Per-level rational functions on the vertices, levels 0..N."""

    def __init__(self, d: BratteliDiagram, levels: Sequence[Mapping[str, object]]):
        d.require_valid()
        self.diagram = d
        self._h = _aligned_levels(d, levels, "harmonic sequence")

    def __call__(self, n: int, vertex_id: str) -> Fraction:
        self.diagram.vertex_index(n, vertex_id)
        return self._h[n][vertex_id]

    def level(self, n: int) -> dict[str, Fraction]:
        self.diagram.vertices(n)
        return dict(self._h[n])

    @property
    def norm(self) -> Fraction:
        """Sup over levels of the max absolute value."""
        return max(abs(x) for row in self._h for x in row.values())

    def __eq__(self, other):
        return (
            isinstance(other, HarmonicSequence)
            and self.diagram is other.diagram
            and self._h == other._h
        )

    def __hash__(self):
        return hash(tuple(tuple(sorted(row.items())) for row in self._h))


@dataclass(frozen=True)
class InvariantFunction:
    """A tail-invariant function in canonical form: a function of the terminal
    vertex, inducing f(path) = values[r(path)] on full-depth paths."""

    depth: int
    values: Mapping[str, Fraction]

    def of_path(self, a: FinitePath) -> Fraction:
        if a.end_level - 0 != self.depth or a.start_level != 0:
            raise ShapeMismatch("invariant function applies to full-depth paths from level 0")
        return self.values[a.terminus]


@dataclass(frozen=True)
class HarmonicCheck:
    """Outcome of the recursion check; falsy when some step fails.  ``level``
    is the recursion step n whose expectation was compared, ``vertex`` the
    level-(n-1) vertex where lhs != rhs."""

    ok: bool
    level: int | None = None
    vertex: str | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None

    def __bool__(self):
        return self.ok


def is_harmonic(w: RandomWalk, h) -> HarmonicCheck:
    """Exact check of h_{n-1}(v) = sum p_n(e) h_n(r(e)) at every vertex."""
    if not isinstance(h, HarmonicSequence):
        h = HarmonicSequence(w.diagram, h)
    d = w.diagram
    for n in range(1, d.depth + 1):
        for v in d.vertices(n - 1):
            rhs = sum(w.p(n, e.id) * h(n, e.rng) for e in d.out_edges(n - 1, v))
            lhs = h(n - 1, v)
            if lhs != rhs:
                return HarmonicCheck(False, n, v, lhs, rhs)
    return HarmonicCheck(True)


def harmonic_from_terminal(w: RandomWalk, terminal: Mapping[str, object]) -> HarmonicSequence:
    """Backward induction from values on V(N); linear in the terminal data."""
    d = w.diagram
    levels: list[dict] = [None] * (d.depth + 1)
    bottom = {}
    for v in d.vertices(d.depth):
        if v not in terminal:
            raise ShapeMismatch(f"terminal data: no value for vertex '{v}'")
        bottom[v] = as_fraction(terminal[v])
    unknown = set(terminal) - set(d.vertices(d.depth))
    if unknown:
        raise ShapeMismatch(f"terminal data: unknown vertex '{sorted(unknown)[0]}'")
    levels[d.depth] = bottom
    for n in range(d.depth, 0, -1):
        prev = {}
        for v in d.vertices(n - 1):
            prev[v] = sum(w.p(n, e.id) * levels[n][e.rng] for e in d.out_edges(n - 1, v))
        levels[n - 1] = prev
    return HarmonicSequence(d, levels)


def invariant_to_harmonic(w: RandomWalk, f: InvariantFunction) -> HarmonicSequence:
    """h_n(v) = expectation of f(terminal) given position v at time n."""
    if f.depth != w.depth:
        raise ShapeMismatch(f"invariant function depth {f.depth} != diagram depth {w.depth}")
    return harmonic_from_terminal(w, f.values)


def harmonic_to_invariant(w: RandomWalk, h) -> InvariantFunction:
    """At finite depth the limit along the path is just the terminal value."""
    if not isinstance(h, HarmonicSequence):
        h = HarmonicSequence(w.diagram, h)
    check = is_harmonic(w, h)
    if not check:
        raise NotHarmonic(
            f"recursion fails at step {check.level}, vertex '{check.vertex}': "
            f"{check.lhs} != {check.rhs}"
        )
    return InvariantFunction(w.depth, h.level(w.depth))


def measure_from_harmonic(w: RandomWalk, h) -> dict[FinitePath, Fraction]:
    """The measure with the walk's cotransition and distributions h_n nu_n.

    Returns the full cylinder table: mass h_n(r(a)) mu(Z(a)) on each path a of
    length n.  At full depth this is f mu for f the terminal function of h.
    """
    if not isinstance(h, HarmonicSequence):
        h = HarmonicSequence(w.diagram, h)
    check = is_harmonic(w, h)
    if not check:
        raise NotHarmonic(
            f"recursion fails at step {check.level}, vertex '{check.vertex}': "
            f"{check.lhs} != {check.rhs}"
        )
    d = w.diagram
    for n in range(d.depth + 1):
        for v in d.vertices(n):
            if h(n, v) < 0:
                raise NotAMeasure(
                    f"harmonic sequence is negative at level {n}, vertex '{v}': {h(n, v)}"
                )
    table = {}
    for n in range(d.depth + 1):
        for a in enumerate_paths(d, 0, n):
            table[a] = h(n, a.terminus) * cylinder_measure(w, a)
    return table


@dataclass(frozen=True)
class ErgodicComponent:
    """One piece of the decomposition: the conditioned walk given that the
    path ends at ``terminal``, carrying mass ``weight`` = nu_N(terminal)."""

    terminal: str
    weight: Fraction
    walk: RandomWalk

    def cylinder_measure(self, a: FinitePath) -> Fraction:
        """Component mass of a path of the ORIGINAL diagram (0 off support)."""
        if not self.walk.diagram.contains_path(a):
            return Fraction(0)
        return cylinder_measure(self.walk, self.walk.diagram.path(a.edges, 0, a.anchor))


def ergodic_components(w: RandomWalk) -> list[ErgodicComponent]:
    """Decomposition of the walk's measure over terminal vertices.

    Each component is the Doob transform by the harmonic extension g of the
    terminal indicator: p*(e) = p(e) g_n(r(e)) / g_{n-1}(s(e)) on the
    subdiagram where g > 0.  Components have point-mass terminal
    distributions and recombine to the original measure cylinder by cylinder.
    """
    d = w.diagram
    out = []
    for target in d.vertices(d.depth):
        weight = w.nu_at(d.depth, target)
        if weight == 0:
            continue
        g = harmonic_from_terminal(w, {v: 1 if v == target else 0 for v in d.vertices(d.depth)})
        keep_vertices = [
            {v for v in d.vertices(n) if g(n, v) > 0} for n in range(d.depth + 1)
        ]
        keep_edges = [
            {e.id for e in d.edges(n) if g(n, e.rng) > 0} for n in range(1, d.depth + 1)
        ]
        sub = subdiagram(d, keep_vertices, keep_edges)
        p_values = []
        for n in range(1, d.depth + 1):
            p_values.append(
                {
                    e.id: w.p(n, e.id) * g(n, e.rng) / g(n - 1, e.src)
                    for e in sub.edges(n)
                }
            )
        nu0 = {v: w.initial(v) * g(0, v) / weight for v in sub.vertices(0)}
        out.append(ErgodicComponent(target, weight, build_walk(sub, p_values, nu0)))
    return out
