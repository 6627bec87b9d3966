"""Algebras of finite equivalence relations and conditional expectations.

The algebra of a finite equivalence relation R on X is the set of matrices
supported on R: block-diagonal, one full matrix block per class, with the
canonical matrix units e(x,y) indexed by pairs in R.  An inclusion graph
(V, E, Vbar) with a point set X over V induces the bigger relation on
Xbar = {(x,a): the vertex of x is the source of a} classified by the range
of the edge; the inclusion j and the commutant embedding k identify the base
algebra and its relative commutant inside the big one.  A transition
probability on the edges defines the model conditional expectation
Q(f)(x,y) = sum over edges c out of the vertex of x of p(c) f(xc, yc), which
factors as a pinching onto the equal-edge subrelation followed by averaging.

Probabilities stay exact rationals; phases and states use complex doubles
with an explicit comparison tolerance.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    IncompatibleData,
    NotACocycle,
    NotAMatrixUnit,
    ShapeMismatch,
    SupportViolation,
)
from .rational import as_fraction


class FiniteEquivRelation:
    """Classes of a surjection r: X -> V; the relation is r(x) = r(y)."""

    def __init__(self, X: Sequence, V: Sequence, r: Mapping):
        self.X = tuple(X)
        self.V = tuple(V)
        if len(set(self.X)) != len(self.X):
            raise IncompatibleData("relation: duplicate elements in X")
        if len(set(self.V)) != len(self.V):
            raise IncompatibleData("relation: duplicate labels in V")
        self._r = {}
        vset = set(self.V)
        for x in self.X:
            if x not in r:
                raise IncompatibleData(f"relation: no label for element {x!r}")
            if r[x] not in vset:
                raise IncompatibleData(f"relation: label {r[x]!r} of {x!r} not in V")
            self._r[x] = r[x]
        fibers = {v: [] for v in self.V}
        for x in self.X:
            fibers[self._r[x]].append(x)
        for v in self.V:
            if not fibers[v]:
                raise IncompatibleData(f"relation: label {v!r} has an empty class")
        self._fibers = {v: tuple(xs) for v, xs in fibers.items()}

    @classmethod
    def from_partition(cls, blocks: Sequence[Sequence]) -> "FiniteEquivRelation":
        X, r = [], {}
        labels = [f"c{i}" for i in range(len(blocks))]
        for label, block in zip(labels, blocks):
            for x in block:
                X.append(x)
                r[x] = label
        return cls(X, labels, r)

    def label(self, x):
        if x not in self._r:
            raise IncompatibleData(f"relation: {x!r} not in X")
        return self._r[x]

    def related(self, x, y) -> bool:
        return x in self._r and y in self._r and self._r[x] == self._r[y]

    def class_of(self, x) -> tuple:
        return self._fibers[self.label(x)]

    def classes(self) -> tuple[tuple, ...]:
        return tuple(self._fibers[v] for v in self.V)

    def pairs(self):
        """All pairs of the relation, class by class, row-major within a class."""
        for cls_ in self.classes():
            for x in cls_:
                for y in cls_:
                    yield (x, y)

    @property
    def dimension(self) -> int:
        return sum(len(c) ** 2 for c in self.classes())

    def __len__(self):
        return len(self.X)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteEquivRelation)
            and self.X == other.X
            and self.V == other.V
            and self._r == other._r
        )

    def __hash__(self):
        return hash((self.X, self.V, tuple(sorted(self._r.items(), key=repr))))


@dataclass(frozen=True)
class AlgebraStructure:
    """Shape of the relation algebra: block sizes and total dimension."""

    dimension: int
    block_sizes: tuple[int, ...]
    classes: tuple[tuple, ...]


def algebra_of(rel: FiniteEquivRelation) -> AlgebraStructure:
    classes = rel.classes()
    return AlgebraStructure(
        dimension=sum(len(c) ** 2 for c in classes),
        block_sizes=tuple(len(c) for c in classes),
        classes=classes,
    )


class AlgebraElement:
    """A matrix supported on a finite equivalence relation, stored sparsely.

    Entries may be ints, Fractions, floats, or complex numbers; arithmetic
    keeps exact types exact and only widens where an operand forces it.
    """

    __slots__ = ("relation", "entries")

    def __init__(self, relation: FiniteEquivRelation, entries: Mapping):
        clean = {}
        for (x, y), v in entries.items():
            if not relation.related(x, y):
                raise ShapeMismatch(f"entry at ({x!r}, {y!r}) is outside the relation")
            if v == 0:
                continue
            clean[(x, y)] = v
        self.relation = relation
        self.entries = clean

    @classmethod
    def zero(cls, relation) -> "AlgebraElement":
        return cls(relation, {})

    def _same_relation(self, other: "AlgebraElement"):
        if self.relation is not other.relation and self.relation != other.relation:
            raise ShapeMismatch("elements live on different relations")

    def __add__(self, other):
        self._same_relation(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return AlgebraElement(self.relation, out)

    def __sub__(self, other):
        self._same_relation(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) - v
        return AlgebraElement(self.relation, out)

    def __neg__(self):
        return AlgebraElement(self.relation, {k: -v for k, v in self.entries.items()})

    def scale(self, scalar):
        return AlgebraElement(self.relation, {k: scalar * v for k, v in self.entries.items()})

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        self._same_relation(other)
        rows: dict = {}
        for (y, z), v in other.entries.items():
            rows.setdefault(y, []).append((z, v))
        out: dict = {}
        for (x, y), u in self.entries.items():
            for z, v in rows.get(y, ()):
                key = (x, z)
                out[key] = out.get(key, 0) + u * v
        return AlgebraElement(self.relation, out)

    def __rmul__(self, scalar):
        return self.scale(scalar)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(
            self.relation, {(y, x): v.conjugate() for (x, y), v in self.entries.items()}
        )

    def trace(self):
        return sum((v for (x, y), v in self.entries.items() if x == y), 0)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0)

    def distance(self, other: "AlgebraElement") -> float:
        return (self - other).max_abs()

    def isclose(self, other: "AlgebraElement", tol: float = 1e-9) -> bool:
        return self.distance(other) <= tol

    def to_dense(self, index: Mapping | None = None) -> np.ndarray:
        """Dense |X| x |X| complex matrix (for oracles and eigensolvers)."""
        if index is None:
            index = {x: i for i, x in enumerate(self.relation.X)}
        out = np.zeros((len(index), len(index)), dtype=complex)
        for (x, y), v in self.entries.items():
            out[index[x], index[y]] = complex(v)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and self.relation == other.relation
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    def __repr__(self):
        return f"AlgebraElement({len(self.entries)} entries on {len(self.relation)} points)"


def matrix_unit(rel: FiniteEquivRelation, x, y) -> AlgebraElement:
    if not rel.related(x, y):
        raise IncompatibleData(f"({x!r}, {y!r}) is not in the relation")
    return AlgebraElement(rel, {(x, y): 1})


def identity_element(rel: FiniteEquivRelation) -> AlgebraElement:
    return AlgebraElement(rel, {(x, x): 1 for x in rel.X})


def canonical_units(rel: FiniteEquivRelation) -> dict:
    return {(x, y): matrix_unit(rel, x, y) for (x, y) in rel.pairs()}


class InclusionGraph:
    """A one-floor graph (V, E, Vbar) with a point set X lying over V.

    vertex_of: X -> V, source_of: E -> V, range_of: E -> Vbar, all surjective.
    The derived point set Xbar consists of the composable pairs (x, e) with
    vertex_of(x) = source_of(e), ordered X-major then E within x.
    """

    def __init__(self, X, V, E, Vbar, vertex_of: Mapping, source_of: Mapping, range_of: Mapping):
        self.X = tuple(X)
        self.V = tuple(V)
        self.E = tuple(E)
        self.Vbar = tuple(Vbar)
        self.vertex_of = dict(vertex_of)
        self.source_of = dict(source_of)
        self.range_of = dict(range_of)
        for name, domain, mapping, codomain in (
            ("vertex_of", self.X, self.vertex_of, self.V),
            ("source_of", self.E, self.source_of, self.V),
            ("range_of", self.E, self.range_of, self.Vbar),
        ):
            cod = set(codomain)
            for a in domain:
                if a not in mapping:
                    raise IncompatibleData(f"inclusion graph: {name} has no value at {a!r}")
                if mapping[a] not in cod:
                    raise IncompatibleData(
                        f"inclusion graph: {name}({a!r}) = {mapping[a]!r} is not a valid target"
                    )
            missing = cod - {mapping[a] for a in domain}
            if missing:
                raise IncompatibleData(
                    f"inclusion graph: {name} is not surjective; {sorted(map(repr, missing))[0]} is not hit"
                )
        self.Xbar = tuple(
            (x, e) for x in self.X for e in self.E if self.vertex_of[x] == self.source_of[e]
        )
        self._base = None
        self._big = None
        self._commutant = None
        self._pinched = None

    def fiber(self, v) -> tuple:
        return tuple(x for x in self.X if self.vertex_of[x] == v)

    def out_edges(self, v) -> tuple:
        return tuple(e for e in self.E if self.source_of[e] == v)

    def base_relation(self) -> FiniteEquivRelation:
        if self._base is None:
            self._base = FiniteEquivRelation(self.X, self.V, self.vertex_of)
        return self._base

    def big_relation(self) -> FiniteEquivRelation:
        """Relation on Xbar: (x,a) ~ (y,b) iff the edges share their range."""
        if self._big is None:
            self._big = FiniteEquivRelation(
                self.Xbar, self.Vbar, {(x, e): self.range_of[e] for (x, e) in self.Xbar}
            )
        return self._big

    def commutant_relation(self) -> FiniteEquivRelation:
        """Relation on E: parallel edges (same source and same range)."""
        if self._commutant is None:
            labels = []
            for e in self.E:
                lab = (self.source_of[e], self.range_of[e])
                if lab not in labels:
                    labels.append(lab)
            self._commutant = FiniteEquivRelation(
                self.E, labels, {e: (self.source_of[e], self.range_of[e]) for e in self.E}
            )
        return self._commutant

    def pinched_relation(self) -> FiniteEquivRelation:
        """Subrelation of the big one with equal edge coordinates."""
        if self._pinched is None:
            self._pinched = FiniteEquivRelation(
                self.Xbar, self.E, {(x, e): e for (x, e) in self.Xbar}
            )
        return self._pinched


def include_j(g: InclusionGraph, f: AlgebraElement) -> AlgebraElement:
    """j(f)(xa, yb) = f(x,y) when a = b, else 0: the unital inclusion."""
    if f.relation != g.base_relation():
        raise ShapeMismatch("include_j wants an element over the graph's base relation")
    out = {}
    for (x, y), v in f.entries.items():
        for e in g.out_edges(g.vertex_of[x]):
            out[((x, e), (y, e))] = v
    return AlgebraElement(g.big_relation(), out)


def commutant_embed_k(g: InclusionGraph, h: AlgebraElement) -> AlgebraElement:
    """k(h)(xa, yb) = h(a,b) when x = y, else 0: onto the relative commutant."""
    if h.relation != g.commutant_relation():
        raise ShapeMismatch("commutant_embed_k wants an element over the parallel-edge relation")
    out = {}
    for (a, b), v in h.entries.items():
        for x in g.fiber(g.source_of[a]):
            out[((x, a), (x, b))] = v
    return AlgebraElement(g.big_relation(), out)


def expectation_map(g: InclusionGraph, p: Mapping, fbar: AlgebraElement) -> AlgebraElement:
    """Raw Q(f)(x,y) = sum of p(c) f(xc, yc); no validation of p."""
    if fbar.relation != g.big_relation():
        raise ShapeMismatch("expectation wants an element over the graph's big relation")
    out: dict = {}
    for ((x, a), (y, b)), v in fbar.entries.items():
        if a == b:
            key = (x, y)
            out[key] = out.get(key, 0) + p[a] * v
    return AlgebraElement(g.base_relation(), out)


class ModelExpectation:
    """The expectation defined by a transition probability on the edges."""

    def __init__(self, g: InclusionGraph, p: Mapping):
        self.graph = g
        vals = {}
        for e in g.E:
            if e not in p:
                raise IncompatibleData(f"transition probability: no value for edge {e!r}")
            vals[e] = as_fraction(p[e])
            if vals[e] <= 0:
                raise SupportViolation(f"transition probability: p({e!r}) = {vals[e]} is not positive")
        for v in g.V:
            total = sum(vals[e] for e in g.out_edges(v))
            if total != 1:
                raise SupportViolation(
                    f"transition probability: edges out of {v!r} sum to {total}, not 1"
                )
        self.p = vals

    def __call__(self, fbar: AlgebraElement) -> AlgebraElement:
        return expectation_map(self.graph, self.p, fbar)

    def as_endomorphism(self) -> Callable[[AlgebraElement], AlgebraElement]:
        """Q followed by j: the expectation as a map of the big algebra."""
        return lambda fbar: include_j(self.graph, self(fbar))

    def epsilon(self, c) -> AlgebraElement:
        """The projection eps(c) = sum over x with vertex s(c) of e(xc, xc)."""
        g = self.graph
        if c not in g.source_of:
            raise IncompatibleData(f"no edge {c!r}")
        return AlgebraElement(
            g.big_relation(), {((x, c), (x, c)): 1 for x in g.fiber(g.source_of[c])}
        )

    def subalgebra_basis(self) -> list[AlgebraElement]:
        """The j-images of the canonical units of the base relation."""
        base = self.graph.base_relation()
        return [include_j(self.graph, matrix_unit(base, x, y)) for (x, y) in base.pairs()]


@dataclass
class ExpectationReport:
    """Outcome of the conditional-expectation axiom checks."""

    unital: bool = True
    idempotent: bool = True
    range_in_subalgebra: bool = True
    bimodular: bool = True
    positive: bool = True
    faithful: bool = True
    failures: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return (
            self.unital
            and self.idempotent
            and self.range_in_subalgebra
            and self.bimodular
            and self.positive
            and self.faithful
        )

    def _fail(self, which: str, message: str):
        setattr(self, which, False)
        if len(self.failures) < 8:
            self.failures.append(f"{which}: {message}")


def verify_expectation(
    Q: Callable[[AlgebraElement], AlgebraElement],
    ambient: FiniteEquivRelation,
    sub_basis: Sequence[AlgebraElement],
    tol: float = 1e-9,
    rng: random.Random | None = None,
) -> ExpectationReport:
    """Check the conditional-expectation axioms for an endomorphism Q.

    Q must map the ambient relation algebra to itself; sub_basis spans the
    target subalgebra.  Checks: unitality, idempotence, range inside the span
    of sub_basis, left/right module property over sub_basis (which gives the
    two-sided version by composing the one-sided identities), positivity of
    Q(f*f) on random f, and faithfulness via positive definiteness of the
    class Gram matrices t(u,v) = trace Q(e(u,v)).
    """
    rng = rng or random.Random(7)
    report = ExpectationReport()
    one = identity_element(ambient)
    if Q(one).distance(one) > tol:
        report._fail("unital", f"Q(1) differs from 1 by {Q(one).distance(one):.3g}")

    units = [matrix_unit(ambient, x, y) for (x, y) in ambient.pairs()]
    images = [Q(u) for u in units]
    for u, img in zip(units, images):
        d = Q(img).distance(img)
        if d > tol:
            report._fail("idempotent", f"Q^2 != Q at unit {next(iter(u.entries))}: off by {d:.3g}")
            break

    # range: project each image on the orthonormalized span of sub_basis
    index = {pair: i for i, pair in enumerate(ambient.pairs())}
    dim = len(index)
    basis_mat = np.zeros((dim, len(sub_basis)), dtype=complex)
    for jcol, m in enumerate(sub_basis):
        for k, v in m.entries.items():
            basis_mat[index[k], jcol] = complex(v)
    if len(sub_basis):
        u_mat, svals, _ = np.linalg.svd(basis_mat, full_matrices=False)
        keep = svals > 1e-12 * max(1.0, float(svals[0]))
        u_mat = u_mat[:, keep]
    else:
        u_mat = np.zeros((dim, 0), dtype=complex)
    for u, img in zip(units, images):
        if not img.entries:
            continue
        vec = np.zeros(dim, dtype=complex)
        for k, v in img.entries.items():
            vec[index[k]] = complex(v)
        # explicit residual vector; the norm-difference form cancels badly
        resid = vec - u_mat @ (u_mat.conj().T @ vec)
        resid2 = float(np.vdot(resid, resid).real)
        norm2 = float(np.vdot(vec, vec).real)
        if resid2 > tol * tol * max(1.0, norm2):
            report._fail(
                "range_in_subalgebra",
                f"Q(unit {next(iter(u.entries))}) leaves the subalgebra span "
                f"(residual {resid2 ** 0.5:.3g})",
            )
            break

    for m in sub_basis:
        bad = None
        for u, img in zip(units, images):
            left = Q(m * u).distance(m * img)
            if left > tol:
                bad = f"Q(m f) != m Q(f), off by {left:.3g}"
                break
            right = Q(u * m).distance(img * m)
            if right > tol:
                bad = f"Q(f m) != Q(f) m, off by {right:.3g}"
                break
        if bad:
            report._fail("bimodular", bad)
            break

    classes = ambient.classes()
    np_rng = np.random.default_rng(rng.getrandbits(32))
    for _ in range(3):
        entries: dict = {}
        for cls_ in classes:
            n = len(cls_)
            block = np_rng.standard_normal((n, n)) + 1j * np_rng.standard_normal((n, n))
            gram = block.conj().T @ block
            for i, x in enumerate(cls_):
                for j, y in enumerate(cls_):
                    entries[(x, y)] = gram[i, j]
        image = Q(AlgebraElement(ambient, entries))
        scale = max(1.0, image.max_abs())
        for cls_ in classes:
            n = len(cls_)
            block = np.zeros((n, n), dtype=complex)
            pos = {x: i for i, x in enumerate(cls_)}
            for (x, y), v in image.entries.items():
                if x in pos and y in pos:
                    block[pos[x], pos[y]] = complex(v)
            sym_err = float(np.max(np.abs(block - block.conj().T))) if n else 0.0
            if sym_err > tol * scale:
                report._fail("positive", f"Q(f*f) not self-adjoint (off by {sym_err:.3g})")
                break
            low = float(np.min(np.linalg.eigvalsh((block + block.conj().T) / 2))) if n else 0.0
            if low < -tol * scale:
                report._fail("positive", f"Q(f*f) has a negative eigenvalue {low:.3g}")
                break
        if not report.positive:
            break

    for cls_ in classes:
        n = len(cls_)
        gram = np.zeros((n, n), dtype=complex)
        for i, x in enumerate(cls_):
            for j, y in enumerate(cls_):
                gram[i, j] = complex(Q(matrix_unit(ambient, x, y)).trace())
        asym = float(np.max(np.abs(gram - gram.conj().T)))
        if asym > tol * max(1.0, float(np.max(np.abs(gram)))):
            report._fail("faithful", f"trace form not hermitian (off by {asym:.3g})")
            break
        low = float(np.min(np.linalg.eigvalsh((gram + gram.conj().T) / 2)))
        if low <= tol:
            report._fail(
                "faithful",
                f"trace form on class of {cls_[0]!r} is not positive definite (min eig {low:.3g})",
            )
            break
    return report


def extract_transition(
    Q: Callable[[AlgebraElement], AlgebraElement], g: InclusionGraph
) -> dict:
    """Recover p from Q(eps(c)) = p(c) times the unit of the block at s(c).

    Q may be given in base form (values over the base relation) or as the
    endomorphism of the big algebra; entries must be exact (ints/Fractions)
    for the read-off to stay exact.
    """
    base = g.base_relation()
    big = g.big_relation()
    p: dict = {}
    for c in g.E:
        v = g.source_of[c]
        eps = AlgebraElement(big, {((x, c), (x, c)): 1 for x in g.fiber(v)})
        img = Q(eps)
        if img.relation == base:
            target = AlgebraElement(base, {(x, x): 1 for x in g.fiber(v)})
        elif img.relation == big:
            target = include_j(g, AlgebraElement(base, {(x, x): 1 for x in g.fiber(v)}))
        else:
            raise ShapeMismatch("Q must produce elements over the base or the big relation")
        if not img.entries:
            raise SupportViolation(f"extracted p({c!r}) = 0: the expectation is not faithful")
        for val in img.entries.values():
            if not isinstance(val, (int, Fraction)):
                raise IncompatibleData(
                    f"Q(eps({c!r})) has non-exact entries; extraction needs exact arithmetic"
                )
        first = next(iter(target.entries))
        scalar = Fraction(img.entries.get(first, 0))
        if img != target.scale(scalar):
            raise IncompatibleData(
                f"Q(eps({c!r})) is not proportional to the unit of the block at {v!r}"
            )
        if scalar <= 0:
            raise SupportViolation(f"extracted p({c!r}) = {scalar}: the expectation is not faithful")
        p[c] = scalar
    for v in g.V:
        total = sum(p[c] for c in g.out_edges(v))
        if total != 1:
            raise IncompatibleData(
                f"extracted transitions out of {v!r} sum to {total}, not 1"
            )
    return p


def pinch_average_decompose(me: ModelExpectation):
    """Split Q into the pinching by the eps(c) and the p-average.

    The pinching keeps exactly the equal-edge entries (the subrelation where
    both points carry the same edge); the averaging applies p and drops the
    edge coordinate.  Their composite equals Q entry by entry.
    """
    g, p = me.graph, me.p
    big = g.big_relation()
    base = g.base_relation()

    def pinch(fbar: AlgebraElement) -> AlgebraElement:
        if fbar.relation != big:
            raise ShapeMismatch("pinching wants an element over the big relation")
        return AlgebraElement(
            big, {k: v for k, v in fbar.entries.items() if k[0][1] == k[1][1]}
        )

    def average(fbar: AlgebraElement) -> AlgebraElement:
        if fbar.relation != big:
            raise ShapeMismatch("averaging wants an element over the big relation")
        out: dict = {}
        for ((x, a), (y, b)), v in fbar.entries.items():
            if a != b:
                raise ShapeMismatch(
                    "averaging applies to pinched elements (equal edge coordinates)"
                )
            key = (x, y)
            out[key] = out.get(key, 0) + p[a] * v
        return AlgebraElement(base, out)

    return pinch, average


@dataclass(frozen=True)
class TorusCocycle:
    """Unit-modulus values on the pairs of a relation, multiplicative along
    triples within a class."""

    relation: FiniteEquivRelation
    values: Mapping

    def __call__(self, x, y):
        return self.values[(x, y)]


def trivialize_cocycle(tc: TorusCocycle, tol: float = 1e-9) -> dict:
    """Write c(x,y) = b(x) conj(b(y)) with b = 1 at each class representative.

    The representative is the smallest element of the class, so the output is
    deterministic.  Identity violations raise with a witness pair or triple.
    """
    rel = tc.relation
    for cls_ in rel.classes():
        for x in cls_:
            for y in cls_:
                if (x, y) not in tc.values:
                    raise NotACocycle(f"no value for pair ({x!r}, {y!r})")
                v = complex(tc.values[(x, y)])
                if abs(abs(v) - 1) > tol:
                    raise NotACocycle(f"value at ({x!r}, {y!r}) has modulus {abs(v):.6g}, not 1")
        for x in cls_:
            if abs(complex(tc.values[(x, x)]) - 1) > tol:
                raise NotACocycle(f"value at ({x!r}, {x!r}) is not 1")
        for x in cls_:
            for y in cls_:
                if abs(complex(tc.values[(x, y)]) - complex(tc.values[(y, x)]).conjugate()) > tol:
                    raise NotACocycle(f"values at ({x!r}, {y!r}) and ({y!r}, {x!r}) are not conjugate")
        for x in cls_:
            for y in cls_:
                for z in cls_:
                    lhs = complex(tc.values[(x, y)]) * complex(tc.values[(y, z)])
                    if abs(lhs - complex(tc.values[(x, z)])) > tol:
                        raise NotACocycle(
                            f"multiplicativity fails on ({x!r}, {y!r}, {z!r})"
                        )
    b = {}
    for cls_ in rel.classes():
        rep = min(cls_)
        for x in cls_:
            b[x] = complex(tc.values[(x, rep)])
    return b


def extend_matrix_unit(
    rel: FiniteEquivRelation,
    sub: FiniteEquivRelation,
    partial: Mapping,
    reference: Mapping | None = None,
    tol: float = 1e-9,
) -> dict:
    """Extend a partial matrix unit on a subrelation to all of ``rel``.

    ``sub`` must refine ``rel`` on the same points; ``partial`` maps each pair
    of ``sub`` to an AlgebraElement that is a unit-modulus multiple of the
    reference unit at that pair (the reference defaults to the canonical
    units).  The comparison phases form a cocycle on ``sub``; trivializing it
    gives b, and the extension is b(x) conj(b(y)) times the reference, with
    the original elements kept verbatim on ``sub``.
    """
    if tuple(sub.X) != tuple(rel.X):
        raise IncompatibleData("subrelation must live on the same ordered point set")
    for x in rel.X:
        for y in sub.class_of(x):
            if not rel.related(x, y):
                raise IncompatibleData(
                    f"subrelation relates ({x!r}, {y!r}) which the full relation does not"
                )
    reference = dict(reference) if reference is not None else canonical_units(rel)
    for pair in rel.pairs():
        if pair not in reference:
            raise NotAMatrixUnit(f"reference units missing pair {pair!r}")
    for cls_ in rel.classes():
        for x in cls_:
            for y in cls_:
                for z in cls_:
                    prod = reference[(x, y)] * reference[(y, z)]
                    if prod.distance(reference[(x, z)]) > tol:
                        raise NotAMatrixUnit(
                            f"reference units break composition at ({x!r}, {y!r}, {z!r})"
                        )
                if reference[(x, y)].adjoint().distance(reference[(y, x)]) > tol:
                    raise NotAMatrixUnit(
                        f"reference units break adjoints at ({x!r}, {y!r})"
                    )

    phases = {}
    for cls_ in sub.classes():
        for x in cls_:
            for y in cls_:
                if (x, y) not in partial:
                    raise NotAMatrixUnit(f"partial units missing pair ({x!r}, {y!r})")
                u = partial[(x, y)]
                ref = reference[(x, y)]
                denom = sum(abs(v) ** 2 for v in ref.entries.values())
                num = sum(
                    u.entries.get(k, 0) * complex(v).conjugate() for k, v in ref.entries.items()
                )
                scalar = complex(num) / denom
                if u.distance(ref.scale(scalar)) > tol:
                    raise NotAMatrixUnit(
                        f"partial unit at ({x!r}, {y!r}) is not a scalar multiple of the reference"
                    )
                if abs(abs(scalar) - 1) > tol:
                    raise NotAMatrixUnit(
                        f"partial unit at ({x!r}, {y!r}) scales the reference by {abs(scalar):.6g}, not 1"
                    )
                phases[(x, y)] = scalar
        for x in cls_:
            for y in cls_:
                for z in cls_:
                    prod = partial[(x, y)] * partial[(y, z)]
                    if prod.distance(partial[(x, z)]) > tol:
                        raise NotAMatrixUnit(
                            f"partial units break composition at ({x!r}, {y!r}, {z!r})"
                        )
                if partial[(x, y)].adjoint().distance(partial[(y, x)]) > tol:
                    raise NotAMatrixUnit(f"partial units break adjoints at ({x!r}, {y!r})")

    b = trivialize_cocycle(TorusCocycle(sub, phases), tol=tol)
    out = {}
    for (x, y) in rel.pairs():
        if sub.related(x, y):
            out[(x, y)] = partial[(x, y)]
        else:
            out[(x, y)] = reference[(x, y)].scale(b[x] * b[y].conjugate())
    return out


@dataclass(frozen=True, eq=False)
class DiagonalizedState:
    """Descending eigenvalues and an orthonormal eigenbasis of a density
    matrix, with the verified error of the diagonal factorization."""

    eigenvalues: np.ndarray
    basis: np.ndarray
    factorization_error: float

    def reconstruct(self) -> np.ndarray:
        return self.basis @ np.diag(self.eigenvalues) @ self.basis.conj().T


def diagonalize_state(density, tol: float = 1e-9) -> DiagonalizedState:
    """Eigenbasis of a faithful state on one matrix block.

    In the returned basis the state is diagonal, so it factors through the
    diagonal compression; the factorization is verified on random inputs and
    the observed error is reported.  Deterministic conventions: eigenvalues
    descend, and each eigenvector's first nonnegligible component is made
    real positive.
    """
    rho = np.asarray(density, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeMismatch(f"density matrix must be square, got shape {rho.shape}")
    n = rho.shape[0]
    if n > 12:
        raise ShapeMismatch(f"density matrices above size 12 are not supported (got {n})")
    if float(np.max(np.abs(rho - rho.conj().T))) > tol:
        raise IncompatibleData("density matrix is not hermitian")
    if abs(complex(np.trace(rho)) - 1) > tol:
        raise IncompatibleData(f"density matrix has trace {complex(np.trace(rho)):.6g}, not 1")
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    if float(vals[-1]) <= tol:
        raise SupportViolation(
            f"density matrix is not positive definite (min eigenvalue {float(vals[-1]):.3g}); "
            "the state is not faithful"
        )
    for j in range(n):
        col = vecs[:, j]
        for i in range(n):
            if abs(col[i]) > 1e-12:
                phase = col[i] / abs(col[i])
                vecs[:, j] = col / phase
                break
    err = 0.0
    probe = np.random.default_rng(0)
    for _ in range(4):
        a = probe.standard_normal((n, n)) + 1j * probe.standard_normal((n, n))
        direct = complex(np.trace(rho @ a))
        compressed = complex(
            sum(
                vals[i] * (vecs[:, i].conj() @ a @ vecs[:, i])
                for i in range(n)
            )
        )
        err = max(err, abs(direct - compressed))
    return DiagonalizedState(eigenvalues=vals, basis=vecs, factorization_error=err)


def brute_force_commutant(
    generators: Sequence[AlgebraElement], ambient: FiniteEquivRelation | None = None
) -> list[AlgebraElement]:
    """Basis of everything in the ambient algebra commuting with the inputs.

    Solves the stacked linear system [m, g] = 0 over the pairs of the ambient
    relation via an SVD null space; intended as an oracle, not for large
    relations.
    """
    if ambient is None:
        if not generators:
            raise IncompatibleData("need generators or an explicit ambient relation")
        ambient = generators[0].relation
    pairs = list(ambient.pairs())
    index = {pair: i for i, pair in enumerate(pairs)}
    dim = len(pairs)
    rows = []
    for gen in generators:
        if gen.relation != ambient:
            raise ShapeMismatch("generators must live on the ambient relation")
        # equation per pair (x,z): (m g - g m)(x,z) = 0, driven by g's support
        eqs: dict = {}
        for (y, z), v in gen.entries.items():
            for x in ambient.class_of(y):
                d = eqs.setdefault((x, z), {})
                d[(x, y)] = d.get((x, y), 0) + complex(v)
        for (x, y), v in gen.entries.items():
            for z in ambient.class_of(y):
                d = eqs.setdefault((x, z), {})
                d[(y, z)] = d.get((y, z), 0) - complex(v)
        for coeffs in eqs.values():
            row = np.zeros(dim, dtype=complex)
            for pair, c in coeffs.items():
                row[index[pair]] = c
            if np.any(row):
                rows.append(row)
    if not rows:
        mat = np.zeros((1, dim), dtype=complex)
    else:
        mat = np.array(rows)
    _, svals, vh = np.linalg.svd(mat)
    cutoff = 1e-9 * max(1.0, float(svals[0]) if len(svals) else 1.0)
    null_rows = [vh[i] for i in range(vh.shape[0]) if i >= len(svals) or svals[i] <= cutoff]
    basis = []
    for vec in null_rows:
        entries = {pair: vec[i] for pair, i in index.items() if abs(vec[i]) > 1e-13}
        basis.append(AlgebraElement(ambient, entries))
    return basis
