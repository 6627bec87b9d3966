"""Shared generators and oracles for the test suite.

Random objects are built from a caller-supplied random.Random so every test
is reproducible; oracles are deliberately naive (explicit enumeration, dense
linear algebra) and independent of the library's own shortcuts.
"""

from fractions import Fraction

import numpy as np

from bratteli import (
    AlgebraElement,
    BratteliDiagram,
    InclusionGraph,
    build_walk,
    count_paths,
)


def random_diagram(rng, max_depth=6, max_vertices=4, max_out=3):
    """A random valid diagram: every vertex emits and receives edges, and no
    vertex emits more than ``max_out``."""
    depth = rng.randint(1, max_depth)
    sizes = [rng.randint(1, max_vertices)]
    for _ in range(depth):
        # reception needs at most max_out targets per source
        sizes.append(rng.randint(1, min(max_vertices, sizes[-1] * max_out)))
    vertices = [[f"v{n}_{i}" for i in range(size)] for n, size in enumerate(sizes)]
    edges = []
    for n in range(1, depth + 1):
        sources = vertices[n - 1]
        targets = vertices[n]
        degree = {v: 0 for v in sources}
        pairs = []
        for w in targets:  # cover reception first
            open_sources = [v for v in sources if degree[v] < max_out]
            v = rng.choice(open_sources)
            degree[v] += 1
            pairs.append((v, w))
        for v in sources:  # then emission
            if degree[v] == 0:
                degree[v] += 1
                pairs.append((v, rng.choice(targets)))
        for v in sources:  # then optional extras, multi-edges included
            while degree[v] < max_out and rng.random() < 0.35:
                degree[v] += 1
                pairs.append((v, rng.choice(targets)))
        edges.append(
            [(f"e{n}_{i}", v, w) for i, (v, w) in enumerate(sorted(pairs))]
        )
    return BratteliDiagram(vertices, edges)


def random_simplex(rng, keys):
    """Positive rationals over ``keys`` summing to 1 (small denominators)."""
    weights = {k: rng.randint(1, 9) for k in keys}
    total = sum(weights.values())
    return {k: Fraction(w, total) for k, w in weights.items()}


def random_walk_on(rng, d):
    p_levels = []
    for n in range(1, d.depth + 1):
        row = {}
        for v in d.vertices(n - 1):
            row.update(random_simplex(rng, [e.id for e in d.out_edges(n - 1, v)]))
        p_levels.append(row)
    nu0 = random_simplex(rng, d.vertices(0))
    return build_walk(d, p_levels, nu0)


def random_walk(rng, max_depth=6, max_vertices=4, max_out=3):
    return random_walk_on(rng, random_diagram(rng, max_depth, max_vertices, max_out))


def random_walk_with_multipath(rng, max_depth=6, max_vertices=4, max_out=3):
    """A random walk whose diagram has >= 2 full-depth paths into some vertex."""
    while True:
        d = random_diagram(rng, max_depth, max_vertices, max_out)
        if max(count_paths(d, 0, d.depth).values()) >= 2:
            return random_walk_on(rng, d)


def chain_diagram(depth):
    """One vertex and one edge per level."""
    vertices = [[f"c{n}"] for n in range(depth + 1)]
    edges = [[(f"l{n}", f"c{n - 1}", f"c{n}")] for n in range(1, depth + 1)]
    return BratteliDiagram(vertices, edges)


def chain_walk(depth):
    d = chain_diagram(depth)
    return build_walk(
        d, [{f"l{n}": 1} for n in range(1, depth + 1)], {"c0": 1}
    )


# -- inclusion graphs ----------------------------------------------------------


def random_inclusion_graph(rng, max_points=6, max_edges=8):
    """A random inclusion graph with |X| <= max_points, |E| <= max_edges."""
    nV = rng.randint(1, 3)
    nVb = rng.randint(1, 3)
    V = [f"v{i}" for i in range(nV)]
    Vbar = [f"w{j}" for j in range(nVb)]
    fiber = {v: 1 for v in V}
    for _ in range(rng.randint(0, max_points - nV)):
        fiber[rng.choice(V)] += 1
    X, vertex_of = [], {}
    for v in V:
        for i in range(fiber[v]):
            x = f"x{len(X)}"
            X.append(x)
            vertex_of[x] = v
    pairs = [(rng.choice(V), w) for w in Vbar]  # cover every range vertex
    for v in V:  # cover every source
        if all(src != v for (src, _) in pairs):
            pairs.append((v, rng.choice(Vbar)))
    while len(pairs) < max_edges and rng.random() < 0.5:
        pairs.append((rng.choice(V), rng.choice(Vbar)))
    rng.shuffle(pairs)
    E, source_of, range_of = [], {}, {}
    for k, (v, w) in enumerate(pairs):
        e = f"c{k}"
        E.append(e)
        source_of[e] = v
        range_of[e] = w
    return InclusionGraph(X, V, E, Vbar, vertex_of, source_of, range_of)


def random_transition(rng, g):
    p = {}
    for v in g.V:
        p.update(random_simplex(rng, list(g.out_edges(v))))
    return p


def _compositions(total, parts, minimum):
    """All ways to write ``total`` as an ordered sum of ``parts`` integers
    each >= minimum."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in _compositions(total - first, parts - 1, minimum):
            yield (first,) + rest


def enumerate_inclusion_graphs(max_weight=6):
    """One inclusion graph per isomorphism class with |Xbar| <= max_weight.

    A structure is (fiber sizes, multiplicity matrix) with all maps
    surjective; two structures give isomorphic graphs exactly when they agree
    after permuting rows (with their fiber sizes) and columns, so the
    canonical form below collapses nothing else.
    """
    seen = {}
    for nV in range(1, max_weight + 1):
        for nVb in range(1, max_weight + 1):
            for fibers in _compositions_up_to(max_weight, nV, 1):
                if any(fibers[i] < fibers[i + 1] for i in range(nV - 1)):
                    continue  # fiber order is a row relabeling
                for M in _matrices(nV, nVb, fibers, max_weight):
                    key = _canonical_structure(fibers, M)
                    if key not in seen:
                        seen[key] = _build_graph(fibers, M)
    return list(seen.values())


def _canonical_structure(fibers, M):
    """Exact canonical form under row perms (fibers attached) x column perms.

    Minimizing over one symmetry with the other sorted away is exact; which
    side to enumerate is decided by invariants only, so isomorphic structures
    always take the same branch and get identical keys.
    """
    from itertools import permutations, product
    from math import factorial

    nV, nVb = len(M), len(M[0])
    blocks = []  # runs of equal fiber size (fibers arrive non-increasing)
    i = 0
    while i < nV:
        j = i
        while j < nV and fibers[j] == fibers[i]:
            j += 1
        blocks.append(range(i, j))
        i = j
    row_sym = 1
    for blk in blocks:
        row_sym *= factorial(len(blk))
    if factorial(nVb) <= row_sym:
        cols = [tuple(M[i][j] for i in range(nV)) for j in range(nVb)]
        best = None
        for perm in permutations(cols):
            rows = tuple(sorted(zip(fibers, *perm)))
            if best is None or rows < best:
                best = rows
        return ("colmin", best)
    best = None
    for combo in product(*(permutations(blk) for blk in blocks)):
        order = [i for blk in combo for i in blk]
        cols = tuple(sorted(tuple(M[i][j] for i in order) for j in range(nVb)))
        if best is None or cols < best:
            best = cols
    return ("rowmin", tuple(fibers), best)


def _compositions_up_to(limit, parts, minimum):
    for total in range(parts * minimum, limit + 1):
        yield from _compositions(total, parts, minimum)


def _matrices(nV, nVb, fibers, budget):
    """Multiplicity matrices with positive row sums, positive column sums,
    and sum of fiber(v) * rowsum(v) <= budget.  Built row by row with the
    weight bound enforced as early as possible."""
    rows_of = {
        s: tuple(_compositions(s, nVb, 0)) for s in range(1, budget + 1)
    }
    mask_of = {
        s: tuple(
            sum(1 << j for j, val in enumerate(row) if val) for row in rows_of[s]
        )
        for s in rows_of
    }
    full = (1 << nVb) - 1

    def rows_from(i, left, covered, acc):
        if i == nV:
            if covered == full:
                yield tuple(acc)
            return
        # every later source still needs >= fiber weight
        reserve = sum(fibers[k] for k in range(i + 1, nV))
        top = (left - reserve) // fibers[i]
        for rowsum in range(1, top + 1):
            for row, mask in zip(rows_of[rowsum], mask_of[rowsum]):
                acc.append(row)
                yield from rows_from(i + 1, left - fibers[i] * rowsum, covered | mask, acc)
                acc.pop()

    yield from rows_from(0, budget, 0, [])


def _build_graph(fibers, M):
    nV, nVb = len(M), len(M[0])
    V = [f"v{i}" for i in range(nV)]
    Vbar = [f"w{j}" for j in range(nVb)]
    X, vertex_of = [], {}
    for i, v in enumerate(V):
        for _ in range(fibers[i]):
            x = f"x{len(X)}"
            X.append(x)
            vertex_of[x] = v
    E, source_of, range_of = [], {}, {}
    for i, v in enumerate(V):
        for j, w in enumerate(Vbar):
            for _ in range(M[i][j]):
                e = f"c{len(E)}"
                E.append(e)
                source_of[e] = v
                range_of[e] = w
    return InclusionGraph(X, V, E, Vbar, vertex_of, source_of, range_of)


# -- linear-algebra oracles ----------------------------------------------------


def elements_to_matrix(elements, relation):
    """Stack sparse elements as columns of a dense coordinate matrix."""
    index = {pair: i for i, pair in enumerate(relation.pairs())}
    mat = np.zeros((len(index), len(elements)), dtype=complex)
    for j, m in enumerate(elements):
        for k, v in m.entries.items():
            mat[index[k], j] = complex(v)
    return mat


def span_dimension(elements, relation, tol=1e-9):
    mat = elements_to_matrix(elements, relation)
    if mat.size == 0:
        return 0
    svals = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(svals > tol * max(1.0, float(svals[0]) if len(svals) else 1.0)))


def span_contains(elements, target, relation, tol=1e-9):
    """Whether ``target`` lies in the span of ``elements`` (least squares)."""
    mat = elements_to_matrix(elements, relation)
    vec = elements_to_matrix([target], relation)[:, 0]
    if mat.shape[1] == 0:
        return float(np.linalg.norm(vec)) <= tol
    coef, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    resid = vec - mat @ coef
    return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(vec)))


def _orthonormal_columns(mat, tol):
    if mat.shape[1] == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, svals, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, svals > tol * max(1.0, float(svals[0]))]


def span_equal(first, second, relation, tol=1e-9):
    """Whether two element families span the same subspace (one SVD each)."""
    a = elements_to_matrix(first, relation)
    b = elements_to_matrix(second, relation)
    ua = _orthonormal_columns(a, tol)
    ub = _orthonormal_columns(b, tol)
    if ua.shape[1] != ub.shape[1]:
        return False
    resid_a = a - ub @ (ub.conj().T @ a)
    resid_b = b - ua @ (ua.conj().T @ b)
    scale_a = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    scale_b = max(1.0, float(np.max(np.abs(b))) if b.size else 0.0)
    return (
        float(np.max(np.abs(resid_a))) <= tol * scale_a if resid_a.size else True
    ) and (
        float(np.max(np.abs(resid_b))) <= tol * scale_b if resid_b.size else True
    )


def random_element(rng, relation, scale=1.0):
    """Dense random complex element of the relation algebra."""
    entries = {}
    for pair in relation.pairs():
        entries[pair] = complex(rng.gauss(0, scale), rng.gauss(0, scale))
    return AlgebraElement(relation, entries)
