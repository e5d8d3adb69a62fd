"""Generators for the extremal graphs and their gadgets.

All searches run in a fixed lexicographic order, so every construction is
bit-reproducible.  Each lower-bound builder re-checks its own output (gadget
structure, cross-column completeness, declared minimum pair degree) and
raises :class:`ConstructionError` on any mismatch.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import checks
from .errors import ConstructionError, GadgetInfeasible, GraphError, NoSidonSet
from .graph import CLASS_PAIRS, BipartitePair, ColumnLayout, TripartiteGraph, min_pair_degree

DEFAULT_SEARCH_NODES = 2_000_000


# ---------------------------------------------------------------------------
# Sidon sets


def is_sidon(n: int, elements: Sequence[int]) -> bool:
    """All differences ``a - b mod n`` over ordered pairs ``a != b`` are distinct."""
    elems = sorted({e % n for e in elements})
    if len(elems) != len(list(elements)):
        return False
    diffs = [(a - b) % n for a in elems for b in elems if a != b]
    return len(diffs) == len(set(diffs))


@dataclass(frozen=True)
class SidonSet:
    n: int
    elements: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "elements", tuple(sorted(e % self.n for e in self.elements)))
        if not is_sidon(self.n, self.elements):
            raise ValueError(f"{set(self.elements)} is not a Sidon set mod {self.n}")

    def __len__(self) -> int:
        return len(self.elements)


class _Counter:
    def __init__(self, limit: int):
        self.limit, self.nodes = limit, 0

    def tick(self) -> bool:
        self.nodes += 1
        return self.nodes <= self.limit


def _iter_sidon(n: int, d: int, counter: _Counter, avoid=frozenset(), anchor_zero=False) -> Iterator[tuple[int, ...]]:
    """Sidon ``d``-subsets of Z_n avoiding ``avoid``, in lexicographic order."""
    if d == 0:
        yield ()
        return
    chosen: list[int] = []
    used: set[int] = set()

    def rec(start: int) -> Iterator[tuple[int, ...]]:
        if len(chosen) == d:
            yield tuple(chosen)
            return
        stop = 1 if anchor_zero and not chosen else n
        for x in range(start, stop):
            if not counter.tick():
                return
            if x in avoid:
                continue
            new = []
            ok = True
            for a in chosen:
                for diff in ((x - a) % n, (a - x) % n):
                    if diff in used or diff in new:
                        ok = False
                        break
                    new.append(diff)
                if not ok:
                    break
            if not ok:
                continue
            chosen.append(x)
            used.update(new)
            yield from rec(x + 1)
            chosen.pop()
            used.difference_update(new)

    yield from rec(0)


def find_sidon_set(n: int, d: int, max_nodes: int = DEFAULT_SEARCH_NODES) -> SidonSet:
    """Lexicographically first Sidon set of size ``d`` in Z_n.

    Raises :class:`NoSidonSet` when none exists (or the node bound is hit).
    """
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    counter = _Counter(max_nodes)
    # every Sidon set has a translate containing 0, and the lex-first one contains 0
    for s in _iter_sidon(n, d, counter, anchor_zero=True):
        return SidonSet(n, s)
    raise NoSidonSet(n, d, counter.nodes)


def circulant(n: int, S: Sequence[int]) -> np.ndarray:
    """``n x n`` matrix with ``M[u, v]`` iff ``v - u mod n`` is in ``S``."""
    m = np.zeros((n, n), dtype=bool)
    u = np.arange(n)
    for s in S:
        m[u, (u + s) % n] = True
    return m


def sidon_bipartite(n: int, S: SidonSet | Sequence[int]) -> BipartitePair:
    """Bipartite Cayley graph on Z_n + Z_n with ``u ~ v`` iff ``v - u`` is in ``S``."""
    elems = S.elements if isinstance(S, SidonSet) else tuple(S)
    if not is_sidon(n, elems):
        raise ValueError(f"{sorted(elems)} is not a Sidon set mod {n}")
    return BipartitePair(circulant(n, elems))


# ---------------------------------------------------------------------------
# The Q(n, d) gadget


@dataclass(frozen=True)
class QGadgetSpec:
    """Difference sets for the three natural pairs (1,2), (2,3), (1,3) over Z_n."""

    n: int
    d: int
    s12: tuple[int, ...] = ()
    s23: tuple[int, ...] = ()
    s13: tuple[int, ...] = ()

    def validate(self) -> None:
        if self.d <= 0:
            return
        for s in (self.s12, self.s23, self.s13):
            if len(s) != self.d or not is_sidon(self.n, s):
                raise ConstructionError(f"bad difference set {s} for Q({self.n},{self.d})")
        sums = {(a + b) % self.n for a in self.s12 for b in self.s23}
        if sums & set(self.s13):
            raise ConstructionError("difference sets admit a triangle")

    def graph(self) -> TripartiteGraph:
        n = self.n
        if self.d <= 0:
            return TripartiteGraph.empty(n)
        return TripartiteGraph(
            (n, n, n),
            {
                (0, 1): circulant(n, self.s12),
                (1, 2): circulant(n, self.s23),
                (0, 2): circulant(n, self.s13),
            },
        )

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "s12": list(self.s12), "s23": list(self.s23), "s13": list(self.s13)}


def find_q_spec(n: int, d: int, max_nodes: int = DEFAULT_SEARCH_NODES) -> QGadgetSpec:
    """Search difference sets with ``(S12 + S23) ∩ S13 = ∅``.

    ``S12`` and ``S23`` are anchored at 0 (translating the second and third
    class preserves every property), ``S13`` is searched in full.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if d <= 0:
        return QGadgetSpec(n, d)
    counter = _Counter(max_nodes)
    for s12 in _iter_sidon(n, d, counter, anchor_zero=True):
        for s23 in _iter_sidon(n, d, counter, anchor_zero=True):
            forbidden = frozenset((a + b) % n for a in s12 for b in s23)
            for s13 in _iter_sidon(n, d, counter, avoid=forbidden):
                return QGadgetSpec(n, d, s12, s23, s13)
    raise GadgetInfeasible(n, d, max_nodes, exhausted=counter.nodes <= max_nodes)


def verify_q_graph(G: TripartiteGraph, d: int) -> None:
    """Raise unless ``G`` is d-regular and C4-free on every pair and triangle-free."""
    d = max(d, 0)
    for i, j in CLASS_PAIRS:
        deg = checks.regular_degree(G, i, j)
        if deg != d:
            raise ConstructionError(f"pair {(i, j)} is not {d}-regular (degree {deg})")
        w = checks.check_c4_free(G, i, j)
        if w is not None:
            raise ConstructionError(f"pair {(i, j)} has a C4 {w}")
    t = checks.check_triangle_free(G)
    if t is not None:
        raise ConstructionError(f"gadget has a triangle {t}")


# ---------------------------------------------------------------------------
# Results


@dataclass
class Construction:
    name: str
    graph: TripartiteGraph
    layout: ColumnLayout
    params: dict
    declared_delta: int | None = None
    computed_delta: int | None = None
    declared_cells: tuple[tuple[int, ...], ...] | None = None
    gadgets: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.graph
        yield self.layout

    def meta(self) -> dict:
        return {
            "name": self.name,
            "params": dict(self.params),
            "declared_delta": self.declared_delta,
            "computed_delta": self.computed_delta,
            "declared_cells": [list(r) for r in self.declared_cells] if self.declared_cells else None,
            "computed_cells": [list(r) for r in self.layout.cell_sizes()],
            "gadgets": self.gadgets,
        }


def q_graph(n: int, d: int, max_nodes: int = DEFAULT_SEARCH_NODES) -> Construction:
    """Triangle-free tripartite gadget with d-regular C4-free natural pairs."""
    spec = find_q_spec(n, d, max_nodes)
    spec.validate()
    G = spec.graph()
    verify_q_graph(G, d)
    return Construction(
        "q", G, ColumnLayout.trivial(G.sizes), {"n": n, "d": d},
        gadgets={"q": spec.to_json()},
    )


def _assemble(col_sizes: Sequence[int], gadgets: Sequence[TripartiteGraph]) -> TripartiteGraph:
    """Place one balanced gadget per column and join different columns completely."""
    N = sum(col_sizes)
    offsets = np.cumsum([0, *col_sizes])
    mats = {}
    for i, j in CLASS_PAIRS:
        m = np.ones((N, N), dtype=bool)
        for c, (g, s) in enumerate(zip(gadgets, col_sizes)):
            lo = offsets[c]
            m[lo:lo + s, lo:lo + s] = g.adj(i, j)
        mats[(i, j)] = m
    return TripartiteGraph((N, N, N), mats)


def _column_gadget(n: int, d: int, max_nodes: int) -> tuple[TripartiteGraph, dict]:
    if n < 0:
        raise ConstructionError(f"negative cell size {n}")
    if n == 0:
        return TripartiteGraph.empty(0), QGadgetSpec(0, d).to_json()
    c = q_graph(n, d, max_nodes)
    return c.graph, c.gadgets["q"]


def _check_columns(con: Construction, degrees: Sequence[int], gadget_columns=(0, 1, 2)) -> None:
    G, layout = con.graph, con.layout
    layout.validate(G.sizes)
    if con.declared_cells is not None and layout.cell_sizes() != con.declared_cells:
        raise ConstructionError(f"cell sizes {layout.cell_sizes()} != declared {con.declared_cells}")
    for row in checks.column_pair_report(G, layout):
        if row["column"] not in gadget_columns:
            continue
        want = max(degrees[row["column"]], 0)
        if layout.cells[0][row["column"]] and row["regular_degree"] != want:
            raise ConstructionError(f"column {row['column']} pair {row['classes']} not {want}-regular")
        if row["c4_witness"] is not None:
            raise ConstructionError(f"column {row['column']} pair {row['classes']} has a C4")
    for j in gadget_columns:
        t = checks.check_triangle_free(G, layout, j)
        if t is not None:
            raise ConstructionError(f"column {j} has a triangle {t}")


def _check_delta(con: Construction) -> None:
    con.computed_delta = min_pair_degree(con.graph)
    if con.computed_delta != con.declared_delta:
        raise ConstructionError(
            f"{con.name}{con.params}: min pair degree {con.computed_delta} "
            f"!= declared {con.declared_delta}"
        )


def _column_construction(name, params, sizes, degrees, declared_delta, max_nodes) -> Construction:
    gadgets, meta = [], {}
    for j, (s, d) in enumerate(zip(sizes, degrees)):
        g, spec = _column_gadget(s, d, max_nodes)
        gadgets.append(g)
        meta[f"column{j}"] = spec
    G = _assemble(sizes, gadgets)
    layout = ColumnLayout.from_sizes([sizes] * 3)
    con = Construction(
        name, G, layout, params, declared_delta=declared_delta,
        declared_cells=tuple(tuple(sizes) for _ in range(3)), gadgets=meta,
    )
    _check_columns(con, degrees)
    v = checks.cross_column_violation(G, layout)
    if v is not None:
        raise ConstructionError(str(v))
    _check_delta(con)
    return con


def lb0_graph(h: int, q: int, max_nodes: int = DEFAULT_SEARCH_NODES) -> Construction:
    """Graph with N = 3qh, min pair degree 2qh + h - 2 and no K_{h,h,h}-factor."""
    if h < 2 or q < 1:
        raise ValueError("need h >= 2 and q >= 1")
    sizes = (q * h - 1, q * h, q * h + 1)
    degrees = (h - 3, h - 2, h - 1)
    return _column_construction(
        "lb0", {"h": h, "q": q}, sizes, degrees, 2 * q * h + h - 2, max_nodes
    )


def lb12_graph(h: int, q: int, r: int, alt: bool = False, max_nodes: int = DEFAULT_SEARCH_NODES) -> Construction:
    """Graph with N = (3q + r)h, min pair degree 2qh + rh + h - 3 and no factor.

    ``alt`` uses the variant gadgets Q(qh+rh-1, rh+h-3) and Q(qh, h-2) in
    columns 0 and 1.
    """
    if h < 2 or q < 1 or r not in (0, 1, 2):
        raise ValueError("need h >= 2, q >= 1 and r in {0, 1, 2}")
    sizes = (q * h + r * h - 1, q * h, q * h + 1)
    if alt:
        degrees = (r * h + h - 3, h - 2, h - 2)
    else:
        degrees = (r * h + h - 4, h - 3, h - 2)
    params = {"h": h, "q": q, "r": r}
    if alt:
        params["alt"] = True
    return _column_construction(
        "lb12", params, sizes, degrees, 2 * q * h + r * h + h - 3, max_nodes
    )


def lbvexc_graph(h: int, q: int, max_nodes: int = DEFAULT_SEARCH_NODES) -> Construction:
    """Very-extreme-case graph: N = (6q + 3)h, min pair degree (4q + 2)h + h - 2."""
    if h < 2 or q < 1:
        raise ValueError("need h >= 2 and q >= 1")
    s = 2 * q * h + h
    N = 3 * s
    gadget, spec = _column_gadget(s, h - 2, max_nodes)
    cross = find_sidon_set(s, h - 2, max_nodes) if h > 2 else SidonSet(s, ())
    cross_m = circulant(s, cross.elements)
    blocks = [slice(0, s), slice(s, 2 * s), slice(2 * s, 3 * s)]
    mats = {}
    for i, i2 in CLASS_PAIRS:
        m = np.zeros((N, N), dtype=bool)
        m[blocks[0], blocks[0]] = gadget.adj(i, i2)
        m[blocks[0], s:] = True
        m[s:, blocks[0]] = True
        m[blocks[1], blocks[1]] = True
        m[blocks[2], blocks[2]] = True
        # sparse cross pairs: column 1 of one class against column 2 of the other
        m[blocks[1], blocks[2]] = cross_m
        m[blocks[2], blocks[1]] = cross_m.T
        mats[(i, i2)] = m
    G = TripartiteGraph((N, N, N), mats)
    layout = ColumnLayout.from_sizes([(s, s, s)] * 3)
    con = Construction(
        "lbvexc", G, layout, {"h": h, "q": q},
        declared_delta=(4 * q + 2) * h + h - 2,
        declared_cells=((s, s, s),) * 3,
        gadgets={"column0": spec, "cross": list(cross.elements)},
    )
    _check_columns(con, (h - 2,), gadget_columns=(0,))
    for j in (1, 2):
        sub = G.subgraph(layout.column(j))
        if sub != TripartiteGraph.complete(s):
            raise ConstructionError(f"column {j} is not complete tripartite")
    sparse = []
    for i in range(3):
        for i2 in range(3):
            if i != i2:
                sparse.append(((i, 1), (i2, 2)))
                sub = BipartitePair(G.adj(i, i2)[np.ix_(layout.cells[i][1], layout.cells[i2][2])])
                if checks.regular_degree(sub) != h - 2 or checks.check_c4_free(sub) is not None:
                    raise ConstructionError(f"cross pair {(i, i2)} is not (h-2)-regular C4-free")
    v = checks.cross_column_violation(G, layout, skip=sparse)
    if v is not None:
        raise ConstructionError(str(v))
    _check_delta(con)
    return con


# ---------------------------------------------------------------------------
# Gamma_r and its blow-up


class GammaGraph:
    """Gamma_r on vertices h_{i,j}, 0 <= i, j < r; vertex (i, j) has index ``i*r + j``."""

    def __init__(self, r: int):
        if r < 3:
            raise ValueError("Gamma_r needs r >= 3")
        self.r = r
        idx = [(i, j) for i in range(r) for j in range(r)]
        m = np.array([[self.adjacent(a, b, c, d) for (c, d) in idx] for (a, b) in idx], dtype=bool)
        m.setflags(write=False)
        self.matrix = m

    def adjacent(self, i: int, j: int, i2: int, j2: int) -> bool:
        if i == i2:
            return False
        small = self.r - 2  # column indices below this are the "1..r-2" columns
        if j != j2:
            return j < small or j2 < small
        return j >= small

    def min_pair_degree(self) -> int:
        r = self.r
        best = r
        for i in range(r):
            for i2 in range(r):
                if i == i2:
                    continue
                block = self.matrix[i * r:(i + 1) * r, i2 * r:(i2 + 1) * r]
                best = min(best, int(block.sum(axis=1).min()))
        return best

    def to_tripartite(self) -> TripartiteGraph:
        if self.r != 3:
            raise GraphError("only Gamma_3 is tripartite")
        return TripartiteGraph(
            (3, 3, 3),
            {(i, i2): self.matrix[i * 3:(i + 1) * 3, i2 * 3:(i2 + 1) * 3] for i, i2 in CLASS_PAIRS},
        )


def gamma_r(r: int) -> GammaGraph:
    return GammaGraph(r)


def gamma3_blowup(N: int) -> Construction:
    """Gamma_3 with every vertex replaced by an N/3-set (edges -> K_{N/3,N/3})."""
    if N <= 0 or N % 3:
        raise ValueError(f"N must be a positive multiple of 3, got {N}")
    m = N // 3
    base = gamma_r(3)
    mats = {}
    for i, i2 in CLASS_PAIRS:
        block = base.matrix[i * 3:(i + 1) * 3, i2 * 3:(i2 + 1) * 3]
        mats[(i, i2)] = np.kron(block, np.ones((m, m), dtype=bool)).astype(bool)
    G = TripartiteGraph((N, N, N), mats)
    layout = ColumnLayout.from_sizes([(m, m, m)] * 3)
    con = Construction(
        "gamma3-blowup", G, layout, {"N": N},
        declared_delta=2 * m, declared_cells=((m, m, m),) * 3,
    )
    _check_delta(con)
    return con


# ---------------------------------------------------------------------------
# Random instances


def random_min_degree_graph(N: int, target: int, seed: int) -> TripartiteGraph:
    """Thin K_{N,N,N} at random while keeping every per-class degree >= ``target``.

    Edges are visited once in a seeded random order; an edge is removed when
    both endpoints can spare it.
    """
    if target > N:
        raise ValueError(f"target {target} exceeds class size {N}")
    rng = np.random.default_rng(seed)
    mats = {p: np.ones((N, N), dtype=bool) for p in CLASS_PAIRS}
    deg = {p: [np.full(N, N), np.full(N, N)] for p in CLASS_PAIRS}
    edges = [(p, u, v) for p in CLASS_PAIRS for u in range(N) for v in range(N)]
    for k in rng.permutation(len(edges)):
        p, u, v = edges[k]
        du, dv = deg[p]
        if du[u] > target and dv[v] > target:
            mats[p][u, v] = False
            du[u] -= 1
            dv[v] -= 1
    return TripartiteGraph((N, N, N), mats)


def random_graph(N: int, density: float, seed: int) -> TripartiteGraph:
    """Each cross edge independently with probability ``density``."""
    rng = np.random.default_rng(seed)
    return TripartiteGraph(
        (N, N, N), {p: rng.random((N, N)) < density for p in CLASS_PAIRS}
    )


def threshold_bounds(h: int, N: int) -> tuple[int, int]:
    """Lower and upper bound on the tiling threshold f(h) for class size N.

    With N = (6q + r)h the bounds are 2N/3 + h - 1 (exact) for r = 0,
    h*ceil(2N/3h) + h - 2 .. + h - 1 for r in {1, 2, 4, 5}, and
    2N/3 + h - 1 .. 2N/3 + 2h - 1 for r = 3.
    """
    if h < 1 or N % h:
        raise ValueError("h must divide N")
    r = (N // h) % 6
    ceil_term = h * (-(-2 * N // (3 * h)))
    if r == 0:
        f = 2 * N // 3 + h - 1
        return f, f
    if r == 3:
        return 2 * N // 3 + h - 1, 2 * N // 3 + 2 * h - 1
    return ceil_term + h - 2, ceil_term + h - 1
