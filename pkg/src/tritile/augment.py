"""Local searches behind the almost-covering and reachability arguments.

Both work on K_3-tilings (``h = 1``): a triangle is a :class:`KhhhCopy`
with singleton parts, or a plain ``(a, b, c)`` triple of vertex indices.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .checks import Violation, enumerate_khhh
from .errors import BudgetExceeded, GraphError
from .graph import ColumnLayout, KhhhCopy, TripartiteGraph

Triangle = tuple[int, int, int]


def _as_triangle(t) -> Triangle:
    if isinstance(t, KhhhCopy):
        if t.h != 1:
            raise GraphError("augmentation works on K_3-tilings (h = 1)")
        return (t.parts[0][0], t.parts[1][0], t.parts[2][0])
    a, b, c = t
    return (int(a), int(b), int(c))


def _is_triangle(G: TripartiteGraph, t: Triangle) -> bool:
    a, b, c = t
    return G.has_edge(0, a, 1, b) and G.has_edge(0, a, 2, c) and G.has_edge(1, b, 2, c)


def _check_partial(G: TripartiteGraph, tiling: Sequence[Triangle]) -> None:
    used: set[tuple[int, int]] = set()
    for t in tiling:
        if not _is_triangle(G, t):
            raise GraphError(f"{t} is not a triangle of the host")
        for i, v in enumerate(t):
            if (i, v) in used:
                raise GraphError(f"partial tiling is not vertex-disjoint at {(i, v)}")
            used.add((i, v))


@dataclass
class SparseTripleHint:
    """Three equal-size sets, one per class, with their pairwise densities.

    Found greedily; it is a hint towards a sparse configuration, not a proof.
    """

    sets: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    densities: dict[tuple[int, int], Fraction]

    def to_json(self) -> dict:
        return {
            "sets": [list(s) for s in self.sets],
            "densities": {f"{a},{b}": str(d) for (a, b), d in sorted(self.densities.items())},
        }


@dataclass
class AugmentResult:
    status: str  # AUGMENTED | FAILURE | BUDGET
    tiling: list[Triangle]
    removed: list[Triangle] = field(default_factory=list)
    added: list[Triangle] = field(default_factory=list)
    hint: SparseTripleHint | None = None
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "AUGMENTED"


def _pack(triangles: list[Triangle], k: int, budget: list[int]) -> list[Triangle] | None:
    """``k`` pairwise disjoint triangles from the list (first in lexicographic order)."""
    chosen: list[Triangle] = []
    used = [set(), set(), set()]

    def rec(start: int) -> bool:
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetExceeded("augmentation search", 0)
        if len(chosen) == k:
            return True
        for idx in range(start, len(triangles)):
            if len(triangles) - idx < k - len(chosen):
                return False
            t = triangles[idx]
            if any(t[i] in used[i] for i in range(3)):
                continue
            chosen.append(t)
            for i in range(3):
                used[i].add(t[i])
            if rec(idx + 1):
                return True
            chosen.pop()
            for i in range(3):
                used[i].discard(t[i])
        return False

    return list(chosen) if rec(0) else None


def sparse_triple_hint(G: TripartiteGraph, size: int | None = None, rounds: int = 20) -> SparseTripleHint:
    """Greedy search for one ``size``-set per class with low pairwise density."""
    M = min(G.sizes)
    size = max(1, M // 3) if size is None else size
    if size > M:
        raise GraphError("hint sets larger than a class")

    def pick(i: int, others: dict[int, Sequence[int]]) -> tuple[int, ...]:
        score = np.zeros(G.sizes[i], dtype=np.int64)
        for j, S in others.items():
            score += G.adj(i, j)[:, list(S)].sum(axis=1)
        order = sorted(range(G.sizes[i]), key=lambda v: (int(score[v]), v))
        return tuple(sorted(order[:size]))

    sets = {i: pick(i, {j: range(G.sizes[j]) for j in range(3) if j != i}) for i in range(3)}
    for _ in range(rounds):
        changed = False
        for i in range(3):
            new = pick(i, {j: sets[j] for j in range(3) if j != i})
            if new != sets[i]:
                sets[i], changed = new, True
        if not changed:
            break
    dens = {(a, b): G.pair(a, b).subset_density(sets[a], sets[b]) for a, b in ((0, 1), (0, 2), (1, 2))}
    return SparseTripleHint((sets[0], sets[1], sets[2]), dens)


def augment_tiling(
    G: TripartiteGraph,
    tiling: Sequence,
    swap_budget: int = 15,
    node_budget: int = 1_000_000,
    enforce_size_hypothesis: bool = False,
) -> AugmentResult:
    """Grow a partial K_3-tiling by exchanging a bounded number of triangles.

    For ``s = 0, 1, ...`` (at most ``swap_budget - 1``) every set of ``s``
    tiling triangles is removed in lexicographic order and ``s + 1`` disjoint
    triangles are sought among the freed and uncovered vertices.  The result
    differs from the input in at most ``swap_budget`` triangles.  When no
    exchange works a greedy sparse-triple hint is attached.

    ``enforce_size_hypothesis`` rejects inputs with ``|T| >= M - 3``.
    """
    T = sorted(_as_triangle(t) for t in tiling)
    _check_partial(G, T)
    M = min(G.sizes)
    if enforce_size_hypothesis and not len(T) < M - 3:
        raise GraphError(f"partial tiling has {len(T)} triangles, need fewer than M - 3 = {M - 3}")
    covered = [set(t[i] for t in T) for i in range(3)]
    uncovered = [[v for v in range(G.sizes[i]) if v not in covered[i]] for i in range(3)]
    budget = [node_budget]
    try:
        for s in range(0, min(swap_budget - 1, len(T)) + 1):
            for removed in combinations(range(len(T)), s):
                free = [sorted(uncovered[i] + [T[r][i] for r in removed]) for i in range(3)]
                if min(len(f) for f in free) < s + 1:
                    continue
                sub = G.subgraph(free)
                tris = [
                    (free[0][c.parts[0][0]], free[1][c.parts[1][0]], free[2][c.parts[2][0]])
                    for c in enumerate_khhh(sub, 1, max(budget[0], 1))
                ]
                budget[0] -= len(tris)
                added = _pack(tris, s + 1, budget)
                if added is None:
                    continue
                rm = [T[r] for r in removed]
                new = sorted([t for idx, t in enumerate(T) if idx not in removed] + added)
                _check_partial(G, new)
                return AugmentResult("AUGMENTED", new, rm, sorted(added), nodes=node_budget - budget[0])
    except BudgetExceeded:
        return AugmentResult("BUDGET", T, hint=sparse_triple_hint(G), nodes=node_budget)
    return AugmentResult("FAILURE", T, hint=sparse_triple_hint(G), nodes=node_budget - budget[0])


# ---------------------------------------------------------------------------
# Reachability


@dataclass
class ReachabilityChain:
    cls: int
    x: int
    y: int
    triangles: list[tuple[int, int, int]]  # class-ordered vertex triples

    @property
    def k(self) -> int:
        return len(self.triangles) // 2

    @property
    def trivial(self) -> bool:
        return not self.triangles

    def to_json(self) -> dict:
        return {"class": self.cls, "x": self.x, "y": self.y, "k": self.k, "triangles": [list(t) for t in self.triangles]}


def _common_pair(G: TripartiteGraph, cls: int, u: int, w: int):
    a, b = [j for j in range(3) if j != cls]
    na = np.flatnonzero(G.adj(cls, a)[u] & G.adj(cls, a)[w])
    nb = np.flatnonzero(G.adj(cls, b)[u] & G.adj(cls, b)[w])
    if not len(na) or not len(nb):
        return None
    hits = np.argwhere(G.adj(a, b)[np.ix_(na, nb)])
    if not len(hits):
        return None
    return int(na[hits[0][0]]), int(nb[hits[0][1]])


def _triangle(cls: int, v: int, pair: tuple[int, int]) -> tuple[int, int, int]:
    out = [0, 0, 0]
    others = [j for j in range(3) if j != cls]
    out[cls] = v
    out[others[0]], out[others[1]] = pair
    return tuple(out)  # type: ignore[return-value]


def reachability_chain(
    G: TripartiteGraph, x: int, y: int, cls: int = 0, max_k: int = 2
) -> ReachabilityChain | None:
    """Shortest chain of ``2k <= 2*max_k`` triangles linking ``x`` and ``y`` in class ``cls``.

    Consecutive triangles ``T_{2j-1}, T_{2j}`` share their two vertices
    outside ``cls``; ``T_{2j}, T_{2j+1}`` share their vertex in ``cls``.
    ``x == y`` gives the empty chain (``k = 0``).  Returned chains are
    re-checked before they are handed out.
    """
    n = G.sizes[cls]
    if not (0 <= x < n and 0 <= y < n):
        raise GraphError("x and y must be vertices of the chosen class")
    if x == y:
        return ReachabilityChain(cls, x, y, [])
    parent: dict[int, tuple[int, tuple[int, int]] | None] = {x: None}
    depth = {x: 0}
    queue = deque([x])
    while queue:
        u = queue.popleft()
        if depth[u] == max_k:
            continue
        for w in range(n):
            if w in parent:
                continue
            pair = _common_pair(G, cls, u, w)
            if pair is None:
                continue
            parent[w] = (u, pair)
            depth[w] = depth[u] + 1
            if w == y:
                steps = []
                cur = w
                while parent[cur] is not None:
                    prev, p = parent[cur]  # type: ignore[misc]
                    steps.append((prev, cur, p))
                    cur = prev
                tris = []
                for prev, cur, p in reversed(steps):
                    tris += [_triangle(cls, prev, p), _triangle(cls, cur, p)]
                chain = ReachabilityChain(cls, x, y, tris)
                bad = check_reachability_chain(G, chain)
                if bad is not None:  # pragma: no cover - would be a search bug
                    raise AssertionError(str(bad))
                return chain
            queue.append(w)
    return None


def check_reachability_chain(G: TripartiteGraph, chain: ReachabilityChain) -> Violation | None:
    """Check the three chain conditions and that every member is a triangle of ``G``."""
    tris = [tuple(t) for t in chain.triangles]
    c = chain.cls
    if not tris:
        return None if chain.x == chain.y else Violation("empty chain between distinct vertices")
    if len(tris) % 2:
        return Violation("chain must have an even number of triangles", len(tris))
    for idx, t in enumerate(tris):
        if not _is_triangle(G, t):  # type: ignore[arg-type]
            return Violation("chain member is not a triangle", (idx, t))
    if tris[0][c] != chain.x or tris[-1][c] != chain.y:
        return Violation("chain does not start at x and end at y")
    others = [j for j in range(3) if j != c]
    for j in range(0, len(tris), 2):
        if any(tris[j][o] != tris[j + 1][o] for o in others):
            return Violation("paired triangles do not share their outer vertices", j)
    for j in range(1, len(tris) - 1, 2):
        if tris[j][c] != tris[j + 1][c]:
            return Violation("linked triangles do not share their class vertex", j)
    return None


def cluster_graph(G: TripartiteGraph, layout: ColumnLayout, threshold: Fraction | float) -> TripartiteGraph:
    """Reduced graph on the cells: cell ``(i, j)`` is adjacent to ``(i2, j2)`` when
    their pair density is at least ``threshold``.  Empty cells are never adjacent."""
    threshold = Fraction(threshold)
    mats = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        m = np.zeros((3, 3), dtype=bool)
        for ja in range(3):
            for jb in range(3):
                X, Y = layout.cells[a][ja], layout.cells[b][jb]
                if X and Y:
                    m[ja, jb] = G.pair(a, b).subset_density(X, Y) >= threshold
        mats[(a, b)] = m
    return TripartiteGraph((3, 3, 3), mats)
