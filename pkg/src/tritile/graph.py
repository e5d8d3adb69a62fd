"""Balanced tripartite graphs, column layouts and the text format.

Vertices are ``(class, index)`` pairs with classes 0, 1, 2.  Adjacency is
stored as one dense boolean matrix per unordered class pair; columns are
layout metadata kept separately so that one graph can carry several layouts.
"""
from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import FormatError, GraphError

CLASS_PAIRS = ((0, 1), (0, 2), (1, 2))


def _other_classes(i: int) -> tuple[int, int]:
    return tuple(c for c in range(3) if c != i)  # type: ignore[return-value]


class BipartitePair:
    """A bipartite graph between sides ``A`` (rows) and ``B`` (columns)."""

    def __init__(self, adj: np.ndarray):
        adj = np.array(adj, dtype=bool)
        if adj.ndim != 2:
            raise GraphError("pair adjacency must be a 2-d matrix")
        adj.setflags(write=False)
        self.adj = adj

    @property
    def shape(self) -> tuple[int, int]:
        return self.adj.shape  # type: ignore[return-value]

    @property
    def n_edges(self) -> int:
        return int(self.adj.sum())

    def density(self) -> Fraction:
        a, b = self.shape
        if a == 0 or b == 0:
            raise GraphError("density of a pair with an empty side")
        return Fraction(self.n_edges, a * b)

    def subset_density(self, X: Sequence[int], Y: Sequence[int]) -> Fraction:
        if not X or not Y:
            raise GraphError("density needs non-empty vertex sets")
        e = int(self.adj[np.ix_(list(X), list(Y))].sum())
        return Fraction(e, len(X) * len(Y))

    def restrict(self, X: Sequence[int], Y: Sequence[int]) -> "BipartitePair":
        return BipartitePair(self.adj[np.ix_(list(X), list(Y))])

    def transpose(self) -> "BipartitePair":
        return BipartitePair(self.adj.T)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartitePair):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.adj, other.adj))

    def __repr__(self) -> str:
        return f"BipartitePair({self.shape[0]}x{self.shape[1]}, edges={self.n_edges})"


class TripartiteGraph:
    """Immutable 3-partite graph with dense boolean adjacency between classes.

    ``matrices`` maps each class pair ``(i, j)`` with ``i < j`` to a
    ``sizes[i] x sizes[j]`` boolean matrix.
    """

    def __init__(self, sizes: Sequence[int], matrices: dict[tuple[int, int], np.ndarray]):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) != 3:
            raise GraphError("a tripartite graph has exactly three classes")
        if any(s < 0 for s in sizes):
            raise GraphError(f"class sizes must be non-negative, got {sizes}")
        self.sizes: tuple[int, int, int] = sizes  # type: ignore[assignment]
        self._adj: dict[tuple[int, int], np.ndarray] = {}
        for i, j in CLASS_PAIRS:
            m = matrices.get((i, j))
            if m is None:
                m = np.zeros((sizes[i], sizes[j]), dtype=bool)
            m = np.array(m, dtype=bool)
            if m.shape != (sizes[i], sizes[j]):
                raise GraphError(
                    f"matrix for classes {(i, j)} has shape {m.shape}, "
                    f"expected {(sizes[i], sizes[j])}"
                )
            m.setflags(write=False)
            self._adj[(i, j)] = m

    # -- construction helpers -------------------------------------------------
    @classmethod
    def empty(cls, n: int) -> "TripartiteGraph":
        return cls((n, n, n), {})

    @classmethod
    def complete(cls, sizes: Sequence[int] | int) -> "TripartiteGraph":
        if isinstance(sizes, int):
            sizes = (sizes,) * 3
        return cls(sizes, {(i, j): np.ones((sizes[i], sizes[j]), bool) for i, j in CLASS_PAIRS})

    # -- queries --------------------------------------------------------------
    @property
    def is_balanced(self) -> bool:
        return len(set(self.sizes)) == 1

    @property
    def N(self) -> int:
        if not self.is_balanced:
            raise GraphError(f"graph is not balanced: sizes {self.sizes}")
        return self.sizes[0]

    def adj(self, i: int, j: int) -> np.ndarray:
        """Adjacency matrix with rows in class ``i`` and columns in class ``j``."""
        if i == j:
            raise GraphError("no adjacency inside a class")
        if i < j:
            return self._adj[(i, j)]
        return self._adj[(j, i)].T

    def pair(self, i: int, j: int) -> BipartitePair:
        return BipartitePair(self.adj(i, j))

    def has_edge(self, i: int, u: int, j: int, v: int) -> bool:
        if i == j:
            return False
        return bool(self.adj(i, j)[u, v])

    def neighbors(self, i: int, u: int, j: int) -> np.ndarray:
        return np.flatnonzero(self.adj(i, j)[u])

    def degree(self, i: int, u: int, j: int) -> int:
        return int(self.adj(i, j)[u].sum())

    @cached_property
    def _masks(self) -> dict[tuple[int, int], tuple[int, ...]]:
        out = {}
        for i in range(3):
            for j in _other_classes(i):
                m = self.adj(i, j)
                weights = [1 << v for v in range(m.shape[1])]
                out[(i, j)] = tuple(
                    sum(w for w, bit in zip(weights, row) if bit) for row in m.tolist()
                )
        return out

    def nbr_mask(self, i: int, u: int, j: int) -> int:
        """Neighbourhood of ``(i, u)`` inside class ``j`` as an int bitset."""
        return self._masks[(i, j)][u]

    def edges(self) -> Iterator[tuple[int, int, int, int]]:
        for i, j in CLASS_PAIRS:
            for u, v in zip(*np.nonzero(self._adj[(i, j)])):
                yield (i, int(u), j, int(v))

    @property
    def n_edges(self) -> int:
        return int(sum(m.sum() for m in self._adj.values()))

    def subgraph(self, keep: Sequence[Sequence[int]]) -> "TripartiteGraph":
        """Induced subgraph; ``keep[i]`` lists the retained class-``i`` vertices."""
        keep = [list(k) for k in keep]
        mats = {(i, j): self._adj[(i, j)][np.ix_(keep[i], keep[j])] for i, j in CLASS_PAIRS}
        return TripartiteGraph([len(k) for k in keep], mats)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TripartiteGraph):
            return NotImplemented
        return self.sizes == other.sizes and all(
            np.array_equal(self._adj[p], other._adj[p]) for p in CLASS_PAIRS
        )

    def __hash__(self) -> int:
        return hash((self.sizes,) + tuple(self._adj[p].tobytes() for p in CLASS_PAIRS))

    def __repr__(self) -> str:
        return f"TripartiteGraph(sizes={self.sizes}, edges={self.n_edges})"


def build_graph(
    class_sizes: Sequence[int], edges: Iterable[tuple[int, int, int, int]]
) -> TripartiteGraph:
    """Build a graph from ``(class, vertex, class, vertex)`` edge tuples.

    Duplicate edges (in either orientation) are harmless.
    """
    sizes = tuple(int(s) for s in class_sizes)
    if len(sizes) != 3 or any(s < 0 for s in sizes):
        raise GraphError(f"need three non-negative class sizes, got {class_sizes!r}")
    mats = {p: np.zeros((sizes[p[0]], sizes[p[1]]), dtype=bool) for p in CLASS_PAIRS}
    for e in edges:
        i, u, j, v = (int(x) for x in e)
        if i == j:
            raise GraphError(f"within-class edge {(i, u)} -- {(j, v)}")
        for c, x in ((i, u), (j, v)):
            if not 0 <= c < 3:
                raise GraphError(f"class index {c} out of range in edge {e!r}")
            if not 0 <= x < sizes[c]:
                raise GraphError(f"vertex {x} out of range for class {c} (size {sizes[c]})")
        if i > j:
            i, u, j, v = j, v, i, u
        mats[(i, j)][u, v] = True
    return TripartiteGraph(sizes, mats)


def min_pair_degree(G: TripartiteGraph) -> int:
    """Minimum over vertices ``v`` and classes ``c != class(v)`` of ``deg(v, c)``."""
    best = None
    for i in range(3):
        if G.sizes[i] == 0:
            continue
        for j in _other_classes(i):
            m = G.adj(i, j)
            d = int(m.sum(axis=1).min()) if m.shape[1] else 0
            best = d if best is None else min(best, d)
    if best is None:
        raise GraphError("min pair degree of a graph with no vertices")
    return best


def pair_density(
    G: TripartiteGraph, i: int, X: Sequence[int], j: int, Y: Sequence[int]
) -> Fraction:
    """Exact edge density ``e(X, Y) / (|X||Y|)`` between class-``i`` set ``X`` and class-``j`` set ``Y``."""
    if i == j:
        raise GraphError("density needs sets in two different classes")
    return G.pair(i, j).subset_density(X, Y)


# ---------------------------------------------------------------------------
# Layouts and copies


class ColumnLayout:
    """The 3x3 cell partition; ``cells[i][j]`` is the cell of class ``i`` in column ``j``."""

    def __init__(self, cells: Sequence[Sequence[Iterable[int]]]):
        if len(cells) != 3 or any(len(row) != 3 for row in cells):
            raise GraphError("a layout has 3 classes x 3 columns of cells")
        self.cells: tuple[tuple[tuple[int, ...], ...], ...] = tuple(
            tuple(tuple(sorted(int(v) for v in cell)) for cell in row) for row in cells
        )

    @classmethod
    def from_sizes(cls, cell_sizes: Sequence[Sequence[int]]) -> "ColumnLayout":
        """Consecutive cells: class ``i`` is cut into runs of ``cell_sizes[i][j]``."""
        rows = []
        for sizes in cell_sizes:
            row, start = [], 0
            for s in sizes:
                row.append(range(start, start + s))
                start += s
            rows.append(row)
        return cls(rows)

    @classmethod
    def trivial(cls, sizes: Sequence[int]) -> "ColumnLayout":
        """Everything in column 0."""
        return cls.from_sizes([(s, 0, 0) for s in sizes])

    def cell_sizes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(len(c) for c in row) for row in self.cells)

    def column(self, j: int) -> tuple[tuple[int, ...], ...]:
        return tuple(self.cells[i][j] for i in range(3))

    @cached_property
    def _cell_index(self) -> tuple[dict[int, int], ...]:
        return tuple({v: j for j, cell in enumerate(row) for v in cell} for row in self.cells)

    def cell_of(self, i: int, v: int) -> int:
        return self._cell_index[i][v]

    def validate(self, sizes: Sequence[int]) -> None:
        for i, row in enumerate(self.cells):
            seen: list[int] = [v for cell in row for v in cell]
            if sorted(seen) != list(range(sizes[i])):
                raise GraphError(
                    f"layout cells of class {i} do not partition range({sizes[i]})"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ColumnLayout):
            return NotImplemented
        return self.cells == other.cells

    def __hash__(self) -> int:
        return hash(self.cells)

    def __repr__(self) -> str:
        return f"ColumnLayout(cell_sizes={self.cell_sizes()})"


class KhhhCopy(NamedTuple):
    """Three ``h``-sets, one per class; parts are kept sorted."""

    parts: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    @classmethod
    def of(cls, p0: Iterable[int], p1: Iterable[int], p2: Iterable[int]) -> "KhhhCopy":
        return cls((tuple(sorted(p0)), tuple(sorted(p1)), tuple(sorted(p2))))

    @property
    def h(self) -> int:
        return len(self.parts[0])

    def vertices(self) -> Iterator[tuple[int, int]]:
        for i, part in enumerate(self.parts):
            for v in part:
                yield (i, v)

    def is_valid_in(self, G: TripartiteGraph) -> bool:
        h = self.h
        if h == 0 or any(len(p) != h or len(set(p)) != h for p in self.parts):
            return False
        for i, part in enumerate(self.parts):
            if any(not 0 <= v < G.sizes[i] for v in part):
                return False
        for i, j in CLASS_PAIRS:
            if not G.adj(i, j)[np.ix_(self.parts[i], self.parts[j])].all():
                return False
        return True

    def to_json(self) -> list[list[int]]:
        return [list(p) for p in self.parts]


# ---------------------------------------------------------------------------
# Text format


def serialize(G: TripartiteGraph, layout: ColumnLayout | None = None) -> str:
    lines = [f"tripartite {G.sizes[0]} {G.sizes[1]} {G.sizes[2]}"]
    if layout is not None:
        layout.validate(G.sizes)
        for j in range(3):
            for i in range(3):
                verts = " ".join(str(v) for v in layout.cells[i][j])
                lines.append(f"column {j} class {i}: {verts}".rstrip())
    for i, u, j, v in G.edges():
        lines.append(f"e {i} {u} {j} {v}")
    return "\n".join(lines) + "\n"


def _ints(tokens: Sequence[str], lineno: int) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"expected integers, got {' '.join(tokens)!r}", lineno) from None


def parse(text: str) -> tuple[TripartiteGraph, ColumnLayout | None]:
    """Parse the text format; returns the graph and its layout (if any column lines)."""
    sizes: tuple[int, ...] | None = None
    cells: list[list[list[int] | None]] = [[None] * 3 for _ in range(3)]
    any_column = False
    edges: list[tuple[int, int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if sizes is None:
            if tokens[0] != "tripartite" or len(tokens) != 4:
                raise FormatError("header must be 'tripartite N1 N2 N3'", lineno)
            sizes = tuple(_ints(tokens[1:], lineno))
            if any(s < 0 for s in sizes):
                raise FormatError(f"negative class size in header {sizes}", lineno)
            continue
        if tokens[0] == "e":
            if len(tokens) != 5:
                raise FormatError("edge line must be 'e i u j v'", lineno)
            i, u, j, v = _ints(tokens[1:], lineno)
            if not i < j:
                raise FormatError(f"edge classes must satisfy i < j, got {i}, {j}", lineno)
            if not (0 <= i < 3 and 0 <= j < 3):
                raise FormatError("class index out of range in edge", lineno)
            if not (0 <= u < sizes[i] and 0 <= v < sizes[j]):
                raise FormatError("vertex index out of range in edge", lineno)
            edges.append((i, u, j, v))
        elif tokens[0] == "column":
            head, sep, rest = line.partition(":")
            htok = head.split()
            if not sep or len(htok) != 4 or htok[2] != "class":
                raise FormatError("column line must be 'column j class i: v1 v2 ...'", lineno)
            j, i = _ints([htok[1], htok[3]], lineno)
            if not (0 <= i < 3 and 0 <= j < 3):
                raise FormatError("column/class index out of range", lineno)
            if cells[i][j] is not None:
                raise FormatError(f"duplicate cell for column {j} class {i}", lineno)
            cells[i][j] = _ints(rest.split(), lineno)
            any_column = True
        else:
            raise FormatError(f"unrecognised line {line!r}", lineno)
    if sizes is None:
        raise FormatError("missing 'tripartite' header", 1)
    G = build_graph(sizes, edges)
    layout = None
    if any_column:
        layout = ColumnLayout([[c or [] for c in row] for row in cells])
        try:
            layout.validate(sizes)
        except GraphError as exc:
            raise FormatError(str(exc), 0) from None
    return G, layout


def read_graph(path) -> tuple[TripartiteGraph, ColumnLayout | None]:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_graph(path, G: TripartiteGraph, layout: ColumnLayout | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(G, layout))
