"""Brute-force verifiers for the structural facts the lower-bound arguments use."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded
from .graph import CLASS_PAIRS, BipartitePair, ColumnLayout, KhhhCopy, TripartiteGraph

DEFAULT_CANDIDATE_BUDGET = 10**8


@dataclass(frozen=True)
class Violation:
    reason: str
    witness: object = None

    def __str__(self) -> str:
        return self.reason if self.witness is None else f"{self.reason}: {self.witness}"


# ---------------------------------------------------------------------------
# Pair properties


def _pair_matrix(G: TripartiteGraph | BipartitePair, i: int | None, j: int | None) -> np.ndarray:
    if isinstance(G, BipartitePair):
        return G.adj
    return G.adj(i, j)


def regular_degree(G: TripartiteGraph | BipartitePair, i: int | None = None, j: int | None = None):
    """The common degree if the pair is regular on both sides, else ``None``."""
    m = _pair_matrix(G, i, j).astype(np.int64)
    degs = set(m.sum(axis=1).tolist()) | set(m.sum(axis=0).tolist())
    if len(degs) > 1:
        return None
    return degs.pop() if degs else 0


def check_c4_free(G: TripartiteGraph | BipartitePair, i: int | None = None, j: int | None = None):
    """``None`` if the pair has no 4-cycle, else the first witness ``(u, u2, v, v2)``.

    ``u < u2`` are on the first side and share neighbours ``v < v2``.
    """
    m = _pair_matrix(G, i, j).astype(np.int64)
    common = m @ m.T
    np.fill_diagonal(common, 0)
    hits = np.argwhere(np.triu(common, 1) >= 2)
    if len(hits) == 0:
        return None
    u, u2 = (int(x) for x in hits[0])
    v, v2 = (int(x) for x in np.flatnonzero(m[u] & m[u2])[:2])
    return (u, u2, v, v2)


def check_triangle_free(
    G: TripartiteGraph, layout: ColumnLayout | None = None, column: int | None = None
):
    """``None`` if triangle-free, else the first triangle ``(a, b, c)``.

    With a layout and a column index only the column's cells are scanned.
    """
    if layout is not None and column is not None:
        cells = layout.column(column)
    else:
        cells = tuple(tuple(range(s)) for s in G.sizes)
    a01 = G.adj(0, 1)[np.ix_(cells[0], cells[1])]
    a02 = G.adj(0, 2)[np.ix_(cells[0], cells[2])].astype(np.int64)
    a12 = G.adj(1, 2)[np.ix_(cells[1], cells[2])].astype(np.int64)
    closing = (a02 @ a12.T) > 0
    hits = np.argwhere(a01 & closing)
    if len(hits) == 0:
        return None
    x, y = (int(t) for t in hits[0])
    z = int(np.flatnonzero(a02[x] & a12[y])[0])
    return (cells[0][x], cells[1][y], cells[2][z])


def column_pair_report(G: TripartiteGraph, layout: ColumnLayout) -> list[dict]:
    """Degree regularity and C4-freeness of every class pair inside every column."""
    rows = []
    for j in range(3):
        cells = layout.column(j)
        for a, b in CLASS_PAIRS:
            sub = BipartitePair(G.adj(a, b)[np.ix_(cells[a], cells[b])])
            rows.append(
                {
                    "column": j,
                    "classes": (a, b),
                    "regular_degree": regular_degree(sub),
                    "c4_witness": check_c4_free(sub),
                }
            )
    return rows


def cross_column_violation(G: TripartiteGraph, layout: ColumnLayout, skip=()) -> Violation | None:
    """First non-adjacent pair in different columns and different classes.

    ``skip`` lists ``((i, j), (i2, j2))`` cell pairs that are exempt.
    """
    skip = {frozenset(p) for p in skip}
    for a, b in CLASS_PAIRS:
        m = G.adj(a, b)
        for ja in range(3):
            for jb in range(3):
                if ja == jb or frozenset(((a, ja), (b, jb))) in skip:
                    continue
                ca, cb = layout.cells[a][ja], layout.cells[b][jb]
                if not ca or not cb:
                    continue
                sub = m[np.ix_(ca, cb)]
                if not sub.all():
                    x, y = (int(t) for t in np.argwhere(~sub)[0])
                    return Violation("missing cross-column edge", ((a, ca[x]), (b, cb[y])))
    return None


# ---------------------------------------------------------------------------
# Copies of K_{h,h,h}


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def enumerate_khhh(
    G: TripartiteGraph, h: int, budget: int = DEFAULT_CANDIDATE_BUDGET
) -> Iterator[KhhhCopy]:
    """Every copy of K_{h,h,h} in ``G`` exactly once, in lexicographic order.

    ``budget`` caps the number of candidate parts examined; exceeding it raises
    :class:`BudgetExceeded` instead of silently truncating.
    """
    if h < 1:
        raise ValueError("h must be positive")
    full = [(1 << s) - 1 for s in G.sizes]
    tests = 0
    for p0 in combinations(range(G.sizes[0]), h):
        tests += 1
        if tests > budget:
            raise BudgetExceeded("copy enumeration", budget)
        c1, c2 = full[1], full[2]
        for u in p0:
            c1 &= G.nbr_mask(0, u, 1)
            c2 &= G.nbr_mask(0, u, 2)
        cand1 = _bits(c1)
        if len(cand1) < h or c2.bit_count() < h:
            continue
        for p1 in combinations(cand1, h):
            tests += 1
            if tests > budget:
                raise BudgetExceeded("copy enumeration", budget)
            c = c2
            for v in p1:
                c &= G.nbr_mask(1, v, 2)
            cand2 = _bits(c)
            if len(cand2) < h:
                continue
            for p2 in combinations(cand2, h):
                tests += 1
                if tests > budget:
                    raise BudgetExceeded("copy enumeration", budget)
                yield KhhhCopy((p0, p1, p2))


class ShapeKind(str, enum.Enum):
    EMPTY = "EMPTY"
    WITHIN_ONE_CLASS = "WITHIN_ONE_CLASS"
    STAR = "STAR"
    OTHER = "OTHER"


@dataclass(frozen=True)
class IntersectionShape:
    kind: ShapeKind
    # class index for WITHIN_ONE_CLASS; ((class, vertex) centre, leaf class) for STAR
    detail: object = None
    size: int = 0


def column_intersection_shape(
    copy: KhhhCopy, layout: ColumnLayout, j: int, G: TripartiteGraph | None = None
) -> IntersectionShape:
    """Classify ``copy`` restricted to column ``j``.

    When ``G`` is given, star edges are read from the graph's column-induced
    edges; otherwise the copy's completeness is assumed.
    """
    inside = [[v for v in part if layout.cell_of(i, v) == j] for i, part in enumerate(copy.parts)]
    classes = [i for i in range(3) if inside[i]]
    size = sum(len(p) for p in inside)
    if not classes:
        return IntersectionShape(ShapeKind.EMPTY, None, 0)
    if len(classes) == 1:
        return IntersectionShape(ShapeKind.WITHIN_ONE_CLASS, classes[0], size)
    if len(classes) == 2:
        a, b = classes
        for centre_cls, leaf_cls in ((a, b), (b, a)):
            if len(inside[centre_cls]) != 1:
                continue
            centre = inside[centre_cls][0]
            if G is None or all(G.has_edge(centre_cls, centre, leaf_cls, v) for v in inside[leaf_cls]):
                return IntersectionShape(ShapeKind.STAR, ((centre_cls, centre), leaf_cls), size)
    return IntersectionShape(ShapeKind.OTHER, tuple(tuple(p) for p in inside), size)


def copy_profile(copy: KhhhCopy, layout: ColumnLayout) -> tuple[tuple[int, int, int], ...]:
    """3x3 matrix ``p[i][j] = |copy ∩ A^(i)_j|``."""
    rows = []
    for i, part in enumerate(copy.parts):
        row = [0, 0, 0]
        for v in part:
            row[layout.cell_of(i, v)] += 1
        rows.append(tuple(row))
    return tuple(rows)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Certificates


def _as_copies(copies: Sequence) -> list[KhhhCopy]:
    out = []
    for c in copies:
        if isinstance(c, KhhhCopy):
            out.append(c)
        else:
            out.append(KhhhCopy(tuple(tuple(int(v) for v in part) for part in c)))  # type: ignore[arg-type]
    return out


def check_tiling_certificate(G: TripartiteGraph, h: int, cert) -> Violation | None:
    """Validate a tiling certificate (a dict with ``h`` and ``copies``, or a list of copies)."""
    if isinstance(cert, dict):
        if int(cert.get("h", h)) != h:
            return Violation("certificate h does not match", cert.get("h"))
        copies = cert.get("copies", [])
    else:
        copies = cert
    try:
        copies = _as_copies(copies)
    except (TypeError, ValueError):
        return Violation("malformed copy list")
    for idx, c in enumerate(copies):
        if len(c.parts) != 3 or any(len(p) != h for p in c.parts):
            return Violation("copy parts must have size h", idx)
        if not c.is_valid_in(G):
            return Violation("copy is not a K_{h,h,h} in the host", (idx, c.to_json()))
    seen: dict[tuple[int, int], int] = {}
    for idx, c in enumerate(copies):
        for v in c.vertices():
            if v in seen:
                return Violation("copies not disjoint", (seen[v], idx, v))
            seen[v] = idx
    total = sum(G.sizes)
    if len(seen) != total:
        missing = next((i, v) for i in range(3) for v in range(G.sizes[i]) if (i, v) not in seen)
        return Violation("copies do not cover all vertices", missing)
    if G.is_balanced and len(copies) != G.N // h:
        return Violation("wrong number of copies", len(copies))
    return None


# ---------------------------------------------------------------------------
# Very extreme case


def gamma3_adjacent(i: int, j: int, i2: int, j2: int) -> bool:
    """Adjacency of the vertices h_{i,j}, h_{i2,j2} of Gamma_3 (0-based indices)."""
    if i == i2:
        return False
    if j != j2:
        return j == 0 or j2 == 0
    return j >= 1


def very_extreme_violations(
    G: TripartiteGraph, layout: ColumnLayout, h: int, min_cell: int | None = None
) -> list[Violation]:
    """Vertices with more than ``3h-3`` non-neighbours in a Gamma_3-edge cell.

    Cells ``A^(i)_j`` play the role of ``h_{i,j}``.  ``min_cell`` additionally
    enforces a lower bound on every cell size.
    """
    out = []
    sizes = layout.cell_sizes()
    if min_cell is not None:
        for i in range(3):
            for j in range(3):
                if sizes[i][j] < min_cell:
                    out.append(Violation("cell too small", ((i, j), sizes[i][j])))
    allowed = 3 * h - 3
    for i in range(3):
        for j in range(3):
            for i2 in range(3):
                for j2 in range(3):
                    if not gamma3_adjacent(i, j, i2, j2):
                        continue
                    cell, other = layout.cells[i][j], layout.cells[i2][j2]
                    if not cell or not other:
                        continue
                    sub = G.adj(i, i2)[np.ix_(cell, other)]
                    missing = len(other) - sub.sum(axis=1)
                    for x in np.flatnonzero(missing > allowed):
                        out.append(
                            Violation(
                                "too many non-neighbours",
                                ((i, cell[int(x)]), (i2, j2), int(missing[x])),
                            )
                        )
    return out
