"""Exact K_{h,h,h}-factor decision, maximum tilings and counting refutations.

Searches run on the *twin quotient* of the host: vertices of one class with
identical neighbourhoods are interchangeable (swapping them is an
automorphism), so they become one column with a multiplicity and a copy
becomes a row recording how many vertices it takes from each twin group.
Exhausting the quotient exhausts the vertex-level exact cover up to
automorphism.  ``reduce_twins=False`` keeps every vertex as its own column.
"""
from __future__ import annotations

import enum
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .checks import Violation, check_tiling_certificate, copy_profile, enumerate_khhh
from .errors import BudgetExceeded, GraphError
from .graph import ColumnLayout, KhhhCopy, TripartiteGraph

DEFAULT_NODE_BUDGET = 10_000_000
DEFAULT_ENUM_BUDGET = 10**8


class Verdict(str, enum.Enum):
    FACTOR = "FACTOR"
    NO_FACTOR = "NO_FACTOR"
    INCONCLUSIVE = "INCONCLUSIVE"


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class TilingCertificate:
    h: int
    copies: list[KhhhCopy]

    def canonical(self) -> "TilingCertificate":
        return TilingCertificate(self.h, sorted(KhhhCopy.of(*c.parts) for c in self.copies))

    def to_json(self) -> dict:
        return {"h": self.h, "copies": [c.to_json() for c in self.copies]}

    @classmethod
    def from_json(cls, data: dict) -> "TilingCertificate":
        return cls(int(data["h"]), [KhhhCopy.of(*parts) for parts in data["copies"]])

    def dumps(self) -> str:
        return dumps_canonical(self.to_json())


@dataclass
class RefutationCertificate:
    kind: str  # PROFILE_INFEASIBLE | SEARCH_EXHAUSTED
    h: int
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "h": self.h, **self.data}

    @classmethod
    def from_json(cls, data: dict) -> "RefutationCertificate":
        rest = {k: v for k, v in data.items() if k not in ("kind", "h")}
        return cls(data["kind"], int(data["h"]), rest)

    def dumps(self) -> str:
        return dumps_canonical(self.to_json())


@dataclass
class SolveResult:
    verdict: Verdict
    certificate: TilingCertificate | RefutationCertificate | None = None
    nodes: int = 0
    reason: str = ""


# ---------------------------------------------------------------------------
# Twin quotient


@dataclass
class Quotient:
    """Twin groups (columns) and copy types (rows) of a host graph."""

    groups: list[tuple[int, tuple[int, ...]]]
    rows: list[tuple[tuple[int, int], ...]]

    @property
    def demands(self) -> list[int]:
        return [len(vs) for _, vs in self.groups]

    def row_arrays(self) -> tuple[list[list[int]], list[list[int]]]:
        return [[c for c, _ in r] for r in self.rows], [[k for _, k in r] for r in self.rows]

    def expand(self, used_rows: Iterable[int], h: int) -> TilingCertificate:
        """Turn a multiset of copy types into concrete copies (twins taken in order)."""
        cursor = [0] * len(self.groups)
        copies = []
        for r in used_rows:
            parts: list[list[int]] = [[], [], []]
            for g, k in self.rows[r]:
                cls, verts = self.groups[g]
                parts[cls].extend(verts[cursor[g]:cursor[g] + k])
                cursor[g] += k
            copies.append(KhhhCopy.of(*parts))
        return TilingCertificate(h, copies).canonical()


def twin_groups(
    G: TripartiteGraph, reduce: bool = True, layout: ColumnLayout | None = None
) -> list[tuple[int, tuple[int, ...]]]:
    """Partition each class into twin groups, ordered by (class, smallest vertex).

    With ``layout`` the groups are additionally split by layout cell.
    """
    groups = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        buckets: dict[tuple, list[int]] = {}
        for u in range(G.sizes[i]):
            if reduce:
                key = tuple(G.nbr_mask(i, u, j) for j in others)
                if layout is not None:
                    key += (layout.cell_of(i, u),)
            else:
                key = (u,)
            buckets.setdefault(key, []).append(u)
        for verts in sorted(buckets.values()):
            groups.append((i, tuple(verts)))
    return groups


def _multisets(options: Sequence[int], caps: Sequence[int], h: int):
    """Count vectors over ``options`` (lex order) summing to ``h`` within ``caps``."""
    out: list[tuple[int, int]] = []

    def rec(pos: int, left: int):
        if left == 0:
            yield tuple(out)
            return
        if pos == len(options):
            return
        g = options[pos]
        for k in range(min(left, caps[g]), 0, -1):
            out.append((g, k))
            yield from rec(pos + 1, left - k)
            out.pop()
        yield from rec(pos + 1, left)

    yield from rec(0, h)


def build_quotient(
    G: TripartiteGraph, h: int, reduce_twins: bool = True, budget: int = DEFAULT_ENUM_BUDGET,
    layout: ColumnLayout | None = None,
) -> Quotient:
    groups = twin_groups(G, reduce_twins, layout)
    caps = [len(v) for _, v in groups]
    by_class = [[g for g, (c, _) in enumerate(groups) if c == i] for i in range(3)]
    reps = [(c, vs[0]) for c, vs in groups]

    def adjacent(a: int, b: int) -> bool:
        return G.has_edge(reps[a][0], reps[a][1], reps[b][0], reps[b][1])

    rows = []
    tests = 0
    for m0 in _multisets(by_class[0], caps, h):
        tests += 1
        s0 = [g for g, _ in m0]
        allowed1 = [g for g in by_class[1] if all(adjacent(a, g) for a in s0)]
        for m1 in _multisets(allowed1, caps, h):
            tests += 1
            s01 = s0 + [g for g, _ in m1]
            allowed2 = [g for g in by_class[2] if all(adjacent(a, g) for a in s01)]
            for m2 in _multisets(allowed2, caps, h):
                tests += 1
                if tests > budget:
                    raise BudgetExceeded("copy-type enumeration", budget)
                rows.append(m0 + m1 + m2)
            if tests > budget:
                raise BudgetExceeded("copy-type enumeration", budget)
    return Quotient(groups, rows)


# ---------------------------------------------------------------------------
# Exact decision


def _fits(row, demand) -> bool:
    return all(k <= demand[c] for c, k in row)


def _root_branches(q: Quotient, demand: list[int]) -> tuple[int, list[int]]:
    """Column choice at the root (fewest fitting rows, ties to the lowest index)."""
    best_c, best = -1, None
    for c, d in enumerate(demand):
        if d == 0:
            continue
        fitting = [r for r, row in enumerate(q.rows) if any(cc == c for cc, _ in row) and _fits(row, demand)]
        if best is None or len(fitting) < len(best):
            best_c, best = c, fitting
            if not fitting:
                break
    return best_c, best or []


def _run_branch(args):
    row_cols, row_cnts, demand, budget, deadline, backend = args
    kern = kernels.backends()[backend]
    return kern.exact_cover_search(row_cols, row_cnts, demand, budget, deadline)


def exact_factor_decision(
    G: TripartiteGraph,
    h: int,
    *,
    reduce_twins: bool = True,
    node_budget: int = DEFAULT_NODE_BUDGET,
    enum_budget: int = DEFAULT_ENUM_BUDGET,
    time_budget: float | None = None,
    workers: int = 1,
) -> SolveResult:
    """Decide whether ``G`` has a K_{h,h,h}-factor.

    FACTOR comes with a validated tiling; NO_FACTOR only after the search
    space is exhausted; any budget overrun gives INCONCLUSIVE.  Top-level
    branches are searched independently (each with its own failure memo), so
    the verdict, certificate and node count do not depend on ``workers``.
    """
    N = G.N
    if h < 1 or N % h:
        raise GraphError(f"h={h} must divide N={N}")
    deadline = None if time_budget is None else time.monotonic() + time_budget
    params = {"reduce_twins": reduce_twins, "node_budget": node_budget}
    try:
        q = build_quotient(G, h, reduce_twins, enum_budget)
    except BudgetExceeded as exc:
        return SolveResult(Verdict.INCONCLUSIVE, reason=str(exc))
    demand = q.demands
    row_cols, row_cnts = q.row_arrays()
    nodes = 1
    if N == 0:
        return SolveResult(Verdict.FACTOR, TilingCertificate(h, []), nodes)
    root_col, branches = _root_branches(q, demand)

    def sub_demand(r: int) -> list[int]:
        d = list(demand)
        for c, k in q.rows[r]:
            d[c] -= k
        return d

    tasks = [(row_cols, row_cnts, sub_demand(r), node_budget, deadline, kernels.BACKEND) for r in branches]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = pool.map(_run_branch, tasks)
            results = _fold_branches(branches, outcomes, node_budget, nodes)
    else:
        def sequential():
            used = nodes
            for t in tasks:
                out = _run_branch(t[:3] + (node_budget - used,) + t[4:])
                used += out[2]
                yield out
        results = _fold_branches(branches, sequential(), node_budget, nodes)
    status, path, nodes = results
    if status == kernels.FOUND:
        cert = q.expand(path, h)
        bad = check_tiling_certificate(G, h, cert.to_json())
        if bad is not None:  # pragma: no cover - would be a solver bug
            raise AssertionError(f"solver produced an invalid tiling: {bad}")
        return SolveResult(Verdict.FACTOR, cert, nodes)
    if status == kernels.EXHAUSTED:
        data = {
            "nodes": nodes,
            "params": {
                **params,
                "columns": len(q.groups),
                "rows": len(q.rows),
                "root_column": root_col,
                "root_branches": len(branches),
            },
        }
        return SolveResult(Verdict.NO_FACTOR, RefutationCertificate("SEARCH_EXHAUSTED", h, data), nodes)
    why = "node budget exceeded" if status == kernels.OUT_OF_NODES else "time budget exceeded"
    return SolveResult(Verdict.INCONCLUSIVE, nodes=nodes, reason=why)


def _fold_branches(branches, outcomes, node_budget, nodes):
    """Combine per-branch outcomes in branch order, replaying the sequential budget."""
    for r, (status, path, n) in zip(branches, outcomes):
        if status in (kernels.OUT_OF_NODES, kernels.OUT_OF_TIME) or nodes + n > node_budget:
            return (status if status != kernels.FOUND and status != kernels.EXHAUSTED
                    else kernels.OUT_OF_NODES), [], nodes + n
        nodes += n
        if status == kernels.FOUND:
            return kernels.FOUND, [r] + list(path), nodes
    return kernels.EXHAUSTED, [], nodes


# ---------------------------------------------------------------------------
# Maximum tilings


@dataclass
class MaxTilingResult:
    copies: list[KhhhCopy]
    exact: bool
    upper_bound: int
    nodes: int = 0

    @property
    def size(self) -> int:
        return len(self.copies)


def max_tiling(
    G: TripartiteGraph, h: int, budget: int = 1_000_000, reduce_twins: bool = True,
    enum_budget: int = DEFAULT_ENUM_BUDGET,
) -> MaxTilingResult:
    """Largest set of disjoint copies; ``exact`` iff the search closed within ``budget`` nodes."""
    if h < 1:
        raise ValueError("h must be positive")
    q = build_quotient(G, h, reduce_twins, enum_budget)
    ncols = len(q.groups)
    col_class = [c for c, _ in q.groups]
    col_rows: list[list[int]] = [[] for _ in range(ncols)]
    for r, row in enumerate(q.rows):
        for c, _ in row:
            col_rows[c].append(r)

    def upper(dem) -> int:
        per = [0, 0, 0]
        for c, d in enumerate(dem):
            per[col_class[c]] += d
        return min(p // h for p in per)

    memo: dict[tuple[int, ...], tuple[int, object]] = {}
    nodes = 0

    class _Out(Exception):
        pass

    def best(dem: list[int]) -> int:
        nonlocal nodes
        key = tuple(dem)
        if key in memo:
            return memo[key][0]
        nodes += 1
        if nodes > budget:
            raise _Out
        ub = upper(dem)
        if ub == 0:
            memo[key] = (0, None)
            return 0
        pick, pick_rows = -1, None
        for c in range(ncols):
            if dem[c] == 0:
                continue
            fitting = [r for r in col_rows[c] if _fits(q.rows[r], dem)]
            if pick_rows is None or len(fitting) < len(pick_rows):
                pick, pick_rows = c, fitting
                if not fitting:
                    break
        value, choice = -1, None
        if not pick_rows:
            nxt = list(dem)
            nxt[pick] = 0
            value, choice = best(nxt), ("drop", pick, dem[pick])
        else:
            for r in pick_rows:
                nxt = list(dem)
                for c, k in q.rows[r]:
                    nxt[c] -= k
                v = 1 + best(nxt)
                if v > value:
                    value, choice = v, ("row", r)
                    if value == ub:
                        break
            if value < ub:
                nxt = list(dem)
                nxt[pick] -= 1
                v = best(nxt)
                if v > value:
                    value, choice = v, ("drop", pick, 1)
        memo[key] = (value, choice)
        return value

    root = q.demands
    ub_root = upper(root)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * sum(root) + 1000))
    try:
        best(list(root))
    except _Out:
        cert = _greedy(q, h)
        return MaxTilingResult(cert.copies, False, ub_root, nodes)
    finally:
        sys.setrecursionlimit(limit)
    used, dem = [], list(root)
    while True:
        _, choice = memo[tuple(dem)]
        if choice is None:
            break
        if choice[0] == "row":
            used.append(choice[1])
            for c, k in q.rows[choice[1]]:
                dem[c] -= k
        else:
            dem[choice[1]] -= choice[2]
    cert = q.expand(used, h)
    return MaxTilingResult(cert.copies, True, len(cert.copies), nodes)


def _greedy(q: Quotient, h: int) -> TilingCertificate:
    dem = q.demands
    used = []
    progress = True
    while progress:
        progress = False
        for r, row in enumerate(q.rows):
            if _fits(row, dem):
                for c, k in row:
                    dem[c] -= k
                used.append(r)
                progress = True
                break
    return q.expand(used, h)


# ---------------------------------------------------------------------------
# Profile counting refutation


def layout_id(layout: ColumnLayout) -> str:
    return hashlib.sha256(dumps_canonical([list(map(list, row)) for row in layout.cells]).encode()).hexdigest()[:16]


def _flat(p) -> tuple[int, ...]:
    return tuple(x for row in p for x in row)


def _weight_candidates() -> list[tuple[int, ...]]:
    cands = [w for w in product((0, 1, -1), repeat=9) if any(w)]
    cands.sort(key=lambda w: (sum(1 for x in w if x), [abs(x) for x in w] != sorted([abs(x) for x in w]), w))
    return cands


_WEIGHTS = None


def _weights() -> np.ndarray:
    global _WEIGHTS
    if _WEIGHTS is None:
        _WEIGHTS = np.array(_weight_candidates(), dtype=np.int64)
    return _WEIGHTS


def find_profile_witness(profiles: Sequence, caps: Sequence[int], copies: int, h: int):
    """Short infeasibility proof for the profile system, or ``None``.

    The proof is a list of tightening steps followed by a final contradiction:

    * ``tight`` (w, c): every profile has ``w.p <= c`` and ``w.caps == c*copies``,
      so only profiles with ``w.p == c`` can be used;
    * ``linear`` (w, c): every profile has ``w.p <= c`` but ``w.caps > c*copies``;
    * ``modular`` (w, m): every profile has ``w.p ≡ 0 (mod m)`` but ``w.caps`` does not;
    * ``empty``: no usable profile remains although copies are needed.
    """
    W = _weights()
    caps_arr = np.array(caps, dtype=np.int64)
    current = [tuple(_flat(p)) for p in profiles]
    steps = []
    for _ in range(10):
        if not current:
            if copies > 0:
                return {"steps": steps, "final": {"type": "empty"}}
            return None
        P = np.array(current, dtype=np.int64)
        vals = P @ W.T
        bound = vals.max(axis=0)
        total = W @ caps_arr
        hit = np.flatnonzero(total > bound * copies)
        if len(hit):
            k = int(hit[0])
            return {"steps": steps, "final": {"type": "linear", "weights": W[k].tolist(), "bound": int(bound[k])}}
        for m in range(2, 6 * h + 1):
            ok = np.all(vals % m == 0, axis=0) & (total % m != 0)
            hit = np.flatnonzero(ok)
            if len(hit):
                k = int(hit[0])
                return {"steps": steps, "final": {"type": "modular", "weights": W[k].tolist(), "modulus": m}}
        tight = (total == bound * copies) & np.any(vals < bound, axis=0)
        hit = np.flatnonzero(tight)
        if not len(hit):
            return None
        k = int(hit[0])
        steps.append({"type": "tight", "weights": W[k].tolist(), "bound": int(bound[k])})
        current = [p for p, v in zip(current, vals[:, k]) if v == bound[k]]
    return None


def _naive_profile_feasible(profiles: Sequence[tuple[int, ...]], caps: Sequence[int], copies: int) -> bool:
    """Plain recursive enumeration of profile multiplicities (no memo, no pruning tricks)."""
    profiles = list(profiles)

    def rec(idx: int, left: tuple[int, ...], k: int) -> bool:
        if k == 0:
            return not any(left)
        if idx == len(profiles):
            return False
        p = profiles[idx]
        most = min([k] + [left[c] // p[c] for c in range(9) if p[c]])
        for x in range(most, -1, -1):
            nxt = tuple(left[c] - x * p[c] for c in range(9))
            if rec(idx + 1, nxt, k - x):
                return True
        return False

    return rec(0, tuple(caps), copies)


def realized_profiles(G: TripartiteGraph, h: int, layout: ColumnLayout, budget: int = DEFAULT_ENUM_BUDGET):
    seen = set()
    for c in enumerate_khhh(G, h, budget):
        seen.add(copy_profile(c, layout))
    return sorted(seen)


def profile_counting_refutation(
    G: TripartiteGraph, h: int, layout: ColumnLayout, enum_budget: int = DEFAULT_ENUM_BUDGET,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SolveResult:
    """Refute a factor by counting how copies can meet the layout's cells.

    Every copy of K_{h,h,h} meets the nine cells in one of the realised
    profiles; a factor would give non-negative integers ``x_p`` with
    ``sum x_p = N/h`` and ``sum x_p p = cell sizes``.  Infeasibility of that
    system refutes the factor; feasibility proves nothing (disjointness is
    ignored), so it is reported as INCONCLUSIVE.
    """
    N = G.N
    if h < 1 or N % h:
        raise GraphError(f"h={h} must divide N={N}")
    layout.validate(G.sizes)
    try:
        profiles = realized_profiles(G, h, layout, enum_budget)
    except BudgetExceeded as exc:
        return SolveResult(Verdict.INCONCLUSIVE, reason=str(exc))
    caps = _flat(layout.cell_sizes())
    copies = N // h
    flat = [_flat(p) for p in profiles]
    row_cols = [[c for c in range(9) if p[c]] for p in flat]
    row_cnts = [[p[c] for c in range(9) if p[c]] for p in flat]
    if not flat:
        status, path, nodes = (kernels.EXHAUSTED if copies else kernels.FOUND), [], 1
    else:
        status, path, nodes = kernels.exact_cover_search(row_cols, row_cnts, list(caps), node_budget)
    if status == kernels.FOUND:
        counts: dict[int, int] = {}
        for r in path:
            counts[r] = counts.get(r, 0) + 1
        return SolveResult(
            Verdict.INCONCLUSIVE, nodes=nodes,
            reason=f"profile system feasible: {sorted(counts.items())}",
        )
    if status != kernels.EXHAUSTED:
        return SolveResult(Verdict.INCONCLUSIVE, nodes=nodes, reason="profile search budget exceeded")
    witness = find_profile_witness(profiles, caps, copies, h)
    if witness is None:
        witness = {"steps": [], "final": {"type": "exhaustive", "nodes": nodes}}
    data = {
        "layout_id": layout_id(layout),
        "capacities": [list(r) for r in layout.cell_sizes()],
        "copies_needed": copies,
        "profiles": [[list(r) for r in p] for p in profiles],
        "witness": witness,
    }
    return SolveResult(Verdict.NO_FACTOR, RefutationCertificate("PROFILE_INFEASIBLE", h, data), nodes)


def check_refutation_certificate(
    cert: RefutationCertificate | dict, G: TripartiteGraph | None = None, layout: ColumnLayout | None = None
) -> Violation | None:
    """Re-check a PROFILE_INFEASIBLE certificate without the search engine.

    With ``G`` and ``layout`` the realised profiles, capacities and copy count
    are re-derived from the graph as well.
    """
    if isinstance(cert, dict):
        cert = RefutationCertificate.from_json(cert)
    if cert.kind != "PROFILE_INFEASIBLE":
        return Violation("only PROFILE_INFEASIBLE certificates are self-checking", cert.kind)
    d = cert.data
    h = cert.h
    profiles = [tuple(_flat(p)) for p in d["profiles"]]
    caps = tuple(_flat(d["capacities"]))
    copies = int(d["copies_needed"])
    for p in profiles:
        if len(p) != 9 or any(sum(p[3 * i:3 * i + 3]) != h for i in range(3)) or min(p) < 0:
            return Violation("malformed profile", p)
    if G is not None:
        if layout is None:
            return Violation("a layout is needed to re-derive profiles")
        if copies * h != G.N:
            return Violation("copy count does not match the graph", copies)
        if caps != _flat(layout.cell_sizes()):
            return Violation("capacities do not match the layout")
        if layout_id(layout) != d.get("layout_id"):
            return Violation("layout id mismatch")
        listed = set(profiles)
        for p in realized_profiles(G, h, layout):
            if _flat(p) not in listed:
                return Violation("realised profile missing from certificate", p)
    if sum(caps) != 3 * h * copies:
        return Violation("capacities do not add up to the copy count")
    current = list(profiles)
    w = d["witness"]
    for step in w.get("steps", []):
        wt, c = step["weights"], step["bound"]
        if step["type"] != "tight":
            return Violation("unknown step", step)
        if any(_dot(wt, p) > c for p in current):
            return Violation("tightening bound does not hold", step)
        if _dot(wt, caps) != c * copies:
            return Violation("tightening step is not tight", step)
        current = [p for p in current if _dot(wt, p) == c]
    final = w["final"]
    kind = final["type"]
    if kind == "empty":
        return None if (not current and copies > 0) else Violation("profiles remain", len(current))
    if kind == "linear":
        wt, c = final["weights"], final["bound"]
        if any(_dot(wt, p) > c for p in current):
            return Violation("linear bound does not hold", final)
        return None if _dot(wt, caps) > c * copies else Violation("linear bound not violated", final)
    if kind == "modular":
        wt, m = final["weights"], final["modulus"]
        if any(_dot(wt, p) % m for p in current):
            return Violation("congruence does not hold", final)
        return None if _dot(wt, caps) % m else Violation("capacities satisfy the congruence", final)
    if kind == "exhaustive":
        if _naive_profile_feasible(current, caps, copies):
            return Violation("profile system is feasible")
        return None
    return Violation("unknown witness type", kind)


def _dot(w: Sequence[int], p: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(w, p))
