"""Pure-Python kernels.  Reference behaviour for ``_ckernels.pyx``.

Both backends must visit nodes in the same order and return identical
results, including node counts.
"""
from __future__ import annotations

import sys
import time

FOUND, EXHAUSTED, OUT_OF_NODES, OUT_OF_TIME = 1, 0, -1, -2
DEADLINE_STRIDE = 1024


class _Stop(Exception):
    def __init__(self, status: int):
        self.status = status


def exact_cover_search(row_cols, row_cnts, demands, node_budget, deadline=None, memo_limit=1 << 22):
    """Exact cover with multiplicities.

    Pick rows (each at most as often as it fits) so every column ``c`` is
    covered exactly ``demands[c]`` times.  Rows are lists of column indices
    ``row_cols[r]`` with multiplicities ``row_cnts[r]``.  Branches on the
    column with the fewest fitting rows; failed residual demand vectors are
    memoised (at most ``memo_limit`` of them).

    Returns ``(status, rows_used, nodes)``.
    """
    n_cols = len(demands)
    col_rows: list[list[int]] = [[] for _ in range(n_cols)]
    for r, cols in enumerate(row_cols):
        for c in cols:
            col_rows[c].append(r)
    entries = [list(zip(cols, cnts)) for cols, cnts in zip(row_cols, row_cnts)]
    demand = list(demands)
    failed: set[tuple[int, ...]] = set()
    path: list[int] = []
    nodes = 0

    def fits(r: int) -> bool:
        for c, k in entries[r]:
            if k > demand[c]:
                return False
        return True

    def rec() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise _Stop(OUT_OF_NODES)
        if deadline is not None and nodes % DEADLINE_STRIDE == 0 and time.monotonic() > deadline:
            raise _Stop(OUT_OF_TIME)
        key = tuple(demand)
        if key in failed:
            return False
        best_c, best_n = -1, -1
        for c in range(n_cols):
            if demand[c] == 0:
                continue
            cnt = 0
            for r in col_rows[c]:
                if fits(r):
                    cnt += 1
                    if best_n >= 0 and cnt >= best_n:
                        break
            if best_n < 0 or cnt < best_n:
                best_c, best_n = c, cnt
                if cnt == 0:
                    break
        if best_c < 0:
            return True
        if best_n > 0:
            for r in col_rows[best_c]:
                if not fits(r):
                    continue
                for c, k in entries[r]:
                    demand[c] -= k
                path.append(r)
                if rec():
                    return True
                path.pop()
                for c, k in entries[r]:
                    demand[c] += k
        if len(failed) < memo_limit:
            failed.add(key)
        return False

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, sum(demands) + 1000))
    try:
        status = FOUND if rec() else EXHAUSTED
    except _Stop as stop:
        return stop.status, [], nodes
    finally:
        sys.setrecursionlimit(limit)
    return status, list(path), nodes


def _popcount(x: int) -> int:
    return bin(x).count("1")


def irregular_scan(colmasks, na, nb, xmin, kmin, mode, p, q):
    """First subset pair violating a density condition, in canonical order.

    ``colmasks[y]`` is the neighbourhood of ``y`` in ``B`` as a bitmask over
    ``A``.  ``X`` runs over bitmasks in increasing order with ``|X| >= xmin``,
    then ``k = |Y|`` increasing from ``kmin``; for each the extremal
    ``e(X, Y)`` over ``|Y| = k`` is tested.

    mode 0: ``|d(X,Y) - d(A,B)| >= p/q`` (max side tested before min side).
    mode 1: ``d(X,Y) <= p/q``.

    Returns ``(X, k, side)`` with side 0 for the maximising ``Y`` and 1 for the
    minimising one, or ``None``.
    """
    n = na * nb
    total = sum(_popcount(m) for m in colmasks)
    for X in range(1, 1 << na):
        x = _popcount(X)
        if x < xmin:
            continue
        counts = sorted(_popcount(m & X) for m in colmasks)
        top = 0
        bot = 0
        for k in range(1, nb + 1):
            bot += counts[k - 1]
            top += counts[nb - k]
            if k < kmin:
                continue
            xk = x * k
            if mode == 0:
                if (top * n - total * xk) * q >= p * xk * n:
                    return (X, k, 0)
                if (total * xk - bot * n) * q >= p * xk * n:
                    return (X, k, 1)
            elif bot * q <= p * xk:
                return (X, k, 1)
    return None
