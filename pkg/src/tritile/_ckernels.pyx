# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts and visiting order as ``_pykernels``."""

import time

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdint cimport int32_t, int64_t, uint32_t
from libc.stdlib cimport free, malloc

cdef long long DEADLINE_STRIDE = 1024

cdef int FOUND = 1
cdef int EXHAUSTED = 0
cdef int OUT_OF_NODES = -1
cdef int OUT_OF_TIME = -2


cdef class _Search:
    cdef int n_rows, n_cols
    cdef int32_t *row_ptr
    cdef int32_t *ent_col
    cdef int32_t *ent_cnt
    cdef int32_t *col_ptr
    cdef int32_t *col_rows
    cdef int32_t *demand
    cdef int32_t *path
    cdef int depth
    cdef long long nodes, node_budget
    cdef object deadline
    cdef set failed
    cdef Py_ssize_t memo_limit
    cdef int status

    def __cinit__(self):
        self.row_ptr = NULL
        self.ent_col = NULL
        self.ent_cnt = NULL
        self.col_ptr = NULL
        self.col_rows = NULL
        self.demand = NULL
        self.path = NULL

    def __dealloc__(self):
        free(self.row_ptr)
        free(self.ent_col)
        free(self.ent_cnt)
        free(self.col_ptr)
        free(self.col_rows)
        free(self.demand)
        free(self.path)

    cdef inline bint fits(self, int r):
        cdef int e
        for e in range(self.row_ptr[r], self.row_ptr[r + 1]):
            if self.ent_cnt[e] > self.demand[self.ent_col[e]]:
                return False
        return True

    cdef inline void apply(self, int r, int sign):
        cdef int e
        for e in range(self.row_ptr[r], self.row_ptr[r + 1]):
            self.demand[self.ent_col[e]] -= sign * self.ent_cnt[e]

    cdef int rec(self) except -3:
        cdef int c, i, r, cnt, best_c, best_n, res
        cdef bytes key
        self.nodes += 1
        if self.nodes > self.node_budget:
            self.status = OUT_OF_NODES
            return -1
        if self.deadline is not None and self.nodes % DEADLINE_STRIDE == 0:
            if time.monotonic() > self.deadline:
                self.status = OUT_OF_TIME
                return -1
        key = PyBytes_FromStringAndSize(<char *> self.demand, self.n_cols * sizeof(int32_t))
        if key in self.failed:
            return 0
        best_c = -1
        best_n = -1
        for c in range(self.n_cols):
            if self.demand[c] == 0:
                continue
            cnt = 0
            for i in range(self.col_ptr[c], self.col_ptr[c + 1]):
                if self.fits(self.col_rows[i]):
                    cnt += 1
                    if best_n >= 0 and cnt >= best_n:
                        break
            if best_n < 0 or cnt < best_n:
                best_c = c
                best_n = cnt
                if cnt == 0:
                    break
        if best_c < 0:
            return 1
        if best_n > 0:
            for i in range(self.col_ptr[best_c], self.col_ptr[best_c + 1]):
                r = self.col_rows[i]
                if not self.fits(r):
                    continue
                self.apply(r, 1)
                self.path[self.depth] = r
                self.depth += 1
                res = self.rec()
                if res != 0:
                    return res
                self.depth -= 1
                self.apply(r, -1)
        if len(self.failed) < self.memo_limit:
            self.failed.add(key)
        return 0


def exact_cover_search(row_cols, row_cnts, demands, node_budget, deadline=None, memo_limit=1 << 22):
    cdef _Search s = _Search()
    cdef int n_rows = len(row_cols)
    cdef int n_cols = len(demands)
    cdef int r, c, e, k, total_demand
    s.n_rows = n_rows
    s.n_cols = n_cols
    n_ent = sum(len(cols) for cols in row_cols)
    s.row_ptr = <int32_t *> malloc((n_rows + 1) * sizeof(int32_t))
    s.ent_col = <int32_t *> malloc((n_ent + 1) * sizeof(int32_t))
    s.ent_cnt = <int32_t *> malloc((n_ent + 1) * sizeof(int32_t))
    s.col_ptr = <int32_t *> malloc((n_cols + 1) * sizeof(int32_t))
    s.col_rows = <int32_t *> malloc((n_ent + 1) * sizeof(int32_t))
    s.demand = <int32_t *> malloc((n_cols + 1) * sizeof(int32_t))
    total_demand = sum(demands)
    s.path = <int32_t *> malloc((total_demand + 1) * sizeof(int32_t))
    if (s.row_ptr == NULL or s.ent_col == NULL or s.ent_cnt == NULL or s.col_ptr == NULL
            or s.col_rows == NULL or s.demand == NULL or s.path == NULL):
        raise MemoryError()
    counts = [0] * (n_cols + 1)
    e = 0
    for r in range(n_rows):
        s.row_ptr[r] = e
        for c, k in zip(row_cols[r], row_cnts[r]):
            s.ent_col[e] = c
            s.ent_cnt[e] = k
            counts[c] += 1
            e += 1
    s.row_ptr[n_rows] = e
    s.col_ptr[0] = 0
    for c in range(n_cols):
        s.col_ptr[c + 1] = s.col_ptr[c] + counts[c]
        s.demand[c] = demands[c]
    fill = [s.col_ptr[c] for c in range(n_cols)]
    for r in range(n_rows):
        for c in row_cols[r]:
            s.col_rows[fill[c]] = r
            fill[c] += 1
    s.depth = 0
    s.nodes = 0
    s.node_budget = node_budget
    s.deadline = deadline
    s.failed = set()
    s.memo_limit = memo_limit
    s.status = EXHAUSTED
    res = s.rec()
    if res == 1:
        return FOUND, [s.path[i] for i in range(s.depth)], s.nodes
    if res == 0:
        return EXHAUSTED, [], s.nodes
    return s.status, [], s.nodes


cdef extern from *:
    int __builtin_popcount(unsigned int)


cdef inline int _popcount(uint32_t x):
    return __builtin_popcount(x)


def irregular_scan(colmasks, int na, int nb, int xmin, int kmin, int mode, p, q):
    if na > 31 or nb > 64:
        raise ValueError("irregular_scan supports at most 31 x 64 vertices")
    cdef uint32_t cm[64]
    cdef int counts[64]
    cdef int y, k, x, j, t, total = 0
    cdef uint32_t X, limit
    cdef int64_t top, bot, xk, n = na * nb
    cdef int64_t P = p, Q = q
    for y in range(nb):
        cm[y] = colmasks[y]
        total += _popcount(cm[y])
    limit = (<uint32_t> 1) << na
    X = 1
    while X < limit:
        x = _popcount(X)
        if x >= xmin:
            for y in range(nb):
                t = _popcount(cm[y] & X)
                j = y - 1
                while j >= 0 and counts[j] > t:
                    counts[j + 1] = counts[j]
                    j -= 1
                counts[j + 1] = t
            top = 0
            bot = 0
            for k in range(1, nb + 1):
                bot += counts[k - 1]
                top += counts[nb - k]
                if k < kmin:
                    continue
                xk = x * k
                if mode == 0:
                    if (top * n - total * xk) * Q >= P * xk * n:
                        return (X, k, 0)
                    if (total * xk - bot * n) * Q >= P * xk * n:
                        return (X, k, 1)
                elif bot * Q <= P * xk:
                    return (X, k, 1)
        X += 1
    return None
