"""Acceptance gate: one pass/fail line per criterion 1-9."""
import time
from fractions import Fraction

import numpy as np
import pytest

from tritile import (
    RefutationCertificate,
    Verdict,
    check_refutation_certificate,
    check_tiling_certificate,
    column_intersection_shape,
    enumerate_khhh,
    eps_regular_exhaustive,
    exact_factor_decision,
    gamma3_blowup,
    lb0_graph,
    lb12_graph,
    lbvexc_graph,
    profile_counting_refutation,
    q_graph,
    slicing_property_test,
    very_extreme_violations,
)
from tritile.checks import ShapeKind
from tritile.errors import ConstructionError
from tritile.experiments import _structure_ok, oracle_instance, slicing_pairs

from .oracles import naive_copies, naive_min_pair_degree, naive_triangle_factor

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str = "") -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    RESULTS[n] = line
    print(line)
    assert ok, line


def certificates_1_to_4() -> list[str]:
    out = []
    for con, h in ((lb0_graph(2, 1), 2), (lb0_graph(2, 2), 2), (lb12_graph(2, 1, 1), 2)):
        out.append(exact_factor_decision(con.graph, h).certificate.dumps())
        out.append(profile_counting_refutation(con.graph, h, con.layout).certificate.dumps())
    vx = lbvexc_graph(2, 1)
    out.append(profile_counting_refutation(vx.graph, 2, vx.layout).certificate.dumps())
    for N in (9, 6):
        out.append(exact_factor_decision(gamma3_blowup(N).graph, 1).certificate.dumps())
    return out


def test_criterion_1_lb0():
    t0 = time.perf_counter()
    ok, notes = True, []
    for q, delta in ((1, 4), (2, 8)):
        con = lb0_graph(2, q)
        ex = exact_factor_decision(con.graph, 2)
        rf = profile_counting_refutation(con.graph, 2, con.layout)
        good = (
            _structure_ok(con)
            and naive_min_pair_degree(con.graph) == delta
            and ex.verdict == Verdict.NO_FACTOR
            and rf.verdict == Verdict.NO_FACTOR
            and check_refutation_certificate(rf.certificate, con.graph, con.layout) is None
        )
        ok &= good
        notes.append(f"q={q} delta={naive_min_pair_degree(con.graph)} {ex.verdict.value}/{rf.verdict.value}")
    dt = time.perf_counter() - t0
    record(1, ok and dt < 60, "; ".join(notes) + f"; {dt:.2f}s")


def test_criterion_2_lb12():
    t0 = time.perf_counter()
    con = lb12_graph(2, 1, 1)
    ex = exact_factor_decision(con.graph, 2)
    rf = profile_counting_refutation(con.graph, 2, con.layout)
    ok = (
        con.graph.sizes == (8, 8, 8)
        and _structure_ok(con)
        and naive_min_pair_degree(con.graph) == 5
        and ex.verdict == Verdict.NO_FACTOR
        and rf.verdict == Verdict.NO_FACTOR
        and check_refutation_certificate(rf.certificate, con.graph, con.layout) is None
    )
    dt = time.perf_counter() - t0
    record(2, ok and dt < 60, f"{ex.verdict.value}/{rf.verdict.value}; {dt:.2f}s")


def test_criterion_3_lbvexc():
    t0 = time.perf_counter()
    con = lbvexc_graph(2, 1)
    G = con.graph
    rf = profile_counting_refutation(G, 2, con.layout)
    cert = rf.certificate
    ok = (
        sum(G.sizes) == 54
        and naive_min_pair_degree(G) == 12
        and very_extreme_violations(G, con.layout, 2) == []
        and rf.verdict == Verdict.NO_FACTOR
        and isinstance(cert, RefutationCertificate)
        and cert.kind == "PROFILE_INFEASIBLE"
        and check_refutation_certificate(cert, G, con.layout) is None
    )
    dt = time.perf_counter() - t0
    record(3, ok and dt < 300, f"{cert.kind if cert else None}; {dt:.2f}s")


def test_criterion_4_gamma():
    t0 = time.perf_counter()
    g9, g6 = gamma3_blowup(9).graph, gamma3_blowup(6).graph
    r9, r6 = exact_factor_decision(g9, 1), exact_factor_decision(g6, 1)
    ok = (
        naive_min_pair_degree(g9) == 6
        and r9.verdict == Verdict.NO_FACTOR
        and r6.verdict == Verdict.FACTOR
        and check_tiling_certificate(g6, 1, r6.certificate.to_json()) is None
    )
    dt = time.perf_counter() - t0
    record(4, ok and dt < 30, f"N=9 {r9.verdict.value}, N=6 {r6.verdict.value}; {dt:.2f}s")


def _pair_ok(m: np.ndarray, d: int) -> bool:
    m = m.astype(np.int64)
    if not ((m.sum(axis=0) == d).all() and (m.sum(axis=1) == d).all()):
        return False
    common = m @ m.T
    np.fill_diagonal(common, 0)
    return int(common.max(initial=0)) <= 1


def test_criterion_5_gadgets():
    built, failures, skipped = 0, [], []
    for d in (1, 2, 3):
        for n in range(d * d + d + 1, 41):
            try:
                G = q_graph(n, d).graph
            except ConstructionError:
                skipped.append((n, d))
                continue
            built += 1
            a01, a02, a12 = (G.adj(i, j).astype(np.int64) for i, j in ((0, 1), (0, 2), (1, 2)))
            triangles = int(((a01 @ a12) * a02).sum())
            if not (all(_pair_ok(m, d) for m in (a01, a02, a12)) and triangles == 0):
                failures.append((n, d))
    record(5, built > 0 and not failures, f"{built} gadgets, {len(skipped)} without a gadget, failures {failures}")


def test_criterion_6_oracle():
    bad = []
    for seed in range(200):
        G = oracle_instance(seed)
        assert G.sizes[0] <= 4
        if (exact_factor_decision(G, 1).verdict == Verdict.FACTOR) != naive_triangle_factor(G):
            bad.append(seed)
    record(6, not bad, f"200 instances, disagreements {bad}")


def test_criterion_7_structural_shapes():
    counts, other = {}, []
    for name, con in (("lb0(2,1)", lb0_graph(2, 1)), ("lb12(2,1,1)", lb12_graph(2, 1, 1))):
        copies = list(enumerate_khhh(con.graph, 2))
        assert [c.parts for c in copies] == [tuple(map(tuple, p)) for p in naive_copies(con.graph, 2)]
        counts[name] = len(copies)
        for c in copies:
            for j in range(3):
                s = column_intersection_shape(c, con.layout, j, con.graph)
                if s.kind == ShapeKind.OTHER:
                    other.append((name, c.parts, j))
    record(7, not other, f"copies {counts}, OTHER shapes {len(other)}")


def test_criterion_8_regularity():
    rng = np.random.default_rng(8)
    bad_witness = 0
    for _ in range(200):
        na, nb = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        m = rng.random((na, nb)) < rng.random()
        eps = Fraction(int(rng.integers(1, 6)), 10)
        v = eps_regular_exhaustive(m, eps)
        if not v.regular:
            X, Y = v.witness.X, v.witness.Y
            sub = m[np.ix_(X, Y)]
            dev = abs(Fraction(int(sub.sum()), sub.size) - Fraction(int(m.sum()), m.size))
            if not (len(X) > eps * m.shape[0] and len(Y) > eps * m.shape[1] and dev >= eps):
                bad_witness += 1
    pairs = slicing_pairs(20, 12, Fraction(2, 5))
    violations, samples = 0, 0
    for seed, m in pairs:
        assert max(m.shape) <= 16 and eps_regular_exhaustive(m, Fraction(2, 5)).regular
        rep = slicing_property_test(m, Fraction(2, 5), Fraction(1, 2), 200, seed)
        violations += rep.violations
        samples += rep.trials
    ok = bad_witness == 0 and len(pairs) == 20 and violations == 0 and samples == 20 * 200
    record(8, ok, f"bad witnesses {bad_witness}; {len(pairs)} pairs, {samples} samples, {violations} violations")


def test_criterion_9_determinism():
    first, second = certificates_1_to_4(), certificates_1_to_4()
    same = [a.encode() == b.encode() for a, b in zip(first, second)]
    record(9, len(first) == 9 and all(same), f"{sum(same)}/{len(first)} certificates identical")
