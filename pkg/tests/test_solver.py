import json

import numpy as np
import pytest

from tritile import kernels
from tritile.checks import check_tiling_certificate
from tritile.constructions import (
    gamma3_blowup,
    lb0_graph,
    lb12_graph,
    lbvexc_graph,
    random_graph,
    random_min_degree_graph,
)
from tritile.errors import GraphError
from tritile.graph import ColumnLayout, TripartiteGraph
from tritile.solver import (
    RefutationCertificate,
    TilingCertificate,
    Verdict,
    _naive_profile_feasible,
    build_quotient,
    check_refutation_certificate,
    exact_factor_decision,
    max_tiling,
    profile_counting_refutation,
    twin_groups,
)

from .oracles import naive_copies, naive_max_triangle_packing, naive_triangle_factor


def test_k222_single_copy():
    res = exact_factor_decision(TripartiteGraph.complete(2), 2)
    assert res.verdict == Verdict.FACTOR
    assert res.certificate.dumps() == '{"copies":[[[0,1],[0,1],[0,1]]],"h":2}'


def test_h_must_divide_n():
    with pytest.raises(GraphError):
        exact_factor_decision(TripartiteGraph.complete(3), 2)


@pytest.mark.parametrize("reduce_twins", [True, False])
def test_lb0_no_factor(reduce_twins):
    for q in (1, 2):
        res = exact_factor_decision(lb0_graph(2, q).graph, 2, reduce_twins=reduce_twins)
        assert res.verdict == Verdict.NO_FACTOR
        assert res.certificate.kind == "SEARCH_EXHAUSTED"
        assert res.certificate.data["nodes"] == res.nodes


@pytest.mark.parametrize("reduce_twins", [True, False])
def test_gamma_blowup(reduce_twins):
    assert exact_factor_decision(gamma3_blowup(9).graph, 1, reduce_twins=reduce_twins).verdict == Verdict.NO_FACTOR
    res = exact_factor_decision(gamma3_blowup(6).graph, 1, reduce_twins=reduce_twins)
    assert res.verdict == Verdict.FACTOR
    assert check_tiling_certificate(gamma3_blowup(6).graph, 1, res.certificate.to_json()) is None


def test_gamma3_itself_has_no_factor():
    assert exact_factor_decision(gamma3_blowup(3).graph, 1).verdict == Verdict.NO_FACTOR


def test_budget_gives_inconclusive():
    G = gamma3_blowup(9).graph
    res = exact_factor_decision(G, 1, reduce_twins=False, node_budget=50)
    assert res.verdict == Verdict.INCONCLUSIVE and res.certificate is None
    res = exact_factor_decision(G, 1, reduce_twins=False, enum_budget=5)
    assert res.verdict == Verdict.INCONCLUSIVE


def test_time_budget_gives_inconclusive():
    G = gamma3_blowup(15).graph
    res = exact_factor_decision(G, 1, reduce_twins=False, time_budget=0.0)
    assert res.verdict == Verdict.INCONCLUSIVE
    assert "time" in res.reason


@pytest.mark.parametrize("seed", range(200))
def test_oracle_h1(seed):
    rng = np.random.default_rng(1000 + seed)
    N = int(rng.integers(1, 5))
    G = random_graph(N, float(rng.choice([0.55, 0.75, 0.9])), 1000 + seed)
    res = exact_factor_decision(G, 1)
    assert (res.verdict == Verdict.FACTOR) == naive_triangle_factor(G)
    assert res.verdict != Verdict.INCONCLUSIVE


def _naive_factor(G, h):
    copies = naive_copies(G, h)

    def rec(used, start, count):
        if count * h == G.N:
            return True
        for k in range(start, len(copies)):
            vs = {(i, v) for i, p in enumerate(copies[k]) for v in p}
            if not vs & used and rec(used | vs, k + 1, count + 1):
                return True
        return False

    return rec(frozenset(), 0, 0)


@pytest.mark.parametrize("seed", range(40))
def test_oracle_h2(seed):
    G = random_graph(4, 0.85, seed)
    expect = _naive_factor(G, 2)
    assert (exact_factor_decision(G, 2).verdict == Verdict.FACTOR) == expect
    assert (exact_factor_decision(G, 2, reduce_twins=False).verdict == Verdict.FACTOR) == expect


def test_twin_groups():
    con = lb0_graph(2, 1)
    groups = twin_groups(con.graph)
    assert sum(len(v) for _, v in groups) == 18
    assert all(len(v) == 1 for _, v in twin_groups(con.graph, reduce=False))
    G = TripartiteGraph.complete(3)
    assert twin_groups(G) == [(0, (0, 1, 2)), (1, (0, 1, 2)), (2, (0, 1, 2))]
    assert len(build_quotient(G, 1).rows) == 1


def test_workers_do_not_change_certificates():
    for G, h in [(gamma3_blowup(6).graph, 1), (gamma3_blowup(9).graph, 1), (lb0_graph(2, 2).graph, 2)]:
        a = exact_factor_decision(G, h, reduce_twins=False)
        b = exact_factor_decision(G, h, reduce_twins=False, workers=3)
        assert a.verdict == b.verdict and a.nodes == b.nodes
        assert a.certificate.dumps() == b.certificate.dumps()


def test_workers_respect_node_budget():
    G = gamma3_blowup(9).graph
    full = exact_factor_decision(G, 1, reduce_twins=False)
    for workers in (1, 3):
        res = exact_factor_decision(G, 1, reduce_twins=False, node_budget=full.nodes - 1, workers=workers)
        assert res.verdict == Verdict.INCONCLUSIVE
        res = exact_factor_decision(G, 1, reduce_twins=False, node_budget=full.nodes, workers=workers)
        assert res.verdict == Verdict.NO_FACTOR


def test_random_dense_instance_has_factor():
    for seed in range(5):
        G = random_min_degree_graph(6, 5, seed)
        assert exact_factor_decision(G, 1).verdict == Verdict.FACTOR


def test_certificate_roundtrip():
    res = exact_factor_decision(gamma3_blowup(6).graph, 1)
    again = TilingCertificate.from_json(json.loads(res.certificate.dumps()))
    assert again.dumps() == res.certificate.dumps()
    ref = profile_counting_refutation(lb0_graph(2, 2).graph, 2, lb0_graph(2, 2).layout).certificate
    assert RefutationCertificate.from_json(json.loads(ref.dumps())).dumps() == ref.dumps()


# -- maximum tilings


def test_max_tiling_k444():
    res = max_tiling(TripartiteGraph.complete(4), 2)
    assert res.size == 2 and res.exact
    assert check_tiling_certificate(TripartiteGraph.complete(4), 2, TilingCertificate(2, res.copies).to_json()) is None


def test_max_tiling_lb0():
    res = max_tiling(lb0_graph(2, 1).graph, 2)
    assert res.exact and res.size == 0 <= 2


def test_max_tiling_empty():
    res = max_tiling(TripartiteGraph.empty(3), 1)
    assert res.size == 0 and res.exact


@pytest.mark.parametrize("seed", range(25))
def test_max_tiling_matches_naive(seed):
    G = random_graph(4, 0.6, 500 + seed)
    res = max_tiling(G, 1)
    assert res.exact
    assert res.size == naive_max_triangle_packing(G)
    assert res.size == max_tiling(G, 1, reduce_twins=False).size


def test_max_tiling_budget_is_heuristic():
    G = random_graph(5, 0.7, 3)
    res = max_tiling(G, 1, budget=2, reduce_twins=False)
    assert not res.exact
    used = [v for c in res.copies for v in c.vertices()]
    assert len(used) == len(set(used))


# -- profile refutation


def test_refutation_lb0():
    con = lb0_graph(2, 2)
    res = profile_counting_refutation(con.graph, 2, con.layout)
    assert res.verdict == Verdict.NO_FACTOR
    cert = res.certificate
    assert cert.kind == "PROFILE_INFEASIBLE"
    assert cert.data["witness"]["final"]["type"] == "linear"
    # no realised profile puts more than h vertices into the last column
    assert all(sum(row[2] for row in p) <= 2 for p in cert.data["profiles"])
    assert check_refutation_certificate(cert, con.graph, con.layout) is None


def test_refutation_lb0_2_1_has_no_profiles():
    con = lb0_graph(2, 1)
    cert = profile_counting_refutation(con.graph, 2, con.layout).certificate
    assert cert.data["profiles"] == []
    assert cert.data["witness"]["final"] == {"type": "empty"}


def test_refutation_lb12():
    con = lb12_graph(2, 1, 1)
    res = profile_counting_refutation(con.graph, 2, con.layout)
    assert res.verdict == Verdict.NO_FACTOR
    assert check_refutation_certificate(res.certificate.to_json(), con.graph, con.layout) is None


def test_refutation_lbvexc_parity():
    con = lbvexc_graph(2, 1)
    cert = profile_counting_refutation(con.graph, 2, con.layout).certificate
    w = cert.data["witness"]
    # every factor member takes exactly h from the first column, then the
    # second column mass is 0 or 4 per copy against a capacity of 18
    assert w["steps"] == [{"type": "tight", "weights": [1, 0, 0, 1, 0, 0, 1, 0, 0], "bound": 2}]
    assert w["final"]["type"] == "modular" and w["final"]["modulus"] == 4
    assert check_refutation_certificate(cert, con.graph, con.layout) is None


def test_refutation_exhaustive_witness():
    con = lb12_graph(2, 1, 2)
    cert = profile_counting_refutation(con.graph, 2, con.layout).certificate
    assert cert.data["witness"]["final"]["type"] == "exhaustive"
    assert check_refutation_certificate(cert, con.graph, con.layout) is None


def test_refutation_complete_is_inconclusive():
    G = TripartiteGraph.complete(2)
    res = profile_counting_refutation(G, 2, ColumnLayout.trivial(G.sizes))
    assert res.verdict == Verdict.INCONCLUSIVE and res.certificate is None


def test_refutation_is_sound():
    for con in (lb0_graph(2, 1), lb0_graph(2, 2), lb12_graph(2, 1, 0), lb12_graph(2, 1, 1),
                lb12_graph(2, 1, 2), lbvexc_graph(2, 1), gamma3_blowup(9)):
        h = 1 if con.name.startswith("gamma") else 2
        if profile_counting_refutation(con.graph, h, con.layout).verdict == Verdict.NO_FACTOR:
            assert exact_factor_decision(con.graph, h).verdict == Verdict.NO_FACTOR


def test_tampered_refutations_fail():
    con = lbvexc_graph(2, 1)
    good = profile_counting_refutation(con.graph, 2, con.layout).certificate.to_json()

    missing = json.loads(json.dumps(good))
    missing["profiles"] = missing["profiles"][1:]
    assert check_refutation_certificate(missing, con.graph, con.layout) is not None

    caps = json.loads(json.dumps(good))
    caps["capacities"][0] = [7, 6, 5]
    assert check_refutation_certificate(caps, con.graph, con.layout) is not None

    modulus = json.loads(json.dumps(good))
    modulus["witness"]["final"]["modulus"] = 2
    assert check_refutation_certificate(modulus) is not None

    step = json.loads(json.dumps(good))
    step["witness"]["steps"] = []
    assert check_refutation_certificate(step) is not None

    other = lb0_graph(2, 2)
    assert check_refutation_certificate(good, other.graph, other.layout) is not None


def test_exhaustive_witness_rejected_when_feasible():
    cert = {
        "kind": "PROFILE_INFEASIBLE", "h": 1, "copies_needed": 1,
        "capacities": [[1, 0, 0], [1, 0, 0], [1, 0, 0]],
        "profiles": [[[1, 0, 0], [1, 0, 0], [1, 0, 0]]],
        "witness": {"steps": [], "final": {"type": "exhaustive", "nodes": 1}},
    }
    assert check_refutation_certificate(cert) is not None


@pytest.mark.parametrize("seed", range(30))
def test_naive_profile_feasibility_matches_kernel(seed):
    rng = np.random.default_rng(seed)
    h = 2
    profiles = set()
    for _ in range(int(rng.integers(1, 6))):
        p = []
        for _ in range(3):
            a = int(rng.integers(0, h + 1))
            b = int(rng.integers(0, h - a + 1))
            p += [a, b, h - a - b]
        profiles.add(tuple(p))
    profiles = sorted(profiles)
    copies = 3
    caps = [int(x) for x in rng.multinomial(copies * h, [1 / 3] * 3).tolist() + rng.multinomial(copies * h, [1 / 3] * 3).tolist() + rng.multinomial(copies * h, [1 / 3] * 3).tolist()]
    cols = [[c for c in range(9) if p[c]] for p in profiles]
    cnts = [[p[c] for c in range(9) if p[c]] for p in profiles]
    status, _, _ = kernels.exact_cover_search(cols, cnts, caps, 10**6)
    assert (status == kernels.FOUND) == _naive_profile_feasible(profiles, caps, copies)
