import json

import pytest

from tritile.experiments import (
    DEFAULTS,
    MANIFEST,
    ExperimentReport,
    brute_force_triangle_factor,
    emit_table,
    oracle_instance,
    parse_csv,
    run_experiment,
)
from tritile.graph import build_graph

from .oracles import naive_triangle_factor


def test_manifest_covers_every_experiment():
    assert set(MANIFEST) == set(DEFAULTS)


@pytest.mark.parametrize("name,params", [
    ("lb0", {"q": [1]}),
    ("lb12", None),
    ("lbvexc", None),
    ("gamma-blowup", {"N": [3, 6, 9]}),
    ("threshold-sweep", {"seeds": 10}),
    ("slicing", {"pairs": 5, "trials": 50}),
    ("oracle-equivalence", {"instances": 30}),
])
def test_experiment_passes(name, params, tmp_path):
    rep = run_experiment(name, params, tmp_path)
    assert rep.summary == "PASS", rep.rows
    data = json.loads((tmp_path / f"{name}.report.json").read_text())
    assert data["summary"] == "PASS" and len(data["rows"]) == len(rep.rows)
    csv_text = (tmp_path / f"{name}.csv").read_text()
    assert parse_csv(csv_text, rep.columns) == rep.rows
    assert (tmp_path / f"{name}.txt").read_text().endswith("summary: PASS\n")


def test_unknown_experiment():
    with pytest.raises(ValueError, match="unknown experiment"):
        run_experiment("nope")


def test_sweep_only_for_h1():
    with pytest.raises(ValueError):
        run_experiment("threshold-sweep", {"h": 2})


def test_empty_report_table():
    rep = ExperimentReport("lb0", {}, [("key", str), ("match", bool)])
    text, csv_text = emit_table(rep)
    assert text.splitlines()[0] == "key  match"
    assert len(text.splitlines()) == 2
    assert csv_text == "key,match\n"
    assert parse_csv(csv_text, rep.columns) == []
    assert rep.summary == "FAIL"


def test_table_alignment_and_types():
    rep = ExperimentReport("x", {}, [("key", str), ("n", int), ("t", float), ("match", bool)],
                           [{"key": "a", "n": 12, "t": 0.5, "match": True},
                            {"key": "bbbb", "n": 3, "t": 1.25, "match": False}])
    text, csv_text = emit_table(rep)
    lines = text.splitlines()
    assert lines[2].startswith("a     12")
    assert lines[-1] == "summary: FAIL"
    assert parse_csv(csv_text, rep.columns) == rep.rows


def test_parse_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_csv("a,b\n1,2\n", [("a", int), ("c", int)])
    with pytest.raises(ValueError):
        parse_csv("a\nyes\n", [("a", bool)])


def test_certificates_identical_on_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment("lb12", None, a)
    run_experiment("lb12", None, b, workers=2)
    certs = sorted(p.name for p in a.glob("*.json") if not p.name.endswith("report.json"))
    assert certs
    for name in certs:
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("seed", range(30))
def test_brute_force_helper_matches_oracle(seed):
    G = oracle_instance(seed)
    assert brute_force_triangle_factor(G) == naive_triangle_factor(G)


def test_brute_force_helper_small():
    edges = [(a, i, b, i) for i in range(3) for a, b in ((0, 1), (0, 2), (1, 2))]
    assert brute_force_triangle_factor(build_graph((3, 3, 3), edges))
    assert not brute_force_triangle_factor(build_graph((3, 3, 3), edges[:-1]))
