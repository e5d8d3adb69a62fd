import json

import pytest

from tritile.cli import main


def construct(tmp_path, *args):
    path = tmp_path / "g.graph"
    assert main(["construct", *args, "-o", str(path)]) == 0
    return str(path)


def test_construct_meta(tmp_path, capsys):
    main(["construct", "lb0", "--h", "2", "--q", "1", "-o", str(tmp_path / "g"), "--json-meta"])
    meta = json.loads(capsys.readouterr().out)
    assert meta["computed_delta"] == meta["declared_delta"]


def test_solve_refuted_then_verify(tmp_path, capsys):
    g = construct(tmp_path, "lb12", "--h", "2", "--q", "1", "--r", "1")
    cert = str(tmp_path / "c.json")
    assert main(["solve", g, "--h", "2", "--cert-out", cert]) == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == "NO_FACTOR"
    assert main(["verify", g, "--cert", cert]) == 0


def test_refute_mode_and_verify(tmp_path):
    g = construct(tmp_path, "lbvexc", "--h", "2", "--q", "1")
    cert = tmp_path / "r.json"
    assert main(["solve", g, "--h", "2", "--mode", "refute", "--cert-out", str(cert)]) == 1
    assert main(["verify", g, "--cert", str(cert)]) == 0
    data = json.loads(cert.read_text())
    data["copies_needed"] += 1
    cert.write_text(json.dumps(data))
    assert main(["verify", g, "--cert", str(cert)]) == 3


def test_factor_and_tiling_verify(tmp_path):
    g = construct(tmp_path, "gamma-blowup", "--N", "6")
    cert = tmp_path / "t.json"
    assert main(["solve", g, "--h", "1", "--cert-out", str(cert)]) == 0
    assert main(["verify", g, "--cert", str(cert)]) == 0
    data = json.loads(cert.read_text())
    data["copies"] = data["copies"][1:] + data["copies"][:1] * 2
    cert.write_text(json.dumps(data))
    assert main(["verify", g, "--cert", str(cert)]) == 3


def test_max_mode(tmp_path, capsys):
    g = construct(tmp_path, "gamma-blowup", "--N", "9")
    assert main(["solve", g, "--h", "1", "--mode", "max"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["exact"] and out["size"] < out["needed"]


def test_inconclusive_on_tiny_budget(tmp_path):
    g = construct(tmp_path, "gamma-blowup", "--N", "9")
    assert main(["solve", g, "--h", "1", "--budget", "1", "--no-twins"]) == 2


def test_search_exhausted_verify_by_rerun(tmp_path):
    g = construct(tmp_path, "gamma-blowup", "--N", "9")
    cert = tmp_path / "e.json"
    assert main(["solve", g, "--h", "1", "--cert-out", str(cert)]) == 1
    assert main(["verify", g, "--cert", str(cert)]) == 0
    data = json.loads(cert.read_text())
    data["nodes"] += 1
    cert.write_text(json.dumps(data))
    assert main(["verify", g, "--cert", str(cert)]) == 3


def test_regularity_command(tmp_path, capsys):
    g = construct(tmp_path, "q", "--n", "7", "--d", "2")
    assert main(["regularity", g, "--pair", "0,1", "--eps", "1/2", "--delta", "1/10", "--alpha", "3/4",
                 "--trials", "20"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["pair"] == [0, 1] and "super_regular" in out and "slicing" in out


def test_experiment_command(tmp_path, capsys):
    assert main(["experiment", "gamma-blowup", "--N", "3", "6", "--out", str(tmp_path)]) == 0
    assert "summary: PASS" in capsys.readouterr().out
    assert (tmp_path / "gamma-blowup.csv").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["solve"],
    ["construct", "nope", "-o", "x"],
    ["experiment", "gamma-blowup", "--N", "x"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 64


def test_domain_errors_are_usage(tmp_path):
    assert main(["construct", "gamma-blowup", "--N", "7", "-o", str(tmp_path / "g")]) == 64
    assert main(["solve", str(tmp_path / "missing"), "--h", "1"]) == 64


def test_refute_needs_layout(tmp_path):
    text = open(construct(tmp_path, "gamma-blowup", "--N", "3")).read()
    g = tmp_path / "plain.graph"
    g.write_text("".join(l for l in text.splitlines(keepends=True) if not l.startswith("column")))
    assert main(["solve", str(g), "--h", "1", "--mode", "refute"]) == 64


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
