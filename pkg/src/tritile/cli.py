"""``tritile`` command line."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import constructions
from .checks import check_tiling_certificate
from .errors import TritileError
from .experiments import DEFAULTS, emit_table, run_experiment
from .graph import min_pair_degree, read_graph, write_graph
from .regularity import (
    eps_regular_exhaustive,
    eps_regular_sampled,
    slicing_property_test,
    super_regular_check,
)
from .solver import (
    RefutationCertificate,
    TilingCertificate,
    Verdict,
    check_refutation_certificate,
    exact_factor_decision,
    max_tiling,
    profile_counting_refutation,
)

EXIT_FACTOR, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_VIOLATION = 0, 1, 2, 3
EXIT_USAGE = 64


def _build(args):
    n = args.name
    if n == "lb0":
        return constructions.lb0_graph(args.h, args.q)
    if n == "lb12":
        return constructions.lb12_graph(args.h, args.q, args.r, alt=args.alt)
    if n == "lbvexc":
        return constructions.lbvexc_graph(args.h, args.q)
    if n == "gamma-blowup":
        return constructions.gamma3_blowup(args.N)
    if n == "q":
        return constructions.q_graph(args.n, args.d)
    G = constructions.random_min_degree_graph(args.N, args.target, args.seed)
    return constructions.Construction(
        "random-min-degree", G, constructions.ColumnLayout.trivial(G.sizes),
        {"N": args.N, "target": args.target, "seed": args.seed},
        declared_delta=args.target, computed_delta=min_pair_degree(G),
    )


def cmd_construct(args) -> int:
    con = _build(args)
    write_graph(args.output, con.graph, con.layout)
    if args.json_meta:
        meta = con.meta()
        meta["computed_delta"] = min_pair_degree(con.graph)
        print(json.dumps(meta, indent=2, sort_keys=True))
    return 0


def _load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def cmd_verify(args) -> int:
    G, layout = read_graph(args.graph)
    data = _load_json(args.cert)
    if "kind" in data:
        cert = RefutationCertificate.from_json(data)
        if args.h is not None and cert.h != args.h:
            print(f"violation: certificate is for h={cert.h}")
            return EXIT_VIOLATION
        if cert.kind == "PROFILE_INFEASIBLE":
            if layout is None:
                print("violation: the graph file carries no layout")
                return EXIT_VIOLATION
            bad = check_refutation_certificate(cert, G, layout)
        else:
            params = cert.data.get("params", {})
            res = exact_factor_decision(
                G, cert.h, reduce_twins=params.get("reduce_twins", True),
                node_budget=params.get("node_budget", 10_000_000),
            )
            bad = None
            if res.verdict != Verdict.NO_FACTOR or res.nodes != cert.data.get("nodes"):
                bad = f"re-run gave {res.verdict.value} after {res.nodes} nodes"
    else:
        h = args.h if args.h is not None else int(data["h"])
        bad = check_tiling_certificate(G, h, data)
    if bad is not None:
        print(f"violation: {bad}")
        return EXIT_VIOLATION
    print("pass")
    return 0


def _write_cert(path, cert) -> None:
    if path and cert is not None:
        Path(path).write_text(cert.dumps() + "\n")


def cmd_solve(args) -> int:
    G, layout = read_graph(args.graph)
    if args.layout:
        _, layout = read_graph(args.layout)
    if args.mode == "max":
        res = max_tiling(G, args.h, budget=args.budget)
        cert = TilingCertificate(args.h, res.copies)
        _write_cert(args.cert_out, cert)
        print(json.dumps({"size": res.size, "exact": res.exact, "upper_bound": res.upper_bound,
                          "needed": G.N // args.h}))
        if res.size * args.h == G.N:
            return EXIT_FACTOR
        return EXIT_REFUTED if res.exact else EXIT_INCONCLUSIVE
    if args.mode == "refute":
        if layout is None:
            print("refute mode needs a layout (in the graph file or via --layout)", file=sys.stderr)
            return EXIT_USAGE
        res = profile_counting_refutation(G, args.h, layout, node_budget=args.budget)
    else:
        res = exact_factor_decision(
            G, args.h, node_budget=args.budget, time_budget=args.time_budget,
            workers=args.workers, reduce_twins=not args.no_twins,
        )
    _write_cert(args.cert_out, res.certificate)
    print(json.dumps({"verdict": res.verdict.value, "nodes": res.nodes, "reason": res.reason}))
    return {Verdict.FACTOR: EXIT_FACTOR, Verdict.NO_FACTOR: EXIT_REFUTED}.get(res.verdict, EXIT_INCONCLUSIVE)


def cmd_regularity(args) -> int:
    G, _ = read_graph(args.graph)
    i, j = (int(x) for x in args.pair.split(","))
    pair = G.pair(i, j)
    if args.mode == "exhaustive":
        verdict = eps_regular_exhaustive(pair, args.eps)
    else:
        verdict = eps_regular_sampled(pair, args.eps, args.trials, args.seed)
    out = {"pair": [i, j], **verdict.to_json()}
    if args.delta is not None:
        v = super_regular_check(pair, args.eps, args.delta, args.mode, args.trials, args.seed)
        out["super_regular"] = {"delta": args.delta, "pass": v is None,
                                "violation": None if v is None else str(v)}
    if args.alpha is not None:
        out["slicing"] = slicing_property_test(pair, args.eps, args.alpha, args.trials, args.seed).to_json()
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_experiment(args) -> int:
    params = {"h": args.h, "q": args.q, "r": args.r, "N": args.N, "seeds": args.seeds}
    rep = run_experiment(args.name, params, args.out, workers=args.workers, time_budget=args.time_budget)
    text, _ = emit_table(rep)
    print(text, end="")
    return 0 if rep.summary == "PASS" else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tritile", description="K_{h,h,h}-tilings of tripartite graphs")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a named graph and write it with its layout")
    c.add_argument("name", choices=["lb0", "lb12", "lbvexc", "gamma-blowup", "q", "random-min-degree"])
    c.add_argument("--h", type=int, default=2)
    c.add_argument("--q", type=int, default=1)
    c.add_argument("--r", type=int, default=1)
    c.add_argument("--alt", action="store_true", help="lb12: alternative first-column degree")
    c.add_argument("--N", type=int, default=9)
    c.add_argument("--n", type=int, default=7)
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--target", type=int, default=0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--json-meta", action="store_true")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check a tiling or refutation certificate")
    v.add_argument("graph")
    v.add_argument("--cert", required=True)
    v.add_argument("--h", type=int)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="decide, maximise or refute a factor")
    s.add_argument("graph")
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--layout")
    s.add_argument("--mode", choices=["exact", "max", "refute"], default="exact")
    s.add_argument("--budget", type=int, default=10_000_000, help="search nodes")
    s.add_argument("--time-budget", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-twins", action="store_true", help="search on single vertices")
    s.add_argument("--cert-out")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("regularity", help="regularity diagnostics for one class pair")
    r.add_argument("graph")
    r.add_argument("--pair", default="0,1")
    r.add_argument("--eps", default="1/4")
    r.add_argument("--delta")
    r.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    r.add_argument("--alpha")
    r.add_argument("--trials", type=int, default=1000)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_regularity)

    e = sub.add_parser("experiment", help="run an experiment suite")
    e.add_argument("name", choices=sorted(DEFAULTS))
    e.add_argument("--h", type=int)
    e.add_argument("--q", type=int, nargs="+")
    e.add_argument("--r", type=int, nargs="+")
    e.add_argument("--N", type=int, nargs="+")
    e.add_argument("--seeds", type=int)
    e.add_argument("--out")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--time-budget", type=float, default=300.0)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which would read as "inconclusive"
        return EXIT_USAGE if exc.code else 0
    try:
        return args.func(args)
    except (TritileError, ValueError, OSError) as exc:
        print(f"tritile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
