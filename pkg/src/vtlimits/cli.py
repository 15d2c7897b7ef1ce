"""Command-line frontend.

Exit codes: 0 success or PASS, 1 usage or input error, 2 certification FAIL.
Every command writes its main output to a file and prints a JSON run report
(command, sha256 of its inputs, output paths, exit status) to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .discretize import SAMPLE_METRICS, max_separated_net, net_graph, read_sample_csv, verify_qi
from .families import FamilySpec, NoComparisonMap
from .gh import CertificationError, certify_family
from .graph import GraphFormatError, LabeledGraph, dumps_vtg, read_vtg
from .groups import DEFAULT_BUDGET, BudgetExceeded, NotGenerating
from .limits import model_from_json, model_from_name
from .metric import DisconnectedGraph, ProfileTooShort, diameter, doubling_report, growth_exponent, \
    growth_profile
from .structure import BudgetExhausted, find_fat_triangle, line_defect, max_caret_branch

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    outputs: dict = field(default_factory=dict)
    exit_status: int = 0
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def _digest(args: argparse.Namespace, files=()) -> str:
    h = hashlib.sha256()
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    h.update(json.dumps(params, sort_keys=True, default=str).encode())
    for f in files:
        h.update(Path(f).read_bytes())
    return h.hexdigest()


def _n_list(text: str) -> list[int]:
    try:
        ns = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --n value {text!r}") from None
    if not ns or min(ns) < 1:
        raise UsageError("--n needs positive integers")
    return ns


def _family(args) -> FamilySpec:
    try:
        return FamilySpec.parse(args.family, args.gens, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --- build -----------------------------------------------------------------

def cmd_build(args) -> RunReport:
    family = _family(args)
    ns = _n_list(args.n)
    if len(ns) != 1:
        raise UsageError("build takes a single --n")
    graph = family.graph(ns[0], args.budget)
    out = args.out or f"{family.label}-{ns[0]}.vtg"
    Path(out).write_text(dumps_vtg(graph))
    summary = {"vertices": graph.n, "edges": graph.num_edges, "max_degree": graph.max_degree}
    return RunReport("build", _digest(args, [family.path] if family.path else []),
                     {"graph": out}, EXIT_OK, summary)


# --- analyze ---------------------------------------------------------------

def analyze_graph(graph: LabeledGraph, seed: int = 0, factor: int = 2) -> dict:
    """Diagnostic bundle for one graph."""
    D = diameter(graph)
    profile = growth_profile(graph)
    half = max(2, D // 2)
    try:
        exponent = growth_exponent(profile, 1, half)
        local = math.log(profile.ball(half) / profile.ball(half - 1)) / math.log(half / (half - 1))
    except ValueError:
        exponent = local = None
    try:
        doubling = doubling_report(profile, exponent or 1.0, factor).to_dict()
    except ProfileTooShort as exc:
        doubling = {"error": str(exc)}
    R, caret = max_caret_branch(graph, 0, max(0, D // 2))
    try:
        tri = find_fat_triangle(graph, D / 8, seed=seed)
    except BudgetExhausted:
        tri = None
    defect = line_defect(graph, 0, max(1, D // 4), seed=seed)
    return {
        "graph": {"name": graph.name, "vertices": graph.n, "edges": graph.num_edges,
                  "max_degree": graph.max_degree},
        "diameter": D,
        "growth": {"sizes": list(profile.sizes), "exponent_fit": exponent,
                   "fit_radii": [1, half], "local_exponent": local},
        "doubling": doubling,
        "caret": {"R": R, "witness": caret.to_dict() if caret else None},
        "fat_triangle": {"delta": D / 8, "witness": tri.to_dict() if tri else None},
        "line_defect": {"radius": max(1, D // 4), "defect": defect},
    }


def cmd_analyze(args) -> RunReport:
    files = []
    if args.graph:
        try:
            graph = read_vtg(args.graph)
        except OSError as exc:
            raise UsageError(f"cannot read {args.graph}: {exc}") from None
        files.append(args.graph)
    elif args.family and args.n:
        family = _family(args)
        ns = _n_list(args.n)
        if len(ns) != 1:
            raise UsageError("analyze takes a single --n")
        graph = family.graph(ns[0], args.budget)
    else:
        raise UsageError("analyze needs a graph file or --family with --n")
    bundle = analyze_graph(graph, args.seed, args.factor)
    text = json.dumps(bundle, sort_keys=True, indent=2) + "\n"
    out = args.out or "analysis.json"
    Path(out).write_text(text)
    summary = {"diameter": bundle["diameter"], "caret_R": bundle["caret"]["R"],
               "growth_exponent": bundle["growth"]["exponent_fit"]}
    return RunReport("analyze", _digest(args, files), {"json": out}, EXIT_OK, summary)


# --- certify ---------------------------------------------------------------

def _model(name: str):
    if Path(name).is_file():
        try:
            return model_from_json(Path(name).read_text())
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad model file {name}: {exc}") from None
    try:
        return model_from_name(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_certify(args) -> RunReport:
    family = _family(args)
    model = _model(args.model)
    ns = _n_list(args.n)
    digest = _digest(args, [f for f in (family.path, args.model) if f and Path(f).is_file()])
    try:
        cert = certify_family(family, model, ns, tol=args.tol, seed=args.seed)
    except CertificationError as exc:
        print(f"FAIL stage={exc.stage}: {exc}", file=sys.stderr)
        return RunReport("certify", digest, {}, EXIT_FAIL, {"stage": exc.stage,
                                                            "reason": str(exc)})
    except NoComparisonMap as exc:
        print(f"FAIL stage=comparison: {exc}", file=sys.stderr)
        return RunReport("certify", digest, {}, EXIT_FAIL, {"stage": "comparison",
                                                            "reason": str(exc)})
    out = args.out or f"certify-{family.label}-{model.name}.csv"
    Path(out).write_text(cert.report.to_csv())
    status = EXIT_OK if cert.passed else EXIT_FAIL
    verdict = "PASS" if cert.passed else f"FAIL stage=comparison: {cert.reason}"
    print(verdict, file=sys.stderr)
    summary = {"passed": cert.passed, "tolerance": args.tol,
               "gh_upper": cert.report.upper_bounds,
               "gh_lower": [r.gh_lower for r in cert.report.rows]}
    if cert.reason:
        summary["reason"] = cert.reason
    return RunReport("certify", digest, {"csv": out}, status, summary)


# --- discretize ------------------------------------------------------------

def cmd_discretize(args) -> RunReport:
    try:
        sample = read_sample_csv(args.sample, args.metric)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read sample: {exc}") from None
    if args.t <= 0:
        raise UsageError("--t must be positive")
    ng = net_graph(sample, max_separated_net(sample, args.t), args.t)
    out = args.out or "net.vtg"
    Path(out).write_text(dumps_vtg(ng.graph))
    summary = {"net_points": len(ng.points), "edges": ng.graph.num_edges,
               "connected": ng.connected}
    status = EXIT_OK
    if ng.connected:
        qi = verify_qi(ng, sample)
        summary.update(multiplicative=qi.multiplicative, additive=qi.additive,
                       lipschitz=qi.lipschitz, chaining=qi.chaining,
                       witness=list(qi.witness) if qi.witness else None)
        if not (qi.lipschitz and qi.chaining):
            status = EXIT_FAIL
    else:
        print("net graph is disconnected: sample is not geodesic at this scale", file=sys.stderr)
        status = EXIT_FAIL
    return RunReport("discretize", _digest(args, [args.sample]), {"graph": out}, status, summary)


# --- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vtlimits",
                                description="Vertex-transitive graph families and their limits.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family_required=True):
        sp.add_argument("--family", required=family_required,
                        help="cyclic | torus-k | shifted-base-k | heisenberg | dihedral | "
                             "random-3-regular | custom-cayley:<file.vtg>")
        sp.add_argument("--gens", help="generator overrides, e.g. 1,3 or 1:0,0:1")
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help=f"group enumeration budget (default {DEFAULT_BUDGET})")
        sp.add_argument("--out", "-o", help="output path")

    b = sub.add_parser("build", help="write a family member as a vtg graph")
    common(b)
    b.add_argument("--n", required=True)
    b.set_defaults(func=cmd_build)

    a = sub.add_parser("analyze", help="growth, doubling, carets, fat triangles, line defect")
    a.add_argument("graph", nargs="?", help="vtg file")
    common(a, family_required=False)
    a.add_argument("--n")
    a.add_argument("--factor", type=int, default=2, help="doubling factor (default 2)")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("certify", help="certify GH convergence to a model")
    common(c)
    c.add_argument("--model", required=True, help="circle | l1-torus-k | norm JSON file")
    c.add_argument("--n", required=True, help="comma list of sizes")
    c.add_argument("--tol", type=float, default=0.1, help="tolerance (default 0.1)")
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("discretize", help="net graph of a sample and its QI constants")
    d.add_argument("--sample", required=True, help="CSV file id,x1..xm")
    d.add_argument("--metric", required=True, choices=SAMPLE_METRICS)
    d.add_argument("--t", type=float, required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", "-o", help="output vtg path")
    d.set_defaults(func=cmd_discretize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        report = args.func(args)
    except (UsageError, GraphFormatError, BudgetExceeded, NotGenerating, DisconnectedGraph,
            MemoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(report.to_json())
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
