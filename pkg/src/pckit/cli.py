"""Command-line surface.

Exit codes: 0 when every assertion holds, 1 on an assertion or bound
failure, 2 on usage or parse errors. Set ``PC_ORACLE_BUDGET`` to override
the enumeration variable budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import divergence as dv
from .circuit import check_properties, to_logical
from .cnf import parse_dimacs
from .constructions import (
    build_p_n,
    build_sat_gadget,
    build_conditional_counterexample,
    build_disjoint_map_counterexample,
    build_sauerhoff_dnnf,
    sat_decision,
    scaled_instance,
)
from .dense import DenseDistribution
from .errors import PCError
from .experiments import EXPERIMENT_NAMES, run_experiment, save_report
from .fileformat import (
    format_assignment,
    parse_assignment,
    read_circuit,
    read_distribution,
    write_circuit,
    write_distribution,
)
from .inference import map_query, marginal, model_count
from .oracle import brute_tvd
from .pruning import prune, weak_approx_error


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pckit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a circuit file")
    p.add_argument("file")
    p.add_argument("--allow-unnormalized", action="store_true")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("check", help="report smoothness/decomposability/determinism")
    p.add_argument("file")
    p.add_argument("--allow-unnormalized", action="store_true")
    p.add_argument("--limit", type=int, default=20, help="determinism enumeration limit")
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("marginal", help="marginal probability of a partial assignment")
    p.add_argument("file")
    p.add_argument("--assign", default="", help='e.g. "x1=1,x3=0"; unlisted vars marginalized')
    p.add_argument("--allow-unnormalized", action="store_true")
    p.set_defaults(handler=_cmd_marginal)

    p = sub.add_parser("map", help="most probable completion of the evidence")
    p.add_argument("file")
    p.add_argument("--evidence", default="")
    p.add_argument("--allow-unnormalized", action="store_true")
    p.set_defaults(handler=_cmd_map)

    p = sub.add_parser("count", help="exact model count of a logical circuit file")
    p.add_argument("file")
    p.add_argument("--non-strict", action="store_true", help="count even if determinism is unverified")
    p.set_defaults(handler=_cmd_count)

    p = sub.add_parser("divergence", help="distance between two distribution files")
    p.add_argument("--measure", required=True, choices=("tvd",) + tuple(dv.SPEC_FACTORIES))
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(handler=_cmd_divergence)

    p = sub.add_parser("build", help="build a named construction")
    bsub = p.add_subparsers(dest="what", required=True)

    b = bsub.add_parser("sauerhoff", help="lifted PC (and optionally the DNNF) for one n")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--out", required=True, help="output path for the PC")
    b.add_argument("--dnnf-out", help="also write the logical circuit here")
    b.set_defaults(handler=_cmd_build_sauerhoff)

    b = bsub.add_parser("gadget", help="lifted satisfiability distribution from a DIMACS CNF")
    b.add_argument("--cnf", required=True)
    b.add_argument("--out", required=True, help="output path for the distribution")
    b.add_argument("--decide", help="distribution file to run the decision rule against")
    b.set_defaults(handler=_cmd_build_gadget)

    b = bsub.add_parser("counterexample", help="distribution pair with a guaranteed gap")
    b.add_argument("--family", required=True, choices=("scaled", "conditional-map", "disjoint-map"))
    b.add_argument("--K", default="10")
    b.add_argument("--delta", default="1/100")
    b.add_argument("--k", default="10")
    b.add_argument("--eps", default="1/20")
    b.add_argument("--p-e", default="1/20", dest="p_e")
    b.add_argument("--vars", type=int, default=4)
    b.add_argument("--p-in", help="use this distribution file as P (disjoint-map)")
    b.add_argument("--out-p", required=True)
    b.add_argument("--out-q", required=True)
    b.set_defaults(handler=_cmd_build_counterexample)

    p = sub.add_parser("prune", help="threshold-prune a det-dec PC")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tau", default="auto", help='"auto" for 1/2^(n+1) or an exact rational/decimal')
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write a JSON pruning report here")
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(handler=_cmd_prune)

    p = sub.add_parser("weak-approx", help="symmetric-difference model count of two logical circuits")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(handler=_cmd_weak_approx)

    p = sub.add_parser("experiment", help="run a named experiment suite")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--pairs", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--vars", type=int)
    p.add_argument("--max-vars", type=int, dest="max_vars")
    p.add_argument("--n", type=int, action="append", help="repeatable; Sauerhoff sizes")
    p.add_argument("--cnf", help="single DIMACS instance for sat-gadget")
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(handler=_cmd_experiment)

    return parser


def _policy(args) -> str:
    return "positive" if getattr(args, "allow_unnormalized", False) else "normalized"


def _cmd_validate(args) -> int:
    circuit = read_circuit(args.file, _policy(args))
    nodes, edges = circuit.size()
    print(
        f"valid {circuit.flavor} circuit: {circuit.num_vars} vars, "
        f"{nodes} nodes, {edges} edges, root {circuit.root}, "
        f"normalized={circuit.normalized}"
    )
    return 0


def _cmd_check(args) -> int:
    circuit = read_circuit(args.file, _policy(args))
    report = check_properties(circuit, args.limit)
    det = {True: "true", False: "false", None: "unverified"}[report.deterministic]
    print(f"smooth: {report.smooth}")
    print(f"decomposable: {report.decomposable}")
    print(f"deterministic: {det}")
    if report.witness:
        prop, node, assignment = report.witness
        where = f" at {format_assignment(assignment)}" if assignment else ""
        print(f"witness: {prop} fails on node {node}{where}")
    return 0


def _cmd_marginal(args) -> int:
    circuit = read_circuit(args.file, _policy(args))
    value = marginal(circuit, parse_assignment(args.assign))
    print(f"{value:.17g}")
    return 0


def _cmd_map(args) -> int:
    circuit = read_circuit(args.file, _policy(args))
    result = map_query(circuit, parse_assignment(args.evidence))
    print(f"{result.value:.17g}")
    print(format_assignment(result.argmax))
    return 0


def _cmd_count(args) -> int:
    circuit = read_circuit(args.file)
    if circuit.is_probabilistic:
        circuit = to_logical(circuit)
    print(model_count(circuit, strict=not args.non_strict))
    return 0


def _cmd_divergence(args) -> int:
    p = read_distribution(args.p)
    q = read_distribution(args.q)
    if args.measure == "tvd":
        print(f"tvd {brute_tvd(p, q):.17g}")
        return 0
    spec = dv.spec_for_pair(args.measure, p, q)
    value = dv.f_divergence(p, q, spec)
    print(f"{args.measure} {value:.17g}")
    print(f"M {spec.domain[1]:.17g}")
    print(f"k {spec.k:.17g}")
    if spec.k > 0:
        print(f"tvd_bound {dv.kconvex_tvd_bound(value, spec.k):.17g}")
    return 0


def _cmd_build_sauerhoff(args) -> int:
    pc = build_p_n(args.n)
    write_circuit(pc, args.out)
    nodes, edges = pc.size()
    print(f"wrote {args.out}: {nodes} nodes, {edges} edges over {pc.num_vars} vars")
    if args.dnnf_out:
        dnnf = build_sauerhoff_dnnf(args.n)
        write_circuit(dnnf, args.dnnf_out)
        print(f"wrote {args.dnnf_out}: {dnnf.size()[0]} nodes")
    return 0


def _cmd_build_gadget(args) -> int:
    with open(args.cnf) as fh:
        cnf = parse_dimacs(fh.read())
    gadget = build_sat_gadget(cnf)
    write_distribution(gadget.P, args.out)
    print(
        f"wrote {args.out}: {gadget.num_vars} vars (switch x{gadget.y_var}), "
        f"mc_f={gadget.mc_f}, P(Y=1)={gadget.p_y1_exact}"
    )
    if args.decide:
        q = read_distribution(args.decide)
        verdict = "satisfiable" if sat_decision(gadget, q) else "unsatisfiable"
        print(f"decision: {verdict}")
    return 0


def _cmd_build_counterexample(args) -> int:
    import numpy as np

    if args.family == "scaled":
        family = scaled_instance(args.vars, Fraction(args.K), Fraction(args.delta))
    elif args.family == "conditional-map":
        p_e = Fraction(args.p_e)
        # evidence x1=1 holds two equal-mass completions; the rest is uniform
        masses = [Fraction(0)] * 8
        masses[1] = p_e / 2
        masses[3] = p_e / 2
        for idx in (0, 2, 4, 6):
            masses[idx] = (1 - p_e) / 4
        base = DenseDistribution.from_masses(3, np.array(masses, dtype=object))
        family = build_conditional_counterexample(
            base, {1: 1}, Fraction(args.k), Fraction(args.eps)
        )
    else:
        if args.p_in:
            base = read_distribution(args.p_in)
        else:
            mass = np.zeros(1 << args.vars)
            mass[: (1 << args.vars) // 4] = 1.0 / ((1 << args.vars) // 4)
            base = DenseDistribution.from_masses(args.vars, mass)
        family = build_disjoint_map_counterexample(base)
    write_distribution(family.P, args.out_p)
    write_distribution(family.Q, args.out_q)
    exact = {k: str(v) for k, v in family.exact.items() if not isinstance(v, list)}
    print(f"wrote {args.out_p} and {args.out_q} ({family.kind}); exact: {exact}")
    return 0


def _cmd_prune(args) -> int:
    circuit = read_circuit(args.infile)
    tau = None if args.tau == "auto" else Fraction(args.tau)
    result = prune(circuit, tau, renormalize=args.renormalize)
    write_circuit(result.circuit, args.out)
    mass = result.surviving_mass()
    print(
        f"wrote {args.out}: removed {len(result.removed_edges)} edges in "
        f"{result.rounds} rounds, tau={result.tau}, surviving mass {mass:.17g}"
    )
    if args.report:
        payload = {
            "tau": str(result.tau),
            "rounds": result.rounds,
            "surviving_mass": mass,
            "removed_edges": [
                {"round": r, "parent": p, "child": c, "reason": why}
                for r, p, c, why in result.removed_edges
            ],
        }
        with open(args.report, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
        print(f"wrote {args.report}")
    return 0


def _cmd_weak_approx(args) -> int:
    f = read_circuit(args.f, "positive")
    g = read_circuit(args.g, "positive")
    if f.num_vars != g.num_vars:
        raise ValueError("variable count mismatch between f and g")
    error = weak_approx_error(f, g, f.num_vars)
    budget_count = args.epsilon * (1 << f.num_vars)
    ok = error <= budget_count
    print(f"symmetric_difference {error}")
    print(f"budget {budget_count:.17g}")
    print("within_budget" if ok else "exceeds_budget")
    return 0 if ok else 1


def _cmd_experiment(args) -> int:
    params = {"seed": args.seed}
    if args.trials is not None:
        params["trials"] = args.trials
    if args.pairs is not None:
        params["pairs"] = args.pairs
    if args.instances is not None:
        params["instances"] = args.instances
    if args.vars is not None:
        params["vars"] = args.vars
    if args.max_vars is not None:
        params["max_vars"] = args.max_vars
    if args.n:
        params["ns"] = tuple(args.n)
        params["n_min"], params["n_max"] = min(args.n), max(args.n)
    if args.cnf:
        params["cnf"] = args.cnf
    report = run_experiment(args.name, **params)
    paths = save_report(report, args.out_dir, figures=not args.no_figures)
    status = "pass" if report.passed else "FAIL"
    print(f"{report.name}: {status} ({report.wall_clock:.2f}s)", file=sys.stderr)
    for path in paths:
        print(path)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
