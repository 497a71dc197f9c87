"""Named experiments: each one exercises a guaranteed bound or construction
on seeded instances and emits a structured report plus CSV plot data.

Reports are deterministic given seeds: identical flags produce byte-identical
JSON and CSV. Wall-clock time is kept on the in-memory report object but is
never serialized.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import divergence as dv
from .circuit import check_properties
from .cnf import CNF, random_cnf
from .constructions import (
    build_p_n,
    build_sat_gadget,
    build_conditional_counterexample,
    build_disjoint_map_counterexample,
    build_sauerhoff_dnnf,
    compile_uniform_pc,
    sat_decision,
    sauerhoff_tables,
    scaled_closed_form,
    scaled_instance,
    uniform_over,
)
from .dense import DenseDistribution
from .oracle import (
    enumerate_distribution,
    enumerate_exact,
    brute_tvd,
    random_detdec_pc,
    random_distribution,
    perturb_weights,
)
from .pruning import approx_to_weak, default_tau, edge_bounds, prune

EXPERIMENT_NAMES = (
    "rel-to-tvd",
    "scaled-family",
    "sat-gadget",
    "marginal-abs",
    "map-abs",
    "conditional-gap",
    "sauerhoff-support",
    "sauerhoff-size",
    "prune-exact",
    "weak-approx-pipeline",
    "kconvex-bounds",
)


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    seed: Optional[int]
    passed: bool
    summary: dict
    records: list[dict]
    csv_columns: list[str]
    csv_rows: list[list]
    wall_clock: float = 0.0  # informational only; excluded from serialization

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "parameters": _plain(self.parameters),
            "seed": self.seed,
            "passed": self.passed,
            "summary": _plain(self.summary),
            "records": _plain(self.records),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ": "), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.csv_columns)
        for row in self.csv_rows:
            writer.writerow(_plain(row))
        return buf.getvalue()


def _plain(value):
    """Make values JSON/CSV-safe; Fractions keep their exact spelling."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def run_experiment(name: str, **params) -> ExperimentReport:
    if name not in _RUNNERS:
        raise ValueError(f"unknown experiment {name!r}; choose from {EXPERIMENT_NAMES}")
    start = time.perf_counter()
    report = _RUNNERS[name](params)
    report.wall_clock = time.perf_counter() - start
    return report


def save_report(report: ExperimentReport, out_dir, figures: bool = True) -> list:
    """Write <name>.report.json, <name>.csv, and (optionally) <name>.png."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, report.name)
    paths = [base + ".report.json", base + ".csv"]
    with open(paths[0], "w") as fh:
        fh.write(report.to_json())
    with open(paths[1], "w") as fh:
        fh.write(report.to_csv())
    if figures:
        from . import plots

        paths.append(plots.render(report, base + ".png"))
    return paths


# --- individual experiments -------------------------------------------------


def _rel_to_tvd(params: dict) -> ExperimentReport:
    """Pairs built as relative approximators must stay within eps/2 in TVD."""
    trials = int(params.get("trials", 500))
    num_vars = int(params.get("vars", 8))
    epsilons = tuple(params.get("epsilons", (0.02, 0.1, 0.3)))
    seed = int(params.get("seed", 0))
    tol = 1e-12

    records = []
    rows = []
    passed = True
    for eps in epsilons:
        lo, hi = 1.0 / math.sqrt(1.0 + eps), math.sqrt(1.0 + eps)
        worst = 0.0
        for trial in range(trials):
            rng = np.random.default_rng((seed, trial, int(eps * 1000)))
            p = random_distribution(num_vars, int(rng.integers(2**31)))
            # pointwise ratio in [1/(1+eps), 1+eps] after normalization, so
            # every partial-assignment ratio lands there too
            t = rng.uniform(lo, hi, size=p.mass.size)
            q_mass = p.mass * t
            q = DenseDistribution.from_masses(num_vars, q_mass / q_mass.sum())
            distance = brute_tvd(p, q)
            ok = distance <= eps / 2 + tol
            passed &= ok
            worst = max(worst, distance)
            rows.append([eps, trial, distance, eps / 2])
        records.append(
            {"epsilon": eps, "trials": trials, "max_tvd": worst, "bound": eps / 2, "ok": worst <= eps / 2 + tol}
        )

    # spot-check the ratio predicate itself on a small instance
    rng = np.random.default_rng((seed, 999))
    p = random_distribution(6, int(rng.integers(2**31)))
    t = rng.uniform(1.0 / math.sqrt(1.1), math.sqrt(1.1), size=p.mass.size)
    q_mass = p.mass * t
    q = DenseDistribution.from_masses(6, q_mass / q_mass.sum())
    verdict = dv.is_relative_approximator(p, q, 0.1)
    passed &= verdict.holds
    records.append({"predicate_check_eps": 0.1, "holds": verdict.holds, "worst_ratio": float(verdict.worst_value)})

    return ExperimentReport(
        "rel-to-tvd",
        {"trials": trials, "vars": num_vars, "epsilons": list(epsilons)},
        seed,
        passed,
        {"max_tvd_by_eps": {str(r["epsilon"]): r["max_tvd"] for r in records if "epsilon" in r}},
        records,
        ["epsilon", "trial", "tvd", "half_epsilon"],
        rows,
    )


def _scaled_family(params: dict) -> ExperimentReport:
    """Scaled families: closed-form divergence, pinned relative error, vanishing KL."""
    num_vars = int(params.get("vars", 6))
    pairs = params.get("pairs", ((10, "1/100"), (100, "1/1000"), (2, "1/2")))
    sweep_deltas = params.get("sweep_deltas", ("1/10", "1/100", "1/1000"))
    sweep_k = params.get("sweep_k", 10)
    tol = 1e-9

    records = []
    rows = []
    passed = True
    for K, delta in pairs:
        family = scaled_instance(num_vars, K, Fraction(delta))
        spec = dv.kl_spec(float(K))
        direct = dv.f_divergence(family.P, family.Q, spec)
        closed = scaled_closed_form(spec.f, K, Fraction(delta))
        ok_closed = abs(direct - closed) <= tol
        exact_p = DenseDistribution.from_masses(num_vars, np.array(family.exact["p"], dtype=object))
        exact_q = DenseDistribution.from_masses(num_vars, np.array(family.exact["q"], dtype=object))
        verdict = dv.is_relative_approximator(exact_p, exact_q, float(K))
        ok_ratio = verdict.worst_value == family.exact["K"]
        passed &= ok_closed and ok_ratio
        records.append(
            {
                "K": float(K),
                "delta": str(Fraction(delta)),
                "kl_direct": direct,
                "kl_closed_form": closed,
                "closed_form_gap": abs(direct - closed),
                "worst_ratio": float(verdict.worst_value),
                "worst_ratio_exact_equals_K": ok_ratio,
            }
        )
        rows.append([float(K), float(Fraction(delta)), direct, closed, float(verdict.worst_value)])

    sweep_vals = []
    for delta in sweep_deltas:
        val = scaled_closed_form(dv.kl_spec(float(sweep_k)).f, sweep_k, Fraction(delta))
        sweep_vals.append(val)
        rows.append([float(sweep_k), float(Fraction(delta)), val, val, float(sweep_k)])
    monotone = all(a > b for a, b in zip(sweep_vals, sweep_vals[1:]))
    passed &= monotone
    records.append(
        {"sweep_K": sweep_k, "sweep_deltas": [str(Fraction(d)) for d in sweep_deltas], "kl_values": sweep_vals, "monotone_decreasing": monotone}
    )

    return ExperimentReport(
        "scaled-family",
        {"vars": num_vars, "pairs": [[str(k), str(d)] for k, d in pairs]},
        None,
        passed,
        {"monotone_decreasing": monotone},
        records,
        ["K", "delta", "kl_direct", "kl_closed_form", "worst_ratio"],
        rows,
    )


def _sat_gadget(params: dict) -> ExperimentReport:
    """Satisfiability decided from the lifted uniform distribution and its neighbors."""
    trials = int(params.get("trials", 50))
    max_vars = int(params.get("max_vars", 12))
    seed = int(params.get("seed", 0))
    perturbations = int(params.get("perturbations", 3))
    cnf_file = params.get("cnf")

    instances: list[CNF] = []
    if cnf_file:
        from .cnf import parse_dimacs

        with open(cnf_file) as fh:
            instances.append(parse_dimacs(fh.read()))
    else:
        instances.append(CNF(3, ()))  # no clauses: trivially satisfiable
        instances.append(CNF(2, ((1,), (-1,))))  # plain contradiction
        rng = np.random.default_rng(seed)
        while len(instances) < trials:
            n = int(rng.integers(4, max_vars + 1))
            density = rng.uniform(2.0, 6.0)
            instances.append(random_cnf(n, int(n * density), int(rng.integers(2**31))))

    records = []
    rows = []
    passed = True
    sat_count = 0
    for i, cnf in enumerate(instances):
        gadget = build_sat_gadget(cnf)
        truth = gadget.mc_f > 0
        sat_count += truth
        qs = [("exact", gadget.P)]
        rng = np.random.default_rng((seed, i))
        for j in range(perturbations):
            noise = random_distribution(gadget.num_vars, int(rng.integers(2**31)))
            alpha = 0.23
            q_mass = (1 - alpha) * gadget.P.mass + alpha * noise.mass
            qs.append((f"mix-{j}", DenseDistribution.from_masses(gadget.num_vars, q_mass)))
        for label, q in qs:
            distance = brute_tvd(gadget.P, q)
            decision = sat_decision(gadget, q)
            ok = decision == truth
            passed &= ok and distance < 0.24
            q_y1 = q.prob({gadget.y_var: 1})
            records.append(
                {
                    "instance": i,
                    "q": label,
                    "num_vars": cnf.num_vars,
                    "mc_f": gadget.mc_f,
                    "satisfiable": truth,
                    "tvd": distance,
                    "q_y1": q_y1,
                    "decision": decision,
                    "ok": ok,
                }
            )
            rows.append([i, label, gadget.mc_f, distance, q_y1, int(truth), int(decision)])

    return ExperimentReport(
        "sat-gadget",
        {"trials": len(instances), "max_vars": max_vars, "perturbations": perturbations},
        seed,
        passed,
        {"instances": len(instances), "satisfiable": sat_count, "unsatisfiable": len(instances) - sat_count},
        records,
        ["instance", "q", "mc_f", "tvd", "q_y1", "satisfiable", "decision"],
        rows,
    )


def _pair_stream(seed: int, pairs: int, max_vars: int):
    for i in range(pairs):
        rng = np.random.default_rng((seed, i))
        n = int(rng.integers(4, max_vars + 1))
        zeros = float(rng.choice([0.0, 0.0, 0.3, 0.6]))
        p = random_distribution(n, int(rng.integers(2**31)), zeros=zeros)
        q = random_distribution(n, int(rng.integers(2**31)), zeros=zeros)
        yield i, n, p, q


def _marginal_abs(params: dict) -> ExperimentReport:
    """Every partial-assignment marginal gap is at most the measured TVD."""
    pairs = int(params.get("pairs", 200))
    max_vars = int(params.get("max_vars", 10))
    seed = int(params.get("seed", 0))
    tol = 1e-12

    records = []
    rows = []
    passed = True
    for i, n, p, q in _pair_stream(seed, pairs, max_vars):
        t = brute_tvd(p, q)
        verdict = dv.is_absolute_marginal_approximator(p, q, t + tol)
        ok = verdict.worst_value <= t + tol
        passed &= ok
        records.append({"pair": i, "vars": n, "tvd": t, "worst_gap": float(verdict.worst_value), "ok": ok})
        rows.append([i, n, t, float(verdict.worst_value)])

    return ExperimentReport(
        "marginal-abs",
        {"pairs": pairs, "max_vars": max_vars},
        seed,
        passed,
        {"pairs": pairs},
        records,
        ["pair", "vars", "tvd", "worst_marginal_gap"],
        rows,
    )


def _map_abs(params: dict) -> ExperimentReport:
    """Evidence-MAP gaps bounded by TVD, plus the disjoint-support edge case."""
    pairs = int(params.get("pairs", 200))
    max_vars = int(params.get("max_vars", 10))
    seed = int(params.get("seed", 0))
    tol = 1e-12

    records = []
    rows = []
    passed = True
    for i, n, p, q in _pair_stream(seed, pairs, max_vars):
        t = brute_tvd(p, q)
        verdict = dv.is_absolute_map_approximator(p, q, t + tol)
        ok = verdict.worst_value <= t + tol
        passed &= ok
        records.append({"pair": i, "vars": n, "tvd": t, "worst_gap": float(verdict.worst_value), "ok": ok})
        rows.append([i, n, t, float(verdict.worst_value)])

    # converse failure: equal MAP profile, disjoint supports, distance one
    base = DenseDistribution.from_masses(2, np.array([0.5, 0.5, 0.0, 0.0]))
    family = build_disjoint_map_counterexample(base)
    t = brute_tvd(family.P, family.Q)
    map_gap = abs(float(max(family.P.mass)) - float(max(family.Q.mass)))
    ok = t == 1.0 and map_gap == 0.0
    passed &= ok
    records.append({"disjoint_support_tvd": t, "disjoint_support_map_gap": map_gap, "ok": ok})

    return ExperimentReport(
        "map-abs",
        {"pairs": pairs, "max_vars": max_vars},
        seed,
        passed,
        {"pairs": pairs, "disjoint_tvd": t, "disjoint_map_gap": map_gap},
        records,
        ["pair", "vars", "tvd", "worst_map_gap"],
        rows,
    )


def _conditional_gap(params: dict) -> ExperimentReport:
    """Small TVD with an arbitrarily bad conditional-MAP gap, by construction."""
    k = Fraction(params.get("k", 10))
    eps = Fraction(params.get("eps", "1/20"))
    p_e = Fraction(params.get("p_e", "1/20"))

    def base_distribution(p_evidence: Fraction) -> DenseDistribution:
        # evidence x1=1; two completions carry p_e/2 each, rest of the
        # evidence slice is empty; the complement splits the remainder
        masses = [Fraction(0)] * 8
        masses[1] = p_evidence / 2  # (x1=1, x2=0, x3=0)
        masses[3] = p_evidence / 2  # (x1=1, x2=1, x3=0)
        off = (1 - p_evidence) / 4
        for idx in (0, 2, 4, 6):
            masses[idx] = off
        return DenseDistribution.from_masses(3, np.array(masses, dtype=object))

    records = []
    rows = []
    passed = True

    family = build_conditional_counterexample(base_distribution(p_e), {1: 1}, k, eps)
    tvd_exact = family.exact["tvd"]
    gap_exact = family.exact["conditional_gap"]
    ok = tvd_exact == k * eps * p_e and tvd_exact < eps and gap_exact == k * eps
    # independent check on the exact dense tables
    exact_p = DenseDistribution.from_masses(3, np.array(family.exact["p"], dtype=object))
    exact_q = DenseDistribution.from_masses(3, np.array(family.exact["q"], dtype=object))
    ok &= dv.tvd(exact_p, exact_q) == tvd_exact
    y_star = family.exact["y_star"]
    cond_p = exact_p.mass[y_star] / exact_p.prob({1: 1})
    cond_q = exact_q.mass[y_star] / exact_q.prob({1: 1})
    ok &= abs(cond_p - cond_q) == gap_exact
    passed &= ok
    records.append(
        {
            "k": str(k),
            "eps": str(eps),
            "p_e": str(p_e),
            "tvd": str(tvd_exact),
            "tvd_float": float(tvd_exact),
            "eps_float": float(eps),
            "conditional_gap": str(gap_exact),
            "conditional_gap_float": float(gap_exact),
            "ok": ok,
        }
    )
    rows.append([float(k), float(eps), float(p_e), float(tvd_exact), float(gap_exact)])

    # degenerate k=1: the gap equals eps exactly
    fam1 = build_conditional_counterexample(base_distribution(Fraction(1, 4)), {1: 1}, 1, eps)
    ok1 = fam1.exact["conditional_gap"] == eps
    passed &= ok1
    records.append({"k": "1", "gap_equals_eps": ok1})
    rows.append([1.0, float(eps), 0.25, float(fam1.exact["tvd"]), float(fam1.exact["conditional_gap"])])

    # shrinking P(e) tenfold with k*eps fixed scales the distance, not the gap
    fam_small = build_conditional_counterexample(base_distribution(p_e / 10), {1: 1}, k, eps)
    ok2 = (
        fam_small.exact["tvd"] == tvd_exact / 10
        and fam_small.exact["conditional_gap"] == gap_exact
    )
    passed &= ok2
    records.append({"p_e_shrunk": str(p_e / 10), "tvd_scales": ok2})
    rows.append([float(k), float(eps), float(p_e / 10), float(fam_small.exact["tvd"]), float(fam_small.exact["conditional_gap"])])

    return ExperimentReport(
        "conditional-gap",
        {"k": str(k), "eps": str(eps), "p_e": str(p_e)},
        None,
        passed,
        {"tvd": float(tvd_exact), "conditional_gap": float(gap_exact)},
        records,
        ["k", "eps", "p_e", "tvd", "conditional_gap"],
        rows,
    )


def _sauerhoff_support(params: dict) -> ExperimentReport:
    """Support of the lifted PC equals the function's models, exhaustively."""
    ns = tuple(params.get("ns", (3, 4)))
    records = []
    rows = []
    passed = True
    for n in ns:
        pc = build_p_n(n)
        dist = enumerate_distribution(pc)
        s_table = sauerhoff_tables(n)[0].astype(bool)
        agree = int(np.count_nonzero(dist.support() == s_table))
        total = s_table.size
        ok = agree == total and dist.normalized
        passed &= ok
        model_count = int(np.count_nonzero(s_table))
        density = model_count / total
        eta = 1.0 / ((1.0 - 1.0 / math.sqrt(2.0)) * total)
        uniform = uniform_over(s_table, n * n)
        tvd_u_pn = brute_tvd(uniform, dist)
        records.append(
            {
                "n": n,
                "assignments": total,
                "support_matches": agree,
                "normalized": dist.normalized,
                "ok": ok,
                "model_count": model_count,
                "density": density,
                "density_above_1_minus_inv_sqrt2": density >= 1.0 - 1.0 / math.sqrt(2.0),
                "tvd_uniform_vs_pn": tvd_u_pn,
                "eta_reference": eta,
                "tvd_below_eta": tvd_u_pn < eta,
            }
        )
        rows.append([n, total, agree, model_count, density, tvd_u_pn, eta])

    return ExperimentReport(
        "sauerhoff-support",
        {"ns": list(ns)},
        None,
        passed,
        {"ns": list(ns)},
        records,
        ["n", "assignments", "support_matches", "model_count", "density", "tvd_uniform_vs_pn", "eta"],
        rows,
    )


def _sauerhoff_size(params: dict) -> ExperimentReport:
    """Measured circuit sizes against the quadratic growth claim."""
    n_min = int(params.get("n_min", 3))
    n_max = int(params.get("n_max", 8))
    records = []
    rows = []
    counts = {}
    for n in range(n_min, n_max + 1):
        dnnf = build_sauerhoff_dnnf(n)
        nodes, edges = dnnf.size()
        counts[n] = nodes
        rows.append([n, nodes, edges, nodes / n**2])
        records.append({"n": n, "nodes": nodes, "edges": edges, "nodes_over_n2": nodes / n**2})

    ns = np.array(sorted(counts), dtype=float)
    vals = np.array([counts[int(n)] for n in ns], dtype=float)
    c_lsq = float((vals * ns**2).sum() / (ns**4).sum())
    c_max = float(max(vals / ns**2))
    subcubic = counts[n_max] / counts[n_min] < (n_max / n_min) ** 3
    fits = all(counts[int(n)] <= c_max * n**2 for n in ns)
    passed = bool(subcubic and fits)
    records.append(
        {
            "fitted_c_least_squares": c_lsq,
            "fitted_c_max_ratio": c_max,
            "all_counts_below_cmax_n2": fits,
            "growth_subcubic": subcubic,
        }
    )

    return ExperimentReport(
        "sauerhoff-size",
        {"n_min": n_min, "n_max": n_max},
        None,
        passed,
        {"fitted_c_least_squares": c_lsq, "fitted_c_max_ratio": c_max},
        records,
        ["n", "nodes", "edges", "nodes_over_n2"],
        rows,
    )


def _prune_exact(params: dict) -> ExperimentReport:
    """Pruned support equals the thresholded assignment set, in exact arithmetic."""
    trials = int(params.get("trials", 200))
    max_vars = int(params.get("max_vars", 10))
    seed = int(params.get("seed", 0))

    records = []
    rows = []
    passed = True
    for i in range(trials):
        rng = np.random.default_rng((seed, i))
        n = int(rng.integers(4, max_vars + 1))
        pc = random_detdec_pc(n, int(rng.integers(2**31)))
        tau = default_tau(n)
        exact_vals = enumerate_exact(pc)

        table = edge_bounds(pc)
        eb_ok = _edge_bounds_match_oracle(pc, exact_vals, table)

        pruned = prune(pc, tau)
        pruned_vals = enumerate_exact(pruned.circuit)
        support_ok = all(
            (pv == v) if v >= tau else (pv == 0)
            for pv, v in zip(pruned_vals, exact_vals)
        )
        props = check_properties(pruned.circuit)
        props_ok = props.smooth and props.decomposable and props.deterministic is True
        ok = bool(eb_ok and support_ok and props_ok)
        passed &= ok
        kept = sum(1 for v in exact_vals if v >= tau)
        records.append(
            {
                "trial": i,
                "vars": n,
                "tau": str(tau),
                "edges_removed": len(pruned.removed_edges),
                "rounds": pruned.rounds,
                "support_size": kept,
                "edge_bounds_match_oracle": eb_ok,
                "support_exact": support_ok,
                "stays_det_dec": props_ok,
                "ok": ok,
            }
        )
        rows.append([i, n, len(pruned.removed_edges), pruned.rounds, kept, int(ok)])

    return ExperimentReport(
        "prune-exact",
        {"trials": trials, "max_vars": max_vars},
        seed,
        passed,
        {"trials": trials},
        records,
        ["trial", "vars", "edges_removed", "rounds", "surviving_support", "ok"],
        rows,
    )


def _edge_bounds_match_oracle(pc, exact_vals, table) -> bool:
    """Trace accepting paths per assignment and compare per-edge maxima.

    Which edges an assignment uses depends only on which nodes are nonzero,
    so the tracing runs on vectorized boolean tables; the maxima themselves
    reuse the exact root values.
    """
    from .circuit import Leaf, Product

    idx = np.arange(1 << pc.num_vars, dtype=np.int64)
    nonzero: list = [None] * len(pc.nodes)
    for j, nd in enumerate(pc.nodes):
        if isinstance(nd, Leaf):
            bit = ((idx >> (nd.var - 1)) & 1).astype(bool)
            nonzero[j] = bit if nd.positive else ~bit
        elif isinstance(nd, Product):
            acc = nonzero[nd.children[0]].copy()
            for c in nd.children[1:]:
                acc &= nonzero[c]
            nonzero[j] = acc
        else:
            acc = nonzero[nd.children[0]].copy()
            for c in nd.children[1:]:
                acc |= nonzero[c]
            nonzero[j] = acc

    per_edge: dict[tuple[int, int], Fraction] = {}
    for i in np.nonzero(nonzero[pc.root])[0]:
        value = exact_vals[int(i)]
        stack = [pc.root]
        seen = set()
        while stack:
            j = stack.pop()
            if j in seen:
                continue
            seen.add(j)
            nd = pc.nodes[j]
            if isinstance(nd, Leaf):
                continue
            for c in nd.children:
                if nonzero[c][i]:
                    key = (j, c)
                    if key not in per_edge or value > per_edge[key]:
                        per_edge[key] = value
                    stack.append(c)
    return per_edge == table.bounds


def _weak_approx_pipeline(params: dict) -> ExperimentReport:
    """Prune-and-strip pipeline stays within the linear weak-approximation budget."""
    instances = int(params.get("instances", 100))
    min_vars = int(params.get("min_vars", 6))
    max_vars = int(params.get("max_vars", 10))
    seed = int(params.get("seed", 0))

    records = []
    rows = []
    passed = True
    for i in range(instances):
        rng = np.random.default_rng((seed, i))
        n = int(rng.integers(min_vars, max_vars + 1))
        density = float(rng.uniform(0.25, 0.85))
        table = rng.random(1 << n) < density
        if not table.any():
            table[int(rng.integers(table.size))] = True
        p = uniform_over(table, n)
        q0 = compile_uniform_pc(table, n)
        q = q0
        epsilon = 0.0
        for scale in (0.25, 0.15, 0.08, 0.04, 0.02):
            q = perturb_weights(q0, int(rng.integers(2**31)), scale=scale)
            epsilon = brute_tvd(p, enumerate_distribution(q))
            if epsilon < 0.125:
                break
        result = approx_to_weak(p, q)
        ok = result.error_count < result.bound or result.error_count == 0
        passed &= ok
        records.append(
            {
                "instance": i,
                "vars": n,
                "support_density": density,
                "epsilon": result.epsilon,
                "error_count": result.error_count,
                "bound": result.bound,
                "ok": ok,
            }
        )
        rows.append([i, n, result.epsilon, result.error_count, result.bound])

    return ExperimentReport(
        "weak-approx-pipeline",
        {"instances": instances, "min_vars": min_vars, "max_vars": max_vars},
        seed,
        passed,
        {"instances": instances},
        records,
        ["instance", "vars", "epsilon", "error_count", "bound"],
        rows,
    )


def _kconvex_bounds(params: dict) -> ExperimentReport:
    """TVD^2 <= D_f / k for the strongly convex rows, Pinsker for KL."""
    pairs = int(params.get("pairs", 1000))
    num_vars = int(params.get("vars", 4))
    seed = int(params.get("seed", 0))
    measures = tuple(params.get("measures", dv.BOUND_MEASURES))
    tol = 1e-9

    records = []
    rows = []
    passed = True
    worst_margin = {m: math.inf for m in measures}
    pinsker_ok = True
    for i in range(pairs):
        rng = np.random.default_rng((seed, i))
        p = random_distribution(num_vars, int(rng.integers(2**31)))
        q = random_distribution(num_vars, int(rng.integers(2**31)))
        t = brute_tvd(p, q)
        kl_val = dv.kl(p, q)
        pinsker_ok &= t <= dv.pinsker_bound(kl_val) + tol
        for m in measures:
            spec = dv.spec_for_pair(m, p, q)
            df = dv.f_divergence(p, q, spec)
            ok = t * t <= df / spec.k + tol
            passed &= ok
            worst_margin[m] = min(worst_margin[m], df / spec.k - t * t)
            rows.append([i, m, t, df, spec.k, df / spec.k])
    passed &= pinsker_ok
    for m in measures:
        records.append({"measure": m, "pairs": pairs, "min_margin": worst_margin[m], "ok": worst_margin[m] >= -tol})
    records.append({"pinsker_holds": pinsker_ok, "pairs": pairs})

    return ExperimentReport(
        "kconvex-bounds",
        {"pairs": pairs, "vars": num_vars, "measures": list(measures)},
        seed,
        passed,
        {"min_margin": {m: worst_margin[m] for m in measures}, "pinsker_holds": pinsker_ok},
        records,
        ["pair", "measure", "tvd", "f_divergence", "k", "df_over_k"],
        rows,
    )


_RUNNERS: dict[str, Callable[[dict], ExperimentReport]] = {
    "rel-to-tvd": _rel_to_tvd,
    "scaled-family": _scaled_family,
    "sat-gadget": _sat_gadget,
    "marginal-abs": _marginal_abs,
    "map-abs": _map_abs,
    "conditional-gap": _conditional_gap,
    "sauerhoff-support": _sauerhoff_support,
    "sauerhoff-size": _sauerhoff_size,
    "prune-exact": _prune_exact,
    "weak-approx-pipeline": _weak_approx_pipeline,
    "kconvex-bounds": _kconvex_bounds,
}
