"""Tractable queries on circuits: feedforward evaluation, marginals, MAP,
model counting, conditionals, and support membership.

Assignments are mappings ``{var: 0 or 1}``; variables absent from the
mapping are unassigned. All probability arithmetic is plain float64 with
children folded left to right, which keeps scalar evaluation bit-identical
to the vectorized oracle; table-level reductions elsewhere use compensated
summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .circuit import (
    DEFAULT_ENUMERATION_LIMIT,
    Circuit,
    Leaf,
    Product,
    Sum,
    check_decomposable,
    check_deterministic,
    check_smooth,
    scope,
    smooth,
    warn_and_smooth,
)
from .errors import PropertyError

Assignment = Mapping[int, int]


@dataclass(frozen=True)
class QueryResult:
    """Value of a query; ``argmax`` is populated for MAP queries only."""

    value: float
    argmax: Optional[dict[int, int]] = None


def _values(circuit: Circuit, assignment: Assignment, free_value: float = 1.0) -> list:
    """Feedforward pass; unassigned leaf indicators take ``free_value``."""
    vals: list = [None] * len(circuit.nodes)
    logical = circuit.is_logical
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            x = assignment.get(node.var)
            if x is None:
                v = free_value
            else:
                v = 1.0 if bool(x) == node.positive else 0.0
            vals[i] = v
        elif isinstance(node, Product):
            v = vals[node.children[0]]
            for c in node.children[1:]:
                v = (v and vals[c]) if logical else v * vals[c]
            vals[i] = v
        else:
            if logical:
                vals[i] = 1.0 if any(vals[c] for c in node.children) else 0.0
            else:
                v = node.weights[0] * vals[node.children[0]]
                for c, w in zip(node.children[1:], node.weights[1:]):
                    v += w * vals[c]
                vals[i] = v
    return vals


def evaluate(circuit: Circuit, assignment: Assignment) -> float:
    """Feedforward value at a full assignment (leaf indicators, products, weighted sums)."""
    missing = [v for v in sorted(scope(circuit)) if v not in assignment]
    if missing:
        raise ValueError(f"assignment leaves scope variables unassigned: {missing}")
    return _values(circuit, assignment)[circuit.root]


def marginal(circuit: Circuit, assignment: Assignment = {}) -> float:
    """Marginal probability of a partial assignment on a smooth, decomposable PC.

    A single feedforward pass with both indicators of every unassigned
    variable set to 1. Non-smooth inputs are smoothed (with a warning); the
    result then follows the smoothed semantics. Equals the sum of
    :func:`evaluate` over all completions when scope(root) covers every
    variable.
    """
    if not circuit.is_probabilistic:
        raise PropertyError("marginal queries need a probabilistic circuit")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"marginal needs a decomposable circuit (product node {offender})")
    circuit = warn_and_smooth(circuit, "marginal")
    return _values(circuit, assignment)[circuit.root]


def conditional(circuit: Circuit, query: Assignment, evidence: Assignment) -> float:
    """``marginal(query ∪ evidence) / marginal(evidence)``."""
    for v, x in query.items():
        if v in evidence and evidence[v] != x:
            raise ValueError(f"query and evidence disagree on variable {v}")
    denom = marginal(circuit, evidence)
    if denom <= 0.0:
        raise ValueError("conditioning on zero-probability evidence")
    joint = dict(evidence)
    joint.update(query)
    return marginal(circuit, joint) / denom


def support_contains(circuit: Circuit, assignment: Assignment) -> bool:
    """Whether the full assignment gets positive value (is a model / in support)."""
    return evaluate(circuit, assignment) > 0


def map_query(
    circuit: Circuit,
    evidence: Assignment = {},
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> QueryResult:
    """Most probable completion of the evidence on a det-dec-smooth PC.

    Sum nodes take the weighted max of their children; the argmax is
    recovered by downward tracing, with ties broken toward the
    lexicographically smallest assignment (compared as the tuple of values
    over the node's scope in variable order). Refused on circuits known to
    be non-deterministic, where the max-pass value is only an upper bound.
    """
    if not circuit.is_probabilistic:
        raise PropertyError("MAP queries need a probabilistic circuit")
    ok, offender = check_smooth(circuit)
    if not ok:
        raise PropertyError(f"MAP needs a smooth circuit (sum node {offender})")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"MAP needs a decomposable circuit (product node {offender})")
    det, witness = check_deterministic(circuit, enumeration_limit)
    if det is False:
        raise PropertyError(
            f"MAP refused: circuit is not deterministic (sum node {witness[0]})"
        )

    from .circuit import scopes as _scopes

    sc = _scopes(circuit)
    best: list = [None] * len(circuit.nodes)  # (value, argmax dict)

    def lex_key(d: dict[int, int], vars_sorted: tuple) -> tuple:
        return tuple(d[v] for v in vars_sorted)

    scope_order = [tuple(sorted(s)) for s in sc]
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            x = evidence.get(node.var)
            if x is None:
                best[i] = (1.0, {node.var: 1 if node.positive else 0})
            else:
                v = 1.0 if bool(x) == node.positive else 0.0
                best[i] = (v, {node.var: x})
        elif isinstance(node, Product):
            v = best[node.children[0]][0]
            arg = dict(best[node.children[0]][1])
            for c in node.children[1:]:
                v = v * best[c][0]
                arg.update(best[c][1])
            best[i] = (v, arg)
        else:
            cand = None
            for c, w in zip(node.children, node.weights):
                cv = w * best[c][0]
                ck = lex_key(best[c][1], scope_order[i])
                if cand is None or cv > cand[0] or (cv == cand[0] and ck < cand[1]):
                    cand = (cv, ck, best[c][1])
            best[i] = (cand[0], cand[2])

    value, argmax = best[circuit.root]
    out = dict(argmax)
    for v, x in evidence.items():
        if v in out and out[v] != x and value > 0.0:
            raise AssertionError("argmax inconsistent with evidence")
        out.setdefault(v, x)
    return QueryResult(value, out)


def model_count(
    circuit: Circuit,
    strict: bool = True,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> int:
    """Exact model count of a (smoothed) deterministic decomposable logical circuit.

    Leaves count 1, products multiply, sums add; arbitrary-precision
    integers throughout. The circuit is smoothed first if needed. Variables
    outside the root scope are free and contribute a factor of two each.
    In strict mode an unverifiable determinism check (too many variables)
    is an error rather than a silent overcount.
    """
    if not circuit.is_logical:
        raise ValueError("model_count expects a logical circuit (use to_logical first)")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"model counting needs decomposability (product node {offender})")
    sm, _ = check_smooth(circuit)
    if not sm:
        circuit = smooth(circuit)
    det, witness = check_deterministic(circuit, enumeration_limit)
    if det is False:
        raise PropertyError(
            f"model_count on a non-deterministic circuit would overcount (sum node {witness[0]})"
        )
    if det is None and strict:
        raise PropertyError(
            "determinism unverified at this size; pass strict=False to count anyway"
        )

    counts: list[int] = [0] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            counts[i] = 1
        elif isinstance(node, Product):
            c = 1
            for ch in node.children:
                c *= counts[ch]
            counts[i] = c
        else:
            counts[i] = sum(counts[ch] for ch in node.children)
    free = circuit.num_vars - len(scope(circuit))
    return counts[circuit.root] << free


def log_evaluate(circuit: Circuit, assignment: Assignment) -> float:
    """Log-space twin of :func:`evaluate` for circuits too large for linear space."""
    missing = [v for v in sorted(scope(circuit)) if v not in assignment]
    if missing:
        raise ValueError(f"assignment leaves scope variables unassigned: {missing}")
    return _log_values(circuit, assignment)[circuit.root]


def log_marginal(circuit: Circuit, assignment: Assignment = {}) -> float:
    """Log-space twin of :func:`marginal`."""
    if not circuit.is_probabilistic:
        raise PropertyError("marginal queries need a probabilistic circuit")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"marginal needs a decomposable circuit (product node {offender})")
    circuit = warn_and_smooth(circuit, "log_marginal")
    return _log_values(circuit, assignment)[circuit.root]


def _log_values(circuit: Circuit, assignment: Assignment) -> list:
    if not circuit.is_probabilistic:
        raise PropertyError("log-space evaluation is for probabilistic circuits")
    neg_inf = -math.inf
    vals: list = [None] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            x = assignment.get(node.var)
            on = x is None or bool(x) == node.positive
            vals[i] = 0.0 if on else neg_inf
        elif isinstance(node, Product):
            vals[i] = sum(vals[c] for c in node.children)
        else:
            terms = [
                math.log(w) + vals[c]
                for c, w in zip(node.children, node.weights)
                if vals[c] > neg_inf
            ]
            if not terms:
                vals[i] = neg_inf
            else:
                m = max(terms)
                vals[i] = m + math.log(math.fsum(math.exp(t - m) for t in terms))
    return vals
