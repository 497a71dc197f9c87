"""Threshold pruning of deterministic circuits via per-edge value bounds,
plus the pipeline that turns a close approximator of a uniform distribution
into a weak approximator of its support.

Edge-bound arithmetic runs in exact rationals so pruning decisions and the
oracle's reference sets can be compared without rounding; the pruned
circuit itself keeps the original float weights, so values on the surviving
support are bit-identical to the input's.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .circuit import (
    Circuit,
    DEFAULT_ENUMERATION_LIMIT,
    Leaf,
    Product,
    Sum,
    check_decomposable,
    check_deterministic,
    check_smooth,
    to_logical,
    validate,
)
from .dense import DenseDistribution
from .errors import BoundViolationError, EmptySupportError, PropertyError
from .inference import _values
from .oracle import DEFAULT_BUDGET, OracleBudget, brute_tvd, enumerate_distribution, support_table


@dataclass
class EdgeBoundTable:
    """Exact per-edge maxima for a det-dec-smooth PC.

    ``submax[c]`` is the largest value node c can take over assignments to
    its scope; ``context[c]`` the largest weight the rest of the circuit can
    contribute above c; ``bounds[(n, c)]`` the largest circuit output among
    assignments whose accepting path uses edge (n, c).
    """

    bounds: dict[tuple[int, int], Fraction]
    submax: list[Fraction]
    context: list[Optional[Fraction]]


def _require_detdec(circuit: Circuit, enumeration_limit: int, what: str) -> None:
    if not circuit.is_probabilistic:
        raise PropertyError(f"{what} expects a probabilistic circuit")
    ok, offender = check_smooth(circuit)
    if not ok:
        raise PropertyError(f"{what} needs a smooth circuit (sum node {offender})")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"{what} needs a decomposable circuit (product node {offender})")
    det, witness = check_deterministic(circuit, enumeration_limit)
    if det is False:
        raise PropertyError(f"{what} needs a deterministic circuit (sum node {witness[0]})")
    if det is None:
        warnings.warn(
            f"{what}: determinism unverified at {circuit.num_vars} variables; "
            "the per-edge bounds are exact only if the circuit is deterministic",
            stacklevel=3,
        )


def _edge_bounds_raw(
    nodes: list, root: int, weights: list[Optional[list[Fraction]]]
) -> EdgeBoundTable:
    """Two-pass submax/context sweep over an (already reduced) node list."""
    n_nodes = len(nodes)
    submax: list[Fraction] = [Fraction(0)] * n_nodes
    for i, node in enumerate(nodes):
        if node is None:
            continue
        if isinstance(node, Leaf):
            submax[i] = Fraction(1)
        elif isinstance(node, Product):
            v = Fraction(1)
            for c in node.children:
                v *= submax[c]
            submax[i] = v
        else:
            submax[i] = max(w * submax[c] for c, w in zip(node.children, weights[i]))

    context: list[Optional[Fraction]] = [None] * n_nodes
    context[root] = Fraction(1)
    bounds: dict[tuple[int, int], Fraction] = {}
    for i in range(n_nodes - 1, -1, -1):
        node = nodes[i]
        if node is None or isinstance(node, Leaf) or context[i] is None:
            continue
        if isinstance(node, Sum):
            for c, w in zip(node.children, weights[i]):
                cand = context[i] * w
                bounds[(i, c)] = cand * submax[c]
                if context[c] is None or cand > context[c]:
                    context[c] = cand
        else:
            for c in node.children:
                cand = context[i]
                for sib in node.children:
                    if sib != c:
                        cand = cand * submax[sib]
                bounds[(i, c)] = cand * submax[c]
                if context[c] is None or cand > context[c]:
                    context[c] = cand
    return EdgeBoundTable(bounds, submax, context)


def edge_bounds(
    circuit: Circuit, enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
) -> EdgeBoundTable:
    """Exact edge bounds of a smooth, decomposable, deterministic PC."""
    _require_detdec(circuit, enumeration_limit, "edge_bounds")
    weights = [
        [Fraction(w) for w in n.weights] if isinstance(n, Sum) else None
        for n in circuit.nodes
    ]
    return _edge_bounds_raw(list(circuit.nodes), circuit.root, weights)


@dataclass
class PrunedCircuit:
    """Result of threshold pruning; the circuit is left unnormalized.

    Assignments keep their exact original value when it reaches the
    threshold and evaluate to zero otherwise. ``removed_edges`` lists
    ``(round, parent, child, reason)`` in the input circuit's node ids.
    """

    circuit: Circuit
    tau: Fraction
    removed_edges: list[tuple[int, int, int, str]]
    rounds: int

    def surviving_mass(self) -> float:
        """Total remaining mass, by one feedforward pass with all indicators 1."""
        return _values(self.circuit, {})[self.circuit.root]


def default_tau(num_vars: int) -> Fraction:
    return Fraction(1, 1 << (num_vars + 1))


def prune(
    circuit: Circuit,
    tau: Union[None, float, Fraction, str] = None,
    renormalize: bool = False,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> PrunedCircuit:
    """Delete sum edges whose edge bound falls below tau, to a fixpoint.

    Each round recomputes exact edge bounds, deletes every sum edge bounded
    below tau, and sweeps out dead nodes (emptied sums, products that lost a
    child); bounds tighten as mass disappears, so the loop repeats until no
    edge qualifies. Assignments worth at least tau are never affected; for
    decision-structured circuits (every low-value assignment class owns a
    private edge) the surviving support is exactly the set of assignments
    whose original value reaches tau.

    Determinism, smoothness, and decomposability are preserved. Raises
    :class:`EmptySupportError` when everything falls below threshold.
    ``renormalize=True`` wraps the root so the remaining mass integrates
    to one (weights then exceed one where mass was lost).
    """
    _require_detdec(circuit, enumeration_limit, "prune")
    if tau is None or tau == "auto":
        tau = default_tau(circuit.num_vars)
    else:
        tau = Fraction(tau)
    if not tau > 0:
        raise ValueError("tau must be positive")

    nodes: list = list(circuit.nodes)
    float_weights: list = [list(n.weights) if isinstance(n, Sum) else None for n in nodes]
    weights: list = [
        [Fraction(w) for w in n.weights] if isinstance(n, Sum) else None for n in nodes
    ]
    removed: list[tuple[int, int, int, str]] = []
    max_rounds = circuit.size()[1] + 1

    rounds = 0
    for _ in range(max_rounds):
        rounds += 1
        table = _edge_bounds_raw(nodes, circuit.root, weights)
        doomed = [
            (p, c)
            for (p, c), eb in table.bounds.items()
            if isinstance(nodes[p], Sum) and eb < tau
        ]
        if not doomed:
            break
        for p, c in doomed:
            pos = nodes[p].children.index(c)
            nodes[p] = Sum(
                nodes[p].children[:pos] + nodes[p].children[pos + 1 :],
                None,
            )
            del weights[p][pos]
            del float_weights[p][pos]
            removed.append((rounds, p, c, "edge-bound"))
        _sweep_dead(nodes, weights, float_weights, circuit.root, rounds, removed)

    return _materialize(circuit, nodes, float_weights, tau, removed, rounds, renormalize)


def _sweep_dead(nodes, weights, float_weights, root, round_no, removed) -> None:
    """Remove emptied sums and cascade through products, children-first."""
    dead = [False] * len(nodes)
    for i, node in enumerate(nodes):
        if node is None:
            dead[i] = True
            continue
        if isinstance(node, Leaf):
            continue
        alive_children = [c for c in node.children if not dead[c]]
        if isinstance(node, Product):
            if len(alive_children) < len(node.children):
                dead[i] = True
                nodes[i] = None
        else:
            if len(alive_children) < len(node.children):
                for c in node.children:
                    if dead[c]:
                        pos = nodes[i].children.index(c)
                        nodes[i] = Sum(
                            nodes[i].children[:pos] + nodes[i].children[pos + 1 :], None
                        )
                        del weights[i][pos]
                        del float_weights[i][pos]
                        removed.append((round_no, i, c, "dead-child"))
            if not nodes[i].children:
                dead[i] = True
                nodes[i] = None
    if dead[root]:
        raise EmptySupportError("every accepting path falls below the pruning threshold")


def _materialize(
    original: Circuit, nodes, float_weights, tau, removed, rounds, renormalize
) -> PrunedCircuit:
    """Garbage-collect unreachable nodes and rebuild a validated circuit."""
    keep: list[Optional[int]] = [None] * len(nodes)
    order: list[int] = []

    def visit(i: int) -> int:
        if keep[i] is not None:
            return keep[i]
        node = nodes[i]
        if isinstance(node, Leaf):
            new = node
        elif isinstance(node, Product):
            new = Product(tuple(visit(c) for c in node.children))
        else:
            if len(node.children) == 1 and float_weights[i][0] == 1.0:
                # weight-1 pass-through: collapsing cannot change any value
                keep[i] = visit(node.children[0])
                return keep[i]
            new = Sum(tuple(visit(c) for c in node.children), tuple(float_weights[i]))
        order.append(new)
        keep[i] = len(order) - 1
        return keep[i]

    root = visit(original.root)
    pruned = validate(original.num_vars, order, root, original.flavor, "positive")
    result = PrunedCircuit(pruned, tau, removed, rounds)
    if renormalize:
        mass = result.surviving_mass()
        nodes2 = list(pruned.nodes) + [Sum((pruned.root,), (1.0 / mass,))]
        result.circuit = validate(
            original.num_vars, nodes2, len(nodes2) - 1, original.flavor, "positive"
        )
    return result


# --- weak approximation -----------------------------------------------------


def weak_approx_error(
    f: Union[Circuit, np.ndarray, "callable"],
    g: Union[Circuit, np.ndarray, "callable"],
    num_vars: int,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> int:
    """Exact count of the symmetric difference between two model sets."""
    tf = support_table(f, num_vars, budget)
    tg = support_table(g, num_vars, budget)
    return int(np.count_nonzero(tf != tg))


@dataclass
class WeakApproxResult:
    g: Circuit  # deterministic decomposable logical circuit
    error_count: int
    bound: float  # 4 * epsilon * 2^n
    epsilon: float  # measured tvd(P, Q)
    pruned: PrunedCircuit


def approx_to_weak(
    p: DenseDistribution,
    q: Circuit,
    budget: OracleBudget = DEFAULT_BUDGET,
    enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> WeakApproxResult:
    """Turn a close det-dec approximator of a uniform P into a weak approximator
    of P's support.

    Measures epsilon = tvd(P, Q) by enumeration (must be below 1/8), prunes
    Q at 1/2^(n+1), and strips weights; the support g of the result misses
    or overshoots the support f of P on fewer than 4*epsilon*2^n
    assignments. The count is exact; a violation raises
    :class:`BoundViolationError`.
    """
    n = p.num_vars
    if q.num_vars != n:
        raise ValueError("variable count mismatch")
    nonzero = [float(m) for m in p.mass.tolist() if float(m) > 0]
    if not nonzero or max(nonzero) != min(nonzero):
        raise ValueError("P must be uniform over its support")
    q_dist = enumerate_distribution(q, budget)
    epsilon = brute_tvd(p, q_dist)
    if not epsilon < 0.125:
        raise ValueError(f"measured tvd {epsilon!r} is not below 1/8; hypothesis fails")
    pruned = prune(q, default_tau(n), enumeration_limit=enumeration_limit)
    g = to_logical(pruned.circuit)
    error = weak_approx_error(p.support(), g, n, budget)
    bound = 4.0 * epsilon * (1 << n)
    if not (error < bound or error == 0):
        raise BoundViolationError(
            f"weak approximation error {error} reached the bound {bound!r}"
        )
    return WeakApproxResult(g, error, bound, epsilon, pruned)
