"""Circuit data model: leaf/sum/product DAGs in probabilistic and logical flavors.

A circuit is a dense, topologically ordered tuple of nodes (children always
precede their parents) with a designated root. Probabilistic circuits carry
edge weights on sum nodes; logical circuits are weight-free and their
sum/product nodes read as OR/AND gates over literal leaves.

Variables are 1-based integers ``1..num_vars``. Node ids are the positions
in the node tuple; validation canonicalizes ids into a deterministic
topological order (DFS postorder from the root), which the text serializer
relies on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import PropertyError, ValidationError

PROBABILISTIC = "pc"
LOGICAL = "nnf"

#: Normalization tolerance for sum weights; double-precision accumulation
#: headroom over circuits of up to ~1e6 nodes.
WEIGHT_TOL = 1e-9

#: Exhaustive determinism checking is refused above this many variables.
DEFAULT_ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class Leaf:
    """Literal indicator over one variable (positive or negated)."""

    var: int
    positive: bool


@dataclass(frozen=True)
class Sum:
    """Weighted sum (probabilistic) or OR gate (logical, ``weights=None``)."""

    children: tuple[int, ...]
    weights: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class Product:
    """Product (probabilistic) or AND gate (logical)."""

    children: tuple[int, ...]


Node = Union[Leaf, Sum, Product]


@dataclass(frozen=True)
class Circuit:
    """A validated circuit. Immutable; safe to share between threads."""

    num_vars: int
    nodes: tuple[Node, ...]
    root: int
    flavor: str  # PROBABILISTIC or LOGICAL
    normalized: bool = True  # every sum's weights total 1 within WEIGHT_TOL

    @property
    def is_probabilistic(self) -> bool:
        return self.flavor == PROBABILISTIC

    @property
    def is_logical(self) -> bool:
        return self.flavor == LOGICAL

    def size(self) -> tuple[int, int]:
        """Exact (node_count, edge_count)."""
        edges = sum(len(n.children) for n in self.nodes if not isinstance(n, Leaf))
        return len(self.nodes), edges


def children_of(node: Node) -> tuple[int, ...]:
    return () if isinstance(node, Leaf) else node.children


def validate(
    num_vars: int,
    nodes: Iterable[Node],
    root: int,
    flavor: str = PROBABILISTIC,
    weight_policy: str = "normalized",
) -> Circuit:
    """Validate a raw node list and return a canonicalized :class:`Circuit`.

    Checks: acyclicity, dangling child ids, reachability of every node from
    the root, leaf variable ranges, and (probabilistic flavor) positive
    weights per sum child. ``weight_policy="normalized"`` additionally
    requires each sum's weights to total 1 within :data:`WEIGHT_TOL`;
    ``"positive"`` admits unnormalized circuits such as pruning outputs.

    Node ids are relabeled into DFS postorder from the root so that every
    child id precedes its parent.
    """
    nodes = list(nodes)
    if num_vars < 1:
        raise ValidationError("num-vars", f"num_vars must be >= 1, got {num_vars}")
    if flavor not in (PROBABILISTIC, LOGICAL):
        raise ValidationError("flavor", f"unknown flavor {flavor!r}")
    if weight_policy not in ("normalized", "positive"):
        raise ValidationError("weight-policy", f"unknown weight policy {weight_policy!r}")
    if not nodes:
        raise ValidationError("empty", "circuit has no nodes")
    if not (0 <= root < len(nodes)):
        raise ValidationError("root", f"root id {root} out of range")

    for i, node in enumerate(nodes):
        if isinstance(node, Leaf):
            if not (1 <= node.var <= num_vars):
                raise ValidationError(
                    "var-range", f"node {i}: variable {node.var} outside 1..{num_vars}"
                )
            continue
        if not node.children:
            raise ValidationError("no-children", f"node {i} has no children")
        if len(set(node.children)) != len(node.children):
            raise ValidationError("duplicate-child", f"node {i} lists a child twice")
        for c in node.children:
            if not (0 <= c < len(nodes)):
                raise ValidationError("dangling-child", f"node {i}: child id {c} undefined")
        if isinstance(node, Sum):
            _check_sum_weights(i, node, flavor, weight_policy)
        elif isinstance(node, Product):
            pass
        else:
            raise ValidationError("node-type", f"node {i} has unknown type {type(node)!r}")

    order = _postorder(nodes, root)
    if len(order) < len(nodes):
        missing = sorted(set(range(len(nodes))) - set(order))
        raise ValidationError(
            "unreachable", f"nodes {missing} are not reachable from root {root}"
        )

    relabel = {old: new for new, old in enumerate(order)}
    out: list[Node] = []
    for old in order:
        node = nodes[old]
        if isinstance(node, Leaf):
            out.append(node)
        elif isinstance(node, Sum):
            out.append(Sum(tuple(relabel[c] for c in node.children), node.weights))
        else:
            out.append(Product(tuple(relabel[c] for c in node.children)))

    normalized = flavor == LOGICAL or all(
        abs(sum(n.weights) - 1.0) <= WEIGHT_TOL for n in out if isinstance(n, Sum)
    )
    return Circuit(num_vars, tuple(out), relabel[root], flavor, normalized)


def _check_sum_weights(i: int, node: Sum, flavor: str, policy: str) -> None:
    if flavor == LOGICAL:
        if node.weights is not None:
            raise ValidationError("weights-on-nnf", f"node {i}: logical sums carry no weights")
        return
    if node.weights is None:
        raise ValidationError("weights-missing", f"node {i}: probabilistic sum lacks weights")
    if len(node.weights) != len(node.children):
        raise ValidationError(
            "weights-arity", f"node {i}: {len(node.weights)} weights for {len(node.children)} children"
        )
    for w in node.weights:
        if not (w > 0.0):
            # zero-weight edges would make support semantics ambiguous
            raise ValidationError("weight-zero", f"node {i}: nonpositive weight {w!r}")
        if w > 1.0 and policy == "normalized":
            raise ValidationError("weight-range", f"node {i}: weight {w!r} above 1")
    if policy == "normalized":
        total = sum(node.weights)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                "weight-sum", f"node {i}: weight sum {total!r} differs from 1 beyond {WEIGHT_TOL}"
            )


def _postorder(nodes: list[Node], root: int) -> list[int]:
    """Iterative DFS postorder; raises on cycles."""
    WHITE, GRAY, BLACK = 0, 1, 2
    state = [WHITE] * len(nodes)
    order: list[int] = []
    stack: list[tuple[int, int]] = [(root, 0)]
    state[root] = GRAY
    while stack:
        node_id, child_pos = stack[-1]
        cs = children_of(nodes[node_id])
        if child_pos < len(cs):
            stack[-1] = (node_id, child_pos + 1)
            c = cs[child_pos]
            if state[c] == GRAY:
                raise ValidationError("cycle", f"cycle through nodes {node_id} and {c}")
            if state[c] == WHITE:
                state[c] = GRAY
                stack.append((c, 0))
        else:
            stack.pop()
            state[node_id] = BLACK
            order.append(node_id)
    return order


def scopes(circuit: Circuit) -> tuple[frozenset, ...]:
    """Per-node scopes, computed bottom-up over the whole DAG."""
    out: list[frozenset] = []
    for node in circuit.nodes:
        if isinstance(node, Leaf):
            out.append(frozenset((node.var,)))
        else:
            s: frozenset = frozenset()
            for c in node.children:
                s = s | out[c]
            out.append(s)
    return tuple(out)


def scope(circuit: Circuit, node_id: Optional[int] = None) -> frozenset:
    """Scope of one node (default: the root)."""
    if node_id is None:
        node_id = circuit.root
    return scopes(circuit)[node_id]


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of the three structural checks.

    ``deterministic`` is ``None`` when the exhaustive check was refused
    (too many variables). ``witness`` carries the first failing property as
    ``(property_name, node_id, assignment_or_None)`` and is re-checkable.
    """

    smooth: bool
    decomposable: bool
    deterministic: Optional[bool]
    witness: Optional[tuple[str, int, Optional[dict]]] = None


def check_smooth(circuit: Circuit) -> tuple[bool, Optional[int]]:
    """True iff every sum node's children share one scope; else first offender."""
    sc = scopes(circuit)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Sum):
            first = sc[node.children[0]]
            if any(sc[c] != first for c in node.children[1:]):
                return False, i
    return True, None


def check_decomposable(circuit: Circuit) -> tuple[bool, Optional[int]]:
    """True iff every product's children have pairwise disjoint scopes."""
    sc = scopes(circuit)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Product):
            seen: set = set()
            for c in node.children:
                if seen & sc[c]:
                    return False, i
                seen |= sc[c]
    return True, None


def check_deterministic(
    circuit: Circuit, enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
) -> tuple[Optional[bool], Optional[tuple[int, dict]]]:
    """Exhaustively test whether every sum has at most one nonzero child.

    Exact for ``num_vars <= enumeration_limit``; beyond that returns
    ``(None, None)`` ("unverified") rather than guessing. A ``False``
    verdict carries a witness ``(node_id, assignment)`` with two nonzero
    children, chosen as the lowest assignment index then lowest node id.
    """
    from . import tables  # local import: tables depends on circuit types

    if circuit.num_vars > enumeration_limit:
        return None, None

    best: Optional[tuple[int, int]] = None  # (assignment index, node id)

    def visit(node_id, node, child_arrays, _own):
        nonlocal best
        if not isinstance(node, Sum) or len(node.children) < 2:
            return
        count = None
        for arr in child_arrays:
            nz = arr != 0
            count = nz.astype("int8") if count is None else count + nz
        bad = (count > 1).nonzero()[0]
        if bad.size:
            idx = int(bad[0]) + visit.offset
            if best is None or (idx, node_id) < best:
                best = (idx, node_id)

    for start, idx_arr in tables.iter_index_chunks(circuit.num_vars):
        visit.offset = start
        tables.feedforward(circuit, idx_arr, visit=visit)
        if best is not None and best[0] < start + idx_arr.size:
            break  # later chunks cannot improve the assignment index

    if best is None:
        return True, None
    idx, node_id = best
    assignment = {v: (idx >> (v - 1)) & 1 for v in range(1, circuit.num_vars + 1)}
    return False, (node_id, assignment)


def check_properties(
    circuit: Circuit, enumeration_limit: int = DEFAULT_ENUMERATION_LIMIT
) -> PropertyReport:
    """Run all three structural checks and bundle the first failure witness."""
    sm, sm_w = check_smooth(circuit)
    dec, dec_w = check_decomposable(circuit)
    det, det_w = check_deterministic(circuit, enumeration_limit)
    witness = None
    if not sm:
        witness = ("smooth", sm_w, None)
    elif not dec:
        witness = ("decomposable", dec_w, None)
    elif det is False:
        witness = ("deterministic", det_w[0], det_w[1])
    return PropertyReport(sm, dec, det, witness)


def smooth(circuit: Circuit) -> Circuit:
    """Smooth a decomposable circuit by filling scope gaps at sum children.

    Each variable missing from a sum child's scope is multiplied in as a
    1/2-1/2 sum over its two literals (probabilistic flavor) or as the
    disjunction of both literals (logical flavor). The support never
    changes, determinism of the input is preserved, and an already-smooth
    circuit is returned as-is. The gadget realizes, in plain feedforward
    semantics, the convention that a sum child is extended uniformly over
    the variables it does not mention.
    """
    ok, _ = check_decomposable(circuit)
    if not ok:
        raise PropertyError("smoothing requires a decomposable circuit")
    sc = scopes(circuit)
    is_smooth, _ = check_smooth(circuit)
    if is_smooth:
        return circuit

    nodes: list[Node] = list(circuit.nodes)
    gadget: dict[int, int] = {}  # var -> node id of the (v OR not-v) filler

    def gadget_for(var: int) -> int:
        if var not in gadget:
            nodes.append(Leaf(var, True))
            pos = len(nodes) - 1
            nodes.append(Leaf(var, False))
            neg = len(nodes) - 1
            if circuit.is_probabilistic:
                nodes.append(Sum((pos, neg), (0.5, 0.5)))
            else:
                nodes.append(Sum((pos, neg)))
            gadget[var] = len(nodes) - 1
        return gadget[var]

    for i, node in enumerate(circuit.nodes):
        if not isinstance(node, Sum):
            continue
        union: frozenset = frozenset()
        for c in node.children:
            union = union | sc[c]
        new_children = []
        changed = False
        for c in node.children:
            missing = sorted(union - sc[c])
            if missing:
                fillers = tuple(gadget_for(v) for v in missing)
                nodes.append(Product((c,) + fillers))
                new_children.append(len(nodes) - 1)
                changed = True
            else:
                new_children.append(c)
        if changed:
            nodes[i] = Sum(tuple(new_children), node.weights)

    policy = "normalized" if circuit.normalized else "positive"
    return validate(circuit.num_vars, nodes, circuit.root, circuit.flavor, policy)


def to_logical(circuit: Circuit) -> Circuit:
    """Strip weights: the logical circuit whose models are the PC's support.

    Node count is unchanged. Requires strictly positive sum weights (already
    enforced at validation; zero weights must be dropped by the caller).
    """
    if not circuit.is_probabilistic:
        raise ValueError("to_logical expects a probabilistic circuit")
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Sum) and any(not (w > 0.0) for w in node.weights):
            raise ValidationError("weight-zero", f"node {i} carries a zero-weight edge")
    nodes = [
        Sum(n.children) if isinstance(n, Sum) else n for n in circuit.nodes
    ]
    return validate(circuit.num_vars, nodes, circuit.root, LOGICAL)


def from_logical(circuit: Circuit, weight_policy: str = "uniform") -> Circuit:
    """Lift a decomposable logical circuit to a PC and smooth it.

    Every OR node becomes a sum with equal weights on its children; the
    support of the result equals the input's model set.
    """
    if not circuit.is_logical:
        raise ValueError("from_logical expects a logical circuit")
    if weight_policy != "uniform":
        raise ValueError(f"unsupported weight policy {weight_policy!r}")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise PropertyError(f"input is not decomposable (product node {offender})")
    nodes = [
        Sum(n.children, (1.0 / len(n.children),) * len(n.children))
        if isinstance(n, Sum)
        else n
        for n in circuit.nodes
    ]
    pc = validate(circuit.num_vars, nodes, circuit.root, PROBABILISTIC)
    return smooth(pc)


def size(circuit: Circuit) -> tuple[int, int]:
    """(node_count, edge_count) of a validated circuit."""
    return circuit.size()


def extract(circuit: Circuit, node_id: int) -> Circuit:
    """The subcircuit rooted at a node, revalidated with fresh dense ids."""
    policy = "normalized" if circuit.normalized else "positive"
    keep: dict[int, int] = {}
    out: list[Node] = []

    def visit(i: int) -> int:
        if i in keep:
            return keep[i]
        node = circuit.nodes[i]
        if isinstance(node, Leaf):
            new: Node = node
        elif isinstance(node, Sum):
            new = Sum(tuple(visit(c) for c in node.children), node.weights)
        else:
            new = Product(tuple(visit(c) for c in node.children))
        out.append(new)
        keep[i] = len(out) - 1
        return keep[i]

    root = visit(node_id)
    return validate(circuit.num_vars, out, root, circuit.flavor, policy)


def cover_full_scope(circuit: Circuit) -> Circuit:
    """Multiply unreferenced variables into the root so scope(root) is 1..num_vars.

    Uses the same 1/2-1/2 (or OR) gadgets as :func:`smooth`. No-op when the
    root already covers every variable.
    """
    missing = sorted(set(range(1, circuit.num_vars + 1)) - scope(circuit))
    if not missing:
        return circuit
    nodes: list[Node] = list(circuit.nodes)
    fillers = []
    for v in missing:
        nodes.append(Leaf(v, True))
        nodes.append(Leaf(v, False))
        if circuit.is_probabilistic:
            nodes.append(Sum((len(nodes) - 2, len(nodes) - 1), (0.5, 0.5)))
        else:
            nodes.append(Sum((len(nodes) - 2, len(nodes) - 1)))
        fillers.append(len(nodes) - 1)
    nodes.append(Product((circuit.root,) + tuple(fillers)))
    policy = "normalized" if circuit.normalized else "positive"
    return validate(circuit.num_vars, nodes, len(nodes) - 1, circuit.flavor, policy)


def warn_and_smooth(circuit: Circuit, operation: str) -> Circuit:
    """Auto-smooth a non-smooth circuit with a warning, for query routines."""
    ok, offender = check_smooth(circuit)
    if ok:
        return circuit
    warnings.warn(
        f"{operation}: circuit is not smooth (sum node {offender}); smoothing a copy first",
        stacklevel=3,
    )
    return smooth(circuit)
