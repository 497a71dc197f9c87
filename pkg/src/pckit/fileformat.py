"""Text formats: circuits, dense distributions, and assignment strings.

Circuit files are line-based with dense ids from 0::

    pc 3            (or: nnf 3)
    L 0 1           leaf, literal +-var (negative = negated)
    L 1 -1
    S 2 2 0 0.3 1 0.7    sum: arity, then child/weight pairs (no weights in nnf)
    P 3 2 0 2            product: arity, then children
    R 3             root id

Weights are written with 17 significant digits so parsing reproduces the
exact float. Distribution files hold one ``<bits> <mass>`` line per nonzero
entry, where ``bits`` spells x_1..x_n left to right::

    dist 2
    01 0.25
    11 0.75

Assignment strings look like ``x1=1,x3=0``; unlisted variables are
unassigned (marginalized by queries that allow it).
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit, LOGICAL, Leaf, PROBABILISTIC, Product, Sum, validate
from .dense import DenseDistribution
from .errors import ValidationError


def format_weight(w: float) -> str:
    return f"{w:.17g}"


def serialize_circuit(circuit: Circuit) -> str:
    lines = [f"{circuit.flavor} {circuit.num_vars}"]
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            lit = node.var if node.positive else -node.var
            lines.append(f"L {i} {lit}")
        elif isinstance(node, Product):
            lines.append(f"P {i} {len(node.children)} " + " ".join(map(str, node.children)))
        else:
            parts = [f"S {i} {len(node.children)}"]
            if circuit.flavor == PROBABILISTIC:
                for c, w in zip(node.children, node.weights):
                    parts.append(f"{c} {format_weight(w)}")
            else:
                parts.extend(str(c) for c in node.children)
            lines.append(" ".join(parts))
    lines.append(f"R {circuit.root}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, weight_policy: str = "normalized") -> Circuit:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError("format", "empty circuit file")
    header = lines[0].split()
    if len(header) != 2 or header[0] not in (PROBABILISTIC, LOGICAL):
        raise ValidationError("format", f"bad header {lines[0]!r}")
    flavor, num_vars = header[0], int(header[1])

    nodes: dict[int, object] = {}
    root = None
    for ln in lines[1:]:
        parts = ln.split()
        kind = parts[0]
        if kind == "R":
            root = int(parts[1])
            continue
        node_id = int(parts[1])
        if node_id in nodes:
            raise ValidationError("format", f"node id {node_id} defined twice")
        if kind == "L":
            lit = int(parts[2])
            if lit == 0:
                raise ValidationError("format", "literal 0 is not a variable")
            nodes[node_id] = Leaf(abs(lit), lit > 0)
        elif kind == "P":
            k = int(parts[2])
            children = tuple(int(t) for t in parts[3 : 3 + k])
            if len(children) != k:
                raise ValidationError("format", f"product {node_id}: arity mismatch")
            nodes[node_id] = Product(children)
        elif kind == "S":
            k = int(parts[2])
            rest = parts[3:]
            if flavor == PROBABILISTIC:
                if len(rest) != 2 * k:
                    raise ValidationError("format", f"sum {node_id}: arity mismatch")
                children = tuple(int(rest[2 * j]) for j in range(k))
                weights = tuple(float(rest[2 * j + 1]) for j in range(k))
                nodes[node_id] = Sum(children, weights)
            else:
                if len(rest) != k:
                    raise ValidationError("format", f"sum {node_id}: arity mismatch")
                nodes[node_id] = Sum(tuple(int(t) for t in rest))
        else:
            raise ValidationError("format", f"unknown line kind {kind!r}")
    if root is None:
        raise ValidationError("format", "missing R (root) line")
    if sorted(nodes) != list(range(len(nodes))):
        raise ValidationError("format", "node ids must be dense from 0")
    node_list = [nodes[i] for i in range(len(nodes))]
    return validate(num_vars, node_list, root, flavor, weight_policy)


def write_circuit(circuit: Circuit, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_circuit(circuit))


def read_circuit(path, weight_policy: str = "normalized") -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read(), weight_policy)


def serialize_distribution(dist: DenseDistribution) -> str:
    n = dist.num_vars
    lines = [f"dist {n}"]
    for i, m in enumerate(dist.mass.tolist()):
        m = float(m)
        if m != 0.0:
            bits = "".join(str((i >> (v - 1)) & 1) for v in range(1, n + 1))
            lines.append(f"{bits} {format_weight(m)}")
    return "\n".join(lines) + "\n"


def parse_distribution(text: str) -> DenseDistribution:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    header = lines[0].split()
    if len(header) != 2 or header[0] != "dist":
        raise ValidationError("format", f"bad header {lines[0]!r}")
    n = int(header[1])
    mass = np.zeros(1 << n, dtype=np.float64)
    seen: set[int] = set()
    for ln in lines[1:]:
        bits, value = ln.split()
        if len(bits) != n or any(ch not in "01" for ch in bits):
            raise ValidationError("format", f"bad assignment bits {bits!r}")
        idx = sum(1 << v for v, ch in enumerate(bits) if ch == "1")
        if idx in seen:
            raise ValidationError("format", f"assignment {bits} listed twice")
        seen.add(idx)
        mass[idx] = float(value)
    return DenseDistribution.from_masses(n, mass)


def write_distribution(dist: DenseDistribution, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_distribution(dist))


def read_distribution(path) -> DenseDistribution:
    with open(path) as fh:
        return parse_distribution(fh.read())


def parse_assignment(text: str) -> dict[int, int]:
    """Parse ``x1=1,x3=0`` (case-insensitive, spaces tolerated)."""
    out: dict[int, int] = {}
    text = text.strip()
    if not text:
        return out
    for piece in text.split(","):
        piece = piece.strip().lower()
        if "=" not in piece:
            raise ValueError(f"bad assignment fragment {piece!r}")
        name, value = piece.split("=", 1)
        name = name.strip()
        if not name.startswith("x"):
            raise ValueError(f"variable {name!r} should look like x3")
        var = int(name[1:])
        val = int(value.strip())
        if val not in (0, 1):
            raise ValueError(f"value for {name} must be 0 or 1, got {value!r}")
        if var in out and out[var] != val:
            raise ValueError(f"conflicting values for x{var}")
        out[var] = val
    return out


def format_assignment(assignment: dict[int, int]) -> str:
    return ",".join(f"x{v}={assignment[v]}" for v in sorted(assignment))
