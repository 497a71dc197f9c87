"""Vectorized circuit evaluation over blocks of assignment indices.

Assignment encoding used everywhere in this package: index ``i`` assigns
``x_v = (i >> (v - 1)) & 1``, i.e. variable 1 is the least significant bit.
"""

from __future__ import annotations

from typing import Callable, Iterator, Optional

import numpy as np

from .circuit import Circuit, Leaf, Product, Sum

#: Assignment indices are processed in chunks of this many at a time so the
#: per-node value arrays stay within memory for 20-variable circuits.
CHUNK_BITS = 16


def iter_index_chunks(num_vars: int, chunk_bits: int = CHUNK_BITS) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, index array) covering 0..2^num_vars in ascending order."""
    total = 1 << num_vars
    step = 1 << min(chunk_bits, num_vars)
    for start in range(0, total, step):
        yield start, np.arange(start, min(start + step, total), dtype=np.int64)


def feedforward(
    circuit: Circuit,
    indices: np.ndarray,
    visit: Optional[Callable] = None,
) -> np.ndarray:
    """Evaluate every node at the given assignment indices; return the root row.

    Probabilistic circuits use weighted sums and products (float64, children
    folded left to right so scalar and vectorized evaluation agree bitwise);
    logical circuits use OR/AND over {0,1} (int8). Node arrays are freed as
    soon as their last parent has consumed them; ``visit(node_id, node,
    child_arrays, own_array)`` is called while the children are still alive.
    """
    last_use = [0] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if not isinstance(node, Leaf):
            for c in node.children:
                last_use[c] = i

    logical = circuit.is_logical
    lit_cache: dict[tuple[int, bool], np.ndarray] = {}

    def literal(var: int, positive: bool) -> np.ndarray:
        key = (var, positive)
        if key not in lit_cache:
            bit = ((indices >> (var - 1)) & 1).astype(np.int8)
            if not positive:
                bit = 1 - bit
            lit_cache[key] = bit if logical else bit.astype(np.float64)
        return lit_cache[key]

    values: list[Optional[np.ndarray]] = [None] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            arr = literal(node.var, node.positive)
        elif isinstance(node, Product):
            arr = values[node.children[0]].copy()
            for c in node.children[1:]:
                if logical:
                    arr &= values[c]
                else:
                    arr *= values[c]
        else:  # Sum
            if logical:
                arr = values[node.children[0]].copy()
                for c in node.children[1:]:
                    arr |= values[c]
            else:
                arr = node.weights[0] * values[node.children[0]]
                for c, w in zip(node.children[1:], node.weights[1:]):
                    arr += w * values[c]
        children = () if isinstance(node, Leaf) else node.children
        if visit is not None:
            visit(i, node, [values[c] for c in children], arr)
        values[i] = arr
        for c in children:
            if last_use[c] == i and c != circuit.root:
                values[c] = None

    return values[circuit.root]


def root_table(circuit: Circuit) -> np.ndarray:
    """Root value at every assignment, in index order (full 2^n table)."""
    parts = [feedforward(circuit, idx) for _, idx in iter_index_chunks(circuit.num_vars)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def support_table(circuit: Circuit) -> np.ndarray:
    """Boolean table of assignments where the circuit is positive."""
    return root_table(circuit) > 0


def predicate_table(fn: Callable[[np.ndarray], np.ndarray], num_vars: int) -> np.ndarray:
    """Tabulate a vectorized predicate (index array -> bool array)."""
    parts = [np.asarray(fn(idx), dtype=bool) for _, idx in iter_index_chunks(num_vars)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts)
