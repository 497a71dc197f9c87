"""Brute-force ground truth and seeded random instance generators.

Everything here enumerates the full assignment space, so every operation
checks an :class:`OracleBudget` first and refuses oversized inputs instead
of silently degrading. Enumeration order is fixed (ascending assignment
index, single-threaded), so results are reproducible byte for byte.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import tables
from .circuit import (
    Circuit,
    Leaf,
    PROBABILISTIC,
    Product,
    Sum,
    cover_full_scope,
    smooth,
    validate,
)
from .dense import (
    DenseDistribution,
    NORMALIZATION_TOL,
    index_to_assignment,
    index_to_tuple,
)
from .errors import BudgetError

BUDGET_ENV_VAR = "PC_ORACLE_BUDGET"


def _default_max_vars() -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    return int(raw) if raw else 20


@dataclass(frozen=True)
class OracleBudget:
    """Hard ceilings for exhaustive work; exceeding them raises BudgetError."""

    max_vars: int = 20
    max_partial_vars: int = 12  # 3^n partial-assignment sweeps

    @classmethod
    def from_env(cls) -> "OracleBudget":
        return cls(max_vars=_default_max_vars())

    def check_vars(self, num_vars: int, what: str = "enumeration") -> None:
        if num_vars > self.max_vars:
            raise BudgetError(
                f"{what} over {num_vars} variables exceeds the budget of {self.max_vars}"
            )

    def check_partial_vars(self, num_vars: int, what: str = "partial-assignment sweep") -> None:
        if num_vars > self.max_partial_vars:
            raise BudgetError(
                f"{what} over {num_vars} variables exceeds the budget of {self.max_partial_vars}"
            )


DEFAULT_BUDGET = OracleBudget.from_env()

Predicate = Union[Circuit, Callable, np.ndarray]


def enumerate_distribution(
    circuit: Circuit, budget: OracleBudget = DEFAULT_BUDGET
) -> DenseDistribution:
    """Tabulate the circuit value at every assignment (Eq.-style feedforward).

    The ``normalized`` flag comes from the compensated exact sum; pruned or
    otherwise unnormalized circuits get ``False``.
    """
    budget.check_vars(circuit.num_vars)
    mass = tables.root_table(circuit).astype(np.float64)
    return DenseDistribution(
        circuit.num_vars, mass, abs(math.fsum(mass.tolist()) - 1.0) <= NORMALIZATION_TOL
    )


def enumerate_exact(circuit: Circuit, budget: OracleBudget = DEFAULT_BUDGET) -> list[Fraction]:
    """Per-assignment circuit values in exact rational arithmetic.

    Evaluated node-major over object arrays of Fractions; float weights
    convert exactly, so the result is the true rational value of the float
    circuit at every assignment.
    """
    budget.check_vars(circuit.num_vars, "exact enumeration")
    if not circuit.is_probabilistic:
        raise ValueError("exact enumeration expects a probabilistic circuit")
    n = circuit.num_vars
    idx = np.arange(1 << n, dtype=np.int64)
    one, zero = Fraction(1), Fraction(0)

    last_use = [0] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if not isinstance(node, Leaf):
            for c in node.children:
                last_use[c] = i

    vals: list = [None] * len(circuit.nodes)
    for i, node in enumerate(circuit.nodes):
        if isinstance(node, Leaf):
            bit = ((idx >> (node.var - 1)) & 1).astype(bool)
            arr = np.where(bit if node.positive else ~bit, one, zero)
        elif isinstance(node, Product):
            arr = vals[node.children[0]].copy()
            for c in node.children[1:]:
                arr = arr * vals[c]
        else:
            arr = Fraction(node.weights[0]) * vals[node.children[0]]
            for c, w in zip(node.children[1:], node.weights[1:]):
                arr = arr + Fraction(w) * vals[c]
        vals[i] = arr
        for c in () if isinstance(node, Leaf) else node.children:
            if last_use[c] == i and c != circuit.root:
                vals[c] = None
    return list(vals[circuit.root])


def support_table(source: Predicate, num_vars: int, budget: OracleBudget = DEFAULT_BUDGET) -> np.ndarray:
    """Boolean model table of a circuit, vectorized predicate, or table."""
    budget.check_vars(num_vars, "support tabulation")
    if isinstance(source, Circuit):
        if source.num_vars != num_vars:
            raise ValueError("variable count mismatch")
        return tables.support_table(source)
    if isinstance(source, np.ndarray):
        if source.shape != (1 << num_vars,):
            raise ValueError("table shape mismatch")
        return source.astype(bool)
    return tables.predicate_table(source, num_vars)


def brute_marginal(dist: DenseDistribution, assignment) -> float:
    return dist.prob(assignment)


def brute_map(dist: DenseDistribution, evidence=None) -> tuple[float, dict[int, int]]:
    value, idx = dist.max_completion(evidence or {})
    return value, index_to_assignment(idx, dist.num_vars)


def brute_count(source: Predicate, num_vars: int, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    return int(np.count_nonzero(support_table(source, num_vars, budget)))


def brute_tvd(p: DenseDistribution, q: DenseDistribution) -> float:
    if p.num_vars != q.num_vars:
        raise ValueError("dimension mismatch")
    return 0.5 * math.fsum(abs(float(a) - float(b)) for a, b in zip(p.mass, q.mass))


# --- random instance generators -------------------------------------------


@dataclass(frozen=True)
class DepthProfile:
    """Shape knobs for the decision-structure generator."""

    stop_prob: float = 0.25  # chance of ending a branch once past min_depth
    min_depth: int = 1


def random_detdec_pc(
    num_vars: int,
    seed: int,
    depth_profile: DepthProfile = DepthProfile(),
    budget: OracleBudget = DEFAULT_BUDGET,
) -> Circuit:
    """Seeded random smooth, decomposable, deterministic PC.

    Built as a recursive variable-split decision structure: each internal
    sum splits on a fresh variable with the two branches built
    independently; branches may stop early, in which case smoothing fills
    the remaining variables with 1/2-1/2 gadgets. Identical seeds yield
    identical circuits.
    """
    budget.check_vars(num_vars, "random circuit generation")
    rng = np.random.default_rng(seed)
    nodes: list = []

    def add(node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def build(avail: list[int], depth: int) -> Optional[int]:
        if not avail:
            return None
        if depth >= depth_profile.min_depth and rng.random() < depth_profile.stop_prob:
            return None
        pos = int(rng.integers(len(avail)))
        var = avail[pos]
        rest = avail[:pos] + avail[pos + 1 :]
        w = float(rng.uniform(0.1, 0.9))
        branches = []
        for positive in (True, False):
            lit = add(Leaf(var, positive))
            sub = build(rest, depth + 1)
            branches.append(lit if sub is None else add(Product((lit, sub))))
        return add(Sum(tuple(branches), (w, 1.0 - w)))

    root = build(list(range(1, num_vars + 1)), 0)
    circuit = validate(num_vars, nodes, root, PROBABILISTIC)
    circuit = cover_full_scope(smooth(circuit))
    _verify_emission(circuit, require_deterministic=True)
    return circuit


def random_smooth_pc(
    num_vars: int,
    seed: int,
    mixture_prob: float = 0.4,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> Circuit:
    """Seeded random smooth + decomposable PC, generally not deterministic.

    Mixture sums draw several independently structured children over the
    same scope, so child supports overlap almost surely.
    """
    budget.check_vars(num_vars, "random circuit generation")
    rng = np.random.default_rng(seed)
    nodes: list = []

    def add(node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def bernoulli(var: int) -> int:
        w = float(rng.uniform(0.05, 0.95))
        return add(Sum((add(Leaf(var, True)), add(Leaf(var, False))), (w, 1.0 - w)))

    def factorized(avail: list[int]) -> int:
        if len(avail) == 1:
            return bernoulli(avail[0])
        cut = int(rng.integers(1, len(avail)))
        order = [avail[j] for j in rng.permutation(len(avail))]
        return add(Product((build(order[:cut]), build(order[cut:]))))

    def build(avail: list[int]) -> int:
        if len(avail) > 1 and rng.random() < mixture_prob:
            k = int(rng.integers(2, 4))
            raw = rng.uniform(0.2, 1.0, size=k)
            ws = tuple(float(w) for w in raw / raw.sum())
            return add(Sum(tuple(factorized(avail) for _ in range(k)), ws))
        return factorized(avail)

    root = build(list(range(1, num_vars + 1)))
    circuit = validate(num_vars, nodes, root, PROBABILISTIC)
    _verify_emission(circuit, require_deterministic=False)
    return circuit


def _verify_emission(circuit: Circuit, require_deterministic: bool) -> None:
    """Generators re-check their own guarantees before handing a circuit out."""
    from .circuit import check_decomposable, check_deterministic, check_smooth

    ok, offender = check_smooth(circuit)
    if not ok:
        raise AssertionError(f"generator emitted a non-smooth circuit (node {offender})")
    ok, offender = check_decomposable(circuit)
    if not ok:
        raise AssertionError(f"generator emitted a non-decomposable circuit (node {offender})")
    if require_deterministic:
        det, witness = check_deterministic(circuit)
        if det is False:
            raise AssertionError(f"generator emitted a non-deterministic circuit: {witness}")


def perturb_weights(circuit: Circuit, seed: int, scale: float = 0.2) -> Circuit:
    """Jitter every sum weight multiplicatively and renormalize per node.

    The structure (hence the support) is untouched; the distribution moves.
    """
    rng = np.random.default_rng(seed)
    nodes: list = []
    for node in circuit.nodes:
        if isinstance(node, Sum):
            ws = np.array(node.weights) * np.exp(rng.uniform(-scale, scale, len(node.weights)))
            ws = ws / ws.sum()
            nodes.append(Sum(node.children, tuple(float(w) for w in ws)))
        else:
            nodes.append(node)
    return validate(circuit.num_vars, nodes, circuit.root, circuit.flavor)


def random_distribution(
    num_vars: int,
    seed: int,
    concentration: float = 1.0,
    zeros: float = 0.0,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> DenseDistribution:
    """Seeded random dense distribution; ``zeros`` is the expected null fraction."""
    budget.check_vars(num_vars, "random distribution")
    rng = np.random.default_rng(seed)
    mass = rng.gamma(concentration, size=1 << num_vars)
    if zeros > 0.0:
        kill = rng.random(mass.size) < zeros
        if kill.all():
            kill[int(rng.integers(mass.size))] = False
        mass[kill] = 0.0
    mass = mass / mass.sum()
    return DenseDistribution.from_masses(num_vars, mass)


def lex_argmax(values, num_vars: int) -> int:
    """Index of the maximal value, ties to the lexicographically smallest assignment."""
    best = None
    for i, v in enumerate(values):
        if best is None or v > values[best] or (
            v == values[best]
            and index_to_tuple(i, num_vars) < index_to_tuple(best, num_vars)
        ):
            best = i
    return best
