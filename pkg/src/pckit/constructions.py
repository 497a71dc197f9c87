"""Explicit constructions: the Sauerhoff family with its quadratic-size
DNNF and lifted PC, the satisfiability reduction gadget, the three
counterexample distribution families, and uniform-support compilation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .circuit import (
    Circuit,
    Leaf,
    LOGICAL,
    PROBABILISTIC,
    Product,
    Sum,
    cover_full_scope,
    from_logical,
    smooth,
    validate,
)
from .cnf import CNF, model_indices
from .dense import (
    DenseDistribution,
    index_to_tuple,
    uniform_over_indices,
)
from .errors import BudgetError, PCError
from .oracle import DEFAULT_BUDGET, OracleBudget, brute_tvd, support_table

# --- Sauerhoff function family --------------------------------------------
#
# S_n is defined over the n x n bit matrix X = (x_ij). Row i tests whether
# its sum is divisible by 3; the row bits are XORed into R_n, and C_n is the
# same test on the transpose. S_n = R_n OR C_n. Matrix cell (i, j) is
# variable (i-1)*n + j, so row-major reading visits variables in order.


def matrix_var(n: int, i: int, j: int) -> int:
    return (i - 1) * n + j


def sauerhoff_g(bits: Sequence[int]) -> int:
    """1 iff the bit sum is divisible by 3."""
    return 1 if sum(bits) % 3 == 0 else 0


def _check_bits(n: int, bits: Sequence[int]) -> None:
    if len(bits) != n * n:
        raise ValueError(f"expected {n * n} matrix bits, got {len(bits)}")


def sauerhoff_r(n: int, bits: Sequence[int]) -> int:
    """XOR of the per-row divisible-by-3 tests."""
    _check_bits(n, bits)
    acc = 0
    for i in range(n):
        acc ^= sauerhoff_g(bits[i * n : (i + 1) * n])
    return acc


def sauerhoff_c(n: int, bits: Sequence[int]) -> int:
    """Row test applied to the transpose."""
    _check_bits(n, bits)
    acc = 0
    for j in range(n):
        acc ^= sauerhoff_g(bits[j::n])
    return acc


def sauerhoff_eval(n: int, bits: Sequence[int]) -> int:
    """S_n(X) = R_n(X) OR C_n(X)."""
    return sauerhoff_r(n, bits) | sauerhoff_c(n, bits)


def sauerhoff_tables(n: int, indices: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized (S, R, C) values over assignment indices (default: all 2^(n^2))."""
    if indices is None:
        if n * n > 24:
            raise BudgetError(f"full Sauerhoff table for n={n} is out of desk range")
        indices = np.arange(1 << (n * n), dtype=np.int64)
    shifts = np.arange(n * n, dtype=np.int64)
    bits = ((indices[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    grid = bits.reshape(-1, n, n)  # axis1 = row, axis2 = column
    row_g = (grid.sum(axis=2) % 3 == 0).astype(np.int8)
    col_g = (grid.sum(axis=1) % 3 == 0).astype(np.int8)
    r = row_g.sum(axis=1) % 2
    c = col_g.sum(axis=1) % 2
    return (r | c).astype(np.int8), r.astype(np.int8), c.astype(np.int8)


def _mod3_parity_branch(n: int, var_order: Sequence[int], nodes: list) -> int:
    """Ordered-decision branch tracking (finished-block parity, block sum mod 3).

    ``var_order`` visits the matrix in blocks of n cells; finishing a block
    folds its divisibility test into the parity. The branch accepts when the
    final parity is 1. States a block position cannot extend to acceptance
    are dropped, so the emitted circuit has no constant gates.
    """
    total = n * n

    def step(pos: int, state: tuple[int, int], bit: int) -> tuple[int, int]:
        parity, m = state
        m = (m + bit) % 3
        if pos % n == n - 1:  # block complete: fold the divisibility test
            parity ^= 1 if m == 0 else 0
            m = 0
        return parity, m

    alive: list[set] = [set() for _ in range(total + 1)]
    alive[total] = {(1, 0)}
    for pos in range(total - 1, -1, -1):
        for parity in (0, 1):
            for m in range(3):
                s = (parity, m)
                if any(step(pos, s, b) in alive[pos + 1] for b in (0, 1)):
                    alive[pos].add(s)

    leaves: dict[tuple[int, bool], int] = {}

    def leaf(var: int, positive: bool) -> int:
        key = (var, positive)
        if key not in leaves:
            nodes.append(Leaf(var, positive))
            leaves[key] = len(nodes) - 1
        return leaves[key]

    memo: dict[tuple[int, tuple[int, int]], int] = {}

    def node(pos: int, state: tuple[int, int]) -> int:
        key = (pos, state)
        if key in memo:
            return memo[key]
        var = var_order[pos]
        terms = []
        for bit in (0, 1):
            nxt = step(pos, state, bit)
            if nxt not in alive[pos + 1]:
                continue
            lit = leaf(var, bit == 1)
            if pos == total - 1:
                terms.append(lit)
            else:
                nodes.append(Product((lit, node(pos + 1, nxt))))
                terms.append(len(nodes) - 1)
        if len(terms) == 2:
            nodes.append(Sum(tuple(terms)))
            out = len(nodes) - 1
        else:
            out = terms[0]
        memo[key] = out
        return out

    start = (0, 0)
    if start not in alive[0]:
        raise PCError(f"branch for n={n} accepts nothing")
    return node(0, start)


def build_sauerhoff_dnnf(n: int) -> Circuit:
    """DNNF for S_n: two ordered-decision branches disjoined at the root.

    The row branch reads the matrix row-major and the column branch
    column-major, so each tracks its (mod-3 counter, parity) state with a
    constant number of states per layer and the whole circuit has O(n^2)
    nodes. Each branch alone is deterministic; the root disjunction is not.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    nodes: list = []
    row_order = [matrix_var(n, i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    col_order = [matrix_var(n, i, j) for j in range(1, n + 1) for i in range(1, n + 1)]
    r_root = _mod3_parity_branch(n, row_order, nodes)
    c_root = _mod3_parity_branch(n, col_order, nodes)
    nodes.append(Sum((r_root, c_root)))
    return validate(n * n, nodes, len(nodes) - 1, LOGICAL)


def build_p_n(n: int) -> Circuit:
    """The lifted PC: uniform parameters on the DNNF's sums, then smoothing.

    Positive exactly on the models of S_n; smooth and decomposable but not
    deterministic (the two branches overlap).
    """
    return from_logical(build_sauerhoff_dnnf(n))


@dataclass(frozen=True)
class SauerhoffInstance:
    n: int
    dnnf: Circuit
    pc: Circuit

    def g(self, bits: Sequence[int]) -> int:
        return sauerhoff_g(bits)

    def r(self, bits: Sequence[int]) -> int:
        return sauerhoff_r(self.n, bits)

    def c(self, bits: Sequence[int]) -> int:
        return sauerhoff_c(self.n, bits)

    def s(self, bits: Sequence[int]) -> int:
        return sauerhoff_eval(self.n, bits)


def build_sauerhoff(n: int) -> SauerhoffInstance:
    dnnf = build_sauerhoff_dnnf(n)
    return SauerhoffInstance(n, dnnf, from_logical(dnnf))


# --- satisfiability gadget --------------------------------------------------


@dataclass
class GadgetInstance:
    """Lifted formula (Y and f) or (not-Y and all-ones X), with its uniform P.

    ``P`` is the uniform distribution over the lifted formula's models;
    exact attributes are kept as rationals so the marginal identity
    P(Y=1) = mc_f / (mc_f + 1) can be checked without rounding.
    """

    cnf: CNF
    num_vars: int  # including Y
    y_var: int
    mc_f: int
    model_idx: np.ndarray
    P: DenseDistribution
    p_y1_exact: Fraction

    def lifted_holds(self, index: int) -> bool:
        n = self.cnf.num_vars
        y = (index >> (self.y_var - 1)) & 1
        x_bits = {v: (index >> (v - 1)) & 1 for v in range(1, n + 1)}
        if y:
            return self.cnf.holds(x_bits)
        return all(x_bits[v] == 1 for v in range(1, n + 1))


def build_sat_gadget(cnf: CNF, budget: OracleBudget = DEFAULT_BUDGET) -> GadgetInstance:
    """Lift a CNF with a fresh switch variable Y and build P uniform over the models.

    The lifted formula always has exactly mc_f + 1 models: the models of f
    with Y=1, plus the single all-ones assignment with Y=0.
    """
    n = cnf.num_vars
    budget.check_vars(n + 1, "gadget enumeration")
    f_models = model_indices(cnf, budget.max_vars)
    y_var = n + 1
    lifted = np.concatenate([f_models + (1 << n), np.array([(1 << n) - 1], dtype=np.int64)])
    lifted.sort()
    mc = int(f_models.size)
    p = uniform_over_indices(n + 1, lifted)
    gadget = GadgetInstance(cnf, n + 1, y_var, mc, lifted, p, Fraction(mc, mc + 1))
    assert lifted.size == mc + 1
    assert sum(Fraction(1, mc + 1) for m in lifted if (m >> n) & 1) == gadget.p_y1_exact
    return gadget


def sat_decision(gadget: GadgetInstance, q: DenseDistribution) -> bool:
    """Decide satisfiability of the gadget's CNF from any close approximator.

    Requires (and verifies) tvd(P, Q) < 1/4; the decision is then
    Q(Y=1) >= 1/4, which matches satisfiability exactly.
    """
    distance = brute_tvd(gadget.P, q)
    if not (distance < 0.25):
        raise ValueError(
            f"decision rule premise violated: tvd(P, Q) = {distance!r} is not below 1/4"
        )
    return q.prob({gadget.y_var: 1}) >= 0.25


# --- counterexample distribution families ----------------------------------


@dataclass
class CounterexampleFamily:
    """A (P, Q) pair with exact rational attributes verified at construction."""

    kind: str
    params: dict
    P: DenseDistribution
    Q: DenseDistribution
    exact: dict


def _exact_masses(dist: DenseDistribution) -> list[Fraction]:
    return [m if isinstance(m, Fraction) else Fraction(m) for m in dist.mass.tolist()]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    return Fraction(x)  # floats convert exactly


def build_scaled_family(
    p: DenseDistribution, event: Iterable[int], K
) -> CounterexampleFamily:
    """Divide P by K on the event, rescale the complement to renormalize.

    The mass ratio P/Q equals K on the event and (1-delta)/(1-delta/K)
    elsewhere, so the relative marginal error is pinned at K while every
    f-divergence obeys the closed form
    delta*f(K)/K + (1 - delta/K)*f((1-delta)/(1-delta/K)).
    """
    K = _as_fraction(K)
    if K <= 1:
        raise ValueError(f"K must exceed 1, got {K}")
    p_ex = _exact_masses(p)
    event = sorted(set(event))
    if any(not (0 <= i < len(p_ex)) for i in event):
        raise ValueError("event indices out of range")
    total = sum(p_ex, start=Fraction(0))
    if total != 1:
        raise ValueError("scaled family needs an exactly normalized rational P")
    delta = sum((p_ex[i] for i in event), start=Fraction(0))
    if not (0 < delta < 1):
        raise ValueError(f"event mass delta={delta} must lie strictly between 0 and 1")
    lam = (1 - delta / K) / (1 - delta)
    in_event = [False] * len(p_ex)
    for i in event:
        in_event[i] = True
    q_ex = [m / K if in_event[i] else lam * m for i, m in enumerate(p_ex)]
    assert sum(q_ex, start=Fraction(0)) == 1
    worst = max((p_ex[i] / q_ex[i] for i in range(len(p_ex)) if q_ex[i] > 0), default=None)
    assert worst == K
    q = DenseDistribution.from_masses(p.num_vars, np.array(q_ex, dtype=object))
    return CounterexampleFamily(
        kind="scaled",
        params={"K": float(K), "delta": float(delta)},
        P=p.to_float(),
        Q=q.to_float(),
        exact={"p": p_ex, "q": q_ex, "K": K, "delta": delta, "lambda": lam},
    )


def scaled_closed_form(spec_f, K, delta) -> float:
    """Closed-form f-divergence of the scaled family."""
    K, delta = float(K), float(delta)
    return delta * spec_f(K) / K + (1 - delta / K) * spec_f((1 - delta) / (1 - delta / K))


def scaled_instance(num_vars: int, K, delta) -> CounterexampleFamily:
    """Default P: mass delta on assignment 0, the rest spread uniformly."""
    delta = _as_fraction(delta)
    rest = (1 - delta) / ((1 << num_vars) - 1)
    masses = [delta] + [rest] * ((1 << num_vars) - 1)
    p = DenseDistribution.from_masses(num_vars, np.array(masses, dtype=object))
    return build_scaled_family(p, [0], K)


def build_conditional_counterexample(
    p: DenseDistribution, evidence: Mapping[int, int], k, eps
) -> CounterexampleFamily:
    """Shift mass k*eps*P(e) onto the conditional mode of the evidence slice.

    The absolute distance stays at k*eps*P(e) < eps while the conditional
    mode's probability moves by k*eps, which grows without bound as P(e)
    shrinks. All equalities are exact rational identities.
    """
    k = _as_fraction(k)
    eps = _as_fraction(eps)
    p_ex = _exact_masses(p)
    n = p.num_vars
    matches = [
        i
        for i in range(len(p_ex))
        if all(((i >> (v - 1)) & 1) == int(bool(x)) for v, x in evidence.items())
    ]
    p_e = sum((p_ex[i] for i in matches), start=Fraction(0))
    if p_e <= 0:
        raise ValueError("evidence has zero probability")
    if not (p_e < 1 / k):
        raise ValueError(f"need P(e) < 1/k, got P(e)={p_e} with k={k}")
    shift = k * eps * p_e
    ordered = sorted(matches, key=lambda i: (-p_ex[i], index_to_tuple(i, n)))
    y_star = ordered[0]
    y_one = next((i for i in ordered[1:] if p_ex[i] >= shift), None)
    if y_one is None:
        raise ValueError(
            "no second evidence completion carries enough mass to remove; "
            "lower k*eps or reshape P"
        )
    q_ex = list(p_ex)
    q_ex[y_star] += shift
    q_ex[y_one] -= shift
    assert sum(q_ex, start=Fraction(0)) == sum(p_ex, start=Fraction(0))
    tvd_exact = shift
    gap_exact = shift / p_e
    assert gap_exact == k * eps
    q = DenseDistribution.from_masses(n, np.array(q_ex, dtype=object))
    return CounterexampleFamily(
        kind="conditional_map",
        params={"k": float(k), "eps": float(eps), "p_e": float(p_e)},
        P=p.to_float(),
        Q=q.to_float(),
        exact={
            "p": p_ex,
            "q": q_ex,
            "k": k,
            "eps": eps,
            "p_e": p_e,
            "y_star": y_star,
            "y_one": y_one,
            "tvd": tvd_exact,
            "conditional_gap": gap_exact,
        },
    )


def build_disjoint_map_counterexample(p: DenseDistribution) -> CounterexampleFamily:
    """Relocate P's masses onto fresh assignments: MAP gap 0, distance 1.

    Requires the support to occupy at most half the assignment space so the
    relabeling has room.
    """
    p_ex = _exact_masses(p)
    support = [i for i, m in enumerate(p_ex) if m > 0]
    free = [i for i, m in enumerate(p_ex) if m == 0]
    if len(support) > len(free):
        raise ValueError("support occupies more than half the space; nowhere to relocate")
    q_ex = [Fraction(0)] * len(p_ex)
    for src, dst in zip(support, free):
        q_ex[dst] = p_ex[src]
    total = sum(p_ex, start=Fraction(0))
    q = DenseDistribution.from_masses(p.num_vars, np.array(q_ex, dtype=object))
    assert max(q_ex) == max(p_ex)  # identical multisets, so MAP gap is zero
    return CounterexampleFamily(
        kind="disjoint_map",
        params={},
        P=p.to_float(),
        Q=q.to_float(),
        exact={"p": p_ex, "q": q_ex, "tvd": total, "map_gap": Fraction(0)},
    )


# --- uniform supports and their compilation ---------------------------------


def uniform_over(
    source: Union[Circuit, np.ndarray, "callable"],
    num_vars: int,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> DenseDistribution:
    """Uniform distribution over the models of a circuit, table, or predicate."""
    table = support_table(source, num_vars, budget)
    idx = np.nonzero(table)[0]
    if idx.size == 0:
        raise PCError("support is unsatisfiable; no uniform distribution exists")
    return uniform_over_indices(num_vars, idx)


def compile_uniform_pc(
    source: Union[Circuit, np.ndarray, "callable"],
    num_vars: int,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> Circuit:
    """Deterministic decomposable PC that is exactly uniform over the models.

    Shannon expansion in variable order with edge weights set to the model
    count ratios; fully-unconstrained tails stop early and smoothing fills
    them with 1/2-1/2 gadgets, which keeps the distribution uniform.
    """
    table = support_table(source, num_vars, budget)
    if not table.any():
        raise PCError("cannot compile an unsatisfiable support")
    nodes: list = []

    def add(node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def build(sub: np.ndarray, var: int) -> Optional[int]:
        if sub.all():
            return None  # unconstrained tail; smoothing completes it
        lows, highs = sub[0::2], sub[1::2]
        m0, m1 = int(np.count_nonzero(lows)), int(np.count_nonzero(highs))
        terms = []
        weights = []
        for bit, half, m in ((0, lows, m0), (1, highs, m1)):
            if m == 0:
                continue
            lit = add(Leaf(var, bit == 1))
            tail = build(half, var + 1)
            terms.append(lit if tail is None else add(Product((lit, tail))))
            weights.append(m / (m0 + m1))
        if len(terms) == 1:
            return terms[0]
        return add(Sum(tuple(terms), tuple(weights)))

    root = build(table, 1)
    if root is None:  # every assignment is a model: uniform over everything
        root = add(Leaf(1, True))
        neg = add(Leaf(1, False))
        root = add(Sum((root, neg), (0.5, 0.5)))
    circuit = validate(num_vars, nodes, root, PROBABILISTIC)
    return cover_full_scope(smooth(circuit))
