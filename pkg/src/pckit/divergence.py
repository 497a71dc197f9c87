"""Distances between dense distributions and approximation predicates.

Covers total variation distance (half-sum and max-event forms), generic
f-divergences with their strong-convexity constants, the resulting TVD
bounds, and the exhaustive relative/absolute approximator checks over all
partial assignments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .dense import (
    DenseDistribution,
    exact_sum,
    marginal_table,
    max_table,
    trit_to_assignment,
)
from .errors import DivergenceDomainError
from .oracle import DEFAULT_BUDGET, OracleBudget

_EVENT_FORM_TOL = 1e-12


def tvd(p: DenseDistribution, q: DenseDistribution):
    """Total variation distance: half the L1 gap between the mass tables.

    Also evaluates the equivalent max-event form (mass of the positive
    difference set) and insists the two agree to 1e-12; exact tables use
    rational arithmetic and must agree exactly.
    """
    if p.num_vars != q.num_vars:
        raise ValueError("dimension mismatch")
    diffs = [a - b for a, b in zip(p.mass.tolist(), q.mass.tolist())]
    half_sum = exact_sum(abs(d) for d in diffs) / 2
    event_form = exact_sum(d for d in diffs if d > 0)
    if isinstance(half_sum, Fraction) and isinstance(event_form, Fraction):
        gap = abs(half_sum - event_form)
        # the forms coincide exactly only for equal totals; tolerate the
        # normalization slack otherwise
        if p.normalized and q.normalized and gap != 0:
            raise AssertionError("TVD forms disagree on exact normalized tables")
    else:
        if abs(float(half_sum) - float(event_form)) > _EVENT_FORM_TOL + abs(
            float(p.total()) - float(q.total())
        ):
            raise AssertionError(
                f"TVD half-sum {half_sum!r} and max-event form {event_form!r} disagree"
            )
    return half_sum


@dataclass(frozen=True)
class DivergenceSpec:
    """An f-divergence generator with its k-convexity constant and ratio domain.

    ``domain`` bounds the ratio t = P(x)/Q(x); ``k`` lower-bounds f'' there.
    """

    name: str
    f: Callable[[float], float]
    k: float
    domain: tuple[float, float]
    lo_inclusive: bool = False
    hi_inclusive: bool = True

    def __post_init__(self):
        if abs(self.f(1.0)) > 1e-12:
            raise ValueError(f"{self.name}: generator must vanish at 1")

    def in_domain(self, t: float) -> bool:
        lo, hi = self.domain
        above = t >= lo if self.lo_inclusive else t > lo
        below = t <= hi if self.hi_inclusive else t < hi
        return above and below

    def second_difference_min(self, samples: int = 400) -> float:
        """Smallest sampled second difference of f over the domain.

        Grid-based check that the declared k-convexity constant is honest:
        the result must be at least ``k - 1e-6``. The step scales with t so
        cancellation error stays below that tolerance across the grid.
        """
        lo, hi = self.domain
        lo = max(lo, 1e-3)
        hi = min(hi, 1e3)
        ts = np.linspace(lo, hi, samples)
        worst = math.inf
        for t in ts:
            h = max(t, 1.0) * 2e-5
            t = min(max(t, lo + h), hi - h)
            dd = (self.f(t - h) - 2 * self.f(t) + self.f(t + h)) / (h * h)
            worst = min(worst, dd)
        return worst


def kl_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec("kl", lambda t: t * math.log(t), 1.0 / M, (0.0, M))


def tv_spec(M: float = math.inf) -> DivergenceSpec:
    return DivergenceSpec("tv", lambda t: abs(t - 1) / 2, 0.0, (0.0, math.inf))


def chi2_spec(M: float = math.inf) -> DivergenceSpec:
    return DivergenceSpec("chi2", lambda t: (t - 1) ** 2, 2.0, (0.0, math.inf))


def hellinger2_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec(
        "hellinger2", lambda t: 2 * (1 - math.sqrt(t)), M ** (-1.5) / 2, (0.0, M)
    )


def reverse_kl_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec("reverse_kl", lambda t: -math.log(t), 1.0 / M**2, (0.0, M))


def vincze_lecam_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec(
        "vincze_lecam", lambda t: (t - 1) ** 2 / (t + 1), 8.0 / (M + 1) ** 3, (0.0, M)
    )


def jensen_shannon_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec(
        "jensen_shannon",
        lambda t: (t + 1) * math.log(2 / (t + 1)) + t * math.log(t),
        1.0 / (M * (M + 1)),
        (0.0, M),
    )


def neyman_chi2_spec(M: float) -> DivergenceSpec:
    return DivergenceSpec("neyman_chi2", lambda t: 1 / t - 1, 2.0 / M**3, (0.0, M))


def sason_s_spec(s: float, M: float) -> DivergenceSpec:
    """Registered for completeness; not exercised by any bound experiment."""
    if s <= math.exp(-1.5):
        raise ValueError("sason_s requires s > e^(-3/2)")

    def f(t: float) -> float:
        return (s + t) ** 2 * math.log(s + t) - (s + 1) ** 2 * math.log(s + 1)

    return DivergenceSpec(
        "sason_s", f, 2 * math.log(s + M) + 3, (M, math.inf), lo_inclusive=True
    )


def alpha_divergence_spec(alpha: float, M: float) -> DivergenceSpec:
    """Registered for completeness; not exercised by any bound experiment."""
    if alpha in (1.0, -1.0):
        raise ValueError("alpha must differ from +-1")

    def f(t: float) -> float:
        return 4 * (1 - t ** ((1 + alpha) / 2)) / (1 - alpha**2)

    if alpha > 3:
        return DivergenceSpec(
            "alpha", f, M ** ((alpha - 3) / 2), (M, math.inf), lo_inclusive=True
        )
    return DivergenceSpec("alpha", f, M ** ((alpha - 3) / 2), (0.0, M))


#: Registry of the single-parameter (M) generator rows, keyed by CLI name.
SPEC_FACTORIES: dict[str, Callable[[float], DivergenceSpec]] = {
    "kl": kl_spec,
    "tv": tv_spec,
    "chi2": chi2_spec,
    "hellinger2": hellinger2_spec,
    "reverse_kl": reverse_kl_spec,
    "vincze_lecam": vincze_lecam_spec,
    "jensen_shannon": jensen_shannon_spec,
    "neyman_chi2": neyman_chi2_spec,
}

#: Rows whose k > 0 for finite M, used by the bound experiments.
BOUND_MEASURES = ("kl", "chi2", "hellinger2", "reverse_kl", "neyman_chi2")


def observed_max_ratio(p: DenseDistribution, q: DenseDistribution) -> float:
    """Largest P(x)/Q(x) over assignments where either mass is positive."""
    worst = 0.0
    for a, b in zip(p.mass.tolist(), q.mass.tolist()):
        if float(a) > 0 and float(b) == 0:
            return math.inf
        if float(b) > 0:
            worst = max(worst, float(a) / float(b))
    return worst


def spec_for_pair(name: str, p: DenseDistribution, q: DenseDistribution) -> DivergenceSpec:
    """Instantiate a registry row with M set to the observed max ratio."""
    return SPEC_FACTORIES[name](observed_max_ratio(p, q))


def f_divergence(p: DenseDistribution, q: DenseDistribution, spec: DivergenceSpec) -> float:
    """``sum_x Q(x) f(P(x)/Q(x))`` with 0*f(0/0)=0; P>0=Q gives +inf.

    A ratio outside the spec's domain raises
    :class:`~pckit.errors.DivergenceDomainError` carrying the offending
    assignment and ratio.
    """
    if p.num_vars != q.num_vars:
        raise ValueError("dimension mismatch")
    terms = []
    for i, (a, b) in enumerate(zip(p.mass.tolist(), q.mass.tolist())):
        a, b = float(a), float(b)
        if b == 0.0:
            if a == 0.0:
                continue
            return math.inf
        t = a / b
        if not spec.in_domain(t):
            raise DivergenceDomainError(
                f"ratio {t!r} at assignment index {i} outside {spec.name} domain {spec.domain}",
                assignment=i,
                ratio=t,
            )
        terms.append(b * spec.f(t))
    return math.fsum(terms)


def kl(p: DenseDistribution, q: DenseDistribution) -> float:
    """KL divergence with the usual 0 log 0 = 0 convention."""
    terms = []
    for a, b in zip(p.mass.tolist(), q.mass.tolist()):
        a, b = float(a), float(b)
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        terms.append(a * math.log(a / b))
    return math.fsum(terms)


def kconvex_tvd_bound(df_value: float, k: float) -> float:
    """TVD bound sqrt(D_f / k) from k-convexity; vacuous k=0 is refused."""
    if k <= 0.0:
        raise ValueError("k-convexity bound needs k > 0")
    if df_value < 0.0:
        raise ValueError("f-divergence value must be nonnegative")
    return math.sqrt(df_value / k)


def pinsker_bound(kl_value: float) -> float:
    """TVD bound sqrt(KL / 2)."""
    if kl_value < 0.0:
        raise ValueError("KL value must be nonnegative")
    return math.sqrt(kl_value / 2.0)


@dataclass(frozen=True)
class ApproximatorVerdict:
    """Outcome of an exhaustive partial-assignment sweep."""

    holds: bool
    worst_partial: Optional[dict[int, int]]
    worst_value: float  # worst ratio (relative) or worst absolute gap


def _check_partial_budget(p, q, budget: OracleBudget):
    if p.num_vars != q.num_vars:
        raise ValueError("dimension mismatch")
    budget.check_partial_vars(p.num_vars)


def is_relative_approximator(
    p: DenseDistribution,
    q: DenseDistribution,
    epsilon: float,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> ApproximatorVerdict:
    """Does 1/(1+eps) <= P(y)/Q(y) <= 1+eps hold for every partial assignment?

    Pairs where both marginals vanish pass; a one-sided zero fails. The
    verdict reports the worst ratio and where it occurs. Exact (rational)
    tables are swept in exact arithmetic.
    """
    _check_partial_budget(p, q, budget)
    mp, mq = marginal_table(p), marginal_table(q)
    n = p.num_vars
    worst_t = None
    worst_ratio = 1.0 if not p.is_exact else Fraction(1)
    failed_zero = None
    for t in range(mp.shape[0]):
        a, b = mp[t], mq[t]
        if a == 0 and b == 0:
            continue
        if a == 0 or b == 0:
            if failed_zero is None:
                failed_zero = t
            continue
        r = a / b if a > b else b / a
        if r > worst_ratio:
            worst_ratio, worst_t = r, t
    if failed_zero is not None:
        return ApproximatorVerdict(False, trit_to_assignment(failed_zero, n), math.inf)
    holds = worst_ratio <= 1 + epsilon
    where = trit_to_assignment(worst_t, n) if worst_t is not None else None
    return ApproximatorVerdict(bool(holds), where, worst_ratio)


def is_absolute_marginal_approximator(
    p: DenseDistribution,
    q: DenseDistribution,
    epsilon: float,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> ApproximatorVerdict:
    """Does |P(y) - Q(y)| < eps hold for every partial assignment?"""
    _check_partial_budget(p, q, budget)
    gaps = np.abs(marginal_table(p) - marginal_table(q))
    t = int(np.argmax(gaps))
    worst = gaps[t]
    return ApproximatorVerdict(
        bool(worst < epsilon), trit_to_assignment(t, p.num_vars), worst
    )


def is_absolute_map_approximator(
    p: DenseDistribution,
    q: DenseDistribution,
    epsilon: float,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> ApproximatorVerdict:
    """Does |max_y P(y,e) - max_y Q(y,e)| < eps hold for every evidence e?

    Evidence ranges over every assignment to every variable subset; free
    variables are maximized over.
    """
    _check_partial_budget(p, q, budget)
    gaps = np.abs(max_table(p) - max_table(q))
    t = int(np.argmax(gaps))
    worst = gaps[t]
    return ApproximatorVerdict(
        bool(worst < epsilon), trit_to_assignment(t, p.num_vars), worst
    )
