import math
from fractions import Fraction

import numpy as np
import pytest

from pckit import divergence as dv
from pckit.dense import DenseDistribution, trit_to_assignment
from pckit.errors import DivergenceDomainError
from pckit.oracle import brute_tvd, random_distribution


def dense(masses, exact=False):
    n = int(math.log2(len(masses)))
    arr = np.array(masses, dtype=object if exact else np.float64)
    return DenseDistribution.from_masses(n, arr)


class TestTvd:
    def test_identity(self, base_seed):
        p = random_distribution(4, seed=base_seed)
        assert dv.tvd(p, p) == 0.0

    def test_disjoint_supports(self):
        p = dense([0.5, 0.5, 0.0, 0.0])
        q = dense([0.0, 0.0, 0.5, 0.5])
        assert dv.tvd(p, q) == 1.0

    def test_direct_formula(self):
        assert dv.tvd(dense([0.5, 0.5]), dense([1.0, 0.0])) == 0.5

    def test_symmetry_and_range(self, base_seed):
        for trial in range(25):
            p = random_distribution(5, seed=(base_seed, trial, 0))
            q = random_distribution(5, seed=(base_seed, trial, 1))
            t = dv.tvd(p, q)
            assert 0.0 <= t <= 1.0
            assert t == dv.tvd(q, p)

    def test_identity_of_indiscernibles(self, base_seed):
        p = random_distribution(5, seed=base_seed + 7)
        q = DenseDistribution.from_masses(5, p.mass.copy())
        assert abs(dv.tvd(p, q)) <= 1e-12

    def test_triangle_inequality(self, base_seed):
        for trial in range(25):
            p = random_distribution(4, seed=(base_seed, trial, 2))
            q = random_distribution(4, seed=(base_seed, trial, 3))
            r = random_distribution(4, seed=(base_seed, trial, 4))
            assert dv.tvd(p, r) <= dv.tvd(p, q) + dv.tvd(q, r) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dv.tvd(dense([1.0, 0.0]), dense([0.25] * 4))

    def test_exact_tables(self):
        p = dense([Fraction(1, 2), Fraction(1, 2), 0, 0], exact=True)
        q = dense([0, 0, Fraction(1, 2), Fraction(1, 2)], exact=True)
        assert dv.tvd(p, q) == Fraction(1)


class TestSpecs:
    @pytest.mark.parametrize("name", dv.SPEC_FACTORIES)
    def test_generator_vanishes_at_one(self, name):
        spec = dv.SPEC_FACTORIES[name](4.0)
        assert abs(spec.f(1.0)) <= 1e-12

    @pytest.mark.parametrize("name", dv.BOUND_MEASURES + ("vincze_lecam", "jensen_shannon"))
    def test_sampled_second_difference_at_least_k(self, name):
        for M in (1.5, 4.0, 20.0):
            spec = dv.SPEC_FACTORIES[name](M)
            assert spec.second_difference_min() >= spec.k - 1e-6

    def test_registry_only_rows(self):
        # registered for completeness; convexity constants still honest
        sason = dv.sason_s_spec(1.0, 2.0)
        assert sason.second_difference_min() >= sason.k - 1e-6
        alpha = dv.alpha_divergence_spec(0.5, 3.0)
        assert alpha.second_difference_min() >= alpha.k - 1e-6

    def test_tv_row_has_zero_k(self):
        assert dv.tv_spec().k == 0.0


class TestFDivergence:
    def test_identity_gives_zero(self, base_seed):
        p = random_distribution(4, seed=base_seed + 11)
        for name in dv.BOUND_MEASURES:
            spec = dv.spec_for_pair(name, p, p)
            assert dv.f_divergence(p, p, spec) == pytest.approx(0.0, abs=1e-12)

    def test_pearson_direct_sum(self):
        p = dense([0.6, 0.4])
        q = dense([0.5, 0.5])
        expected = (0.6 - 0.5) ** 2 / 0.5 + (0.4 - 0.5) ** 2 / 0.5
        assert dv.f_divergence(p, q, dv.chi2_spec()) == pytest.approx(expected, abs=1e-15)

    def test_zero_zero_convention(self):
        p = dense([0.5, 0.5, 0.0, 0.0])
        q = dense([0.25, 0.75, 0.0, 0.0])
        spec = dv.spec_for_pair("kl", p, q)
        assert math.isfinite(dv.f_divergence(p, q, spec))

    def test_one_sided_zero_is_infinite(self):
        p = dense([0.5, 0.5])
        q = dense([1.0, 0.0])
        assert dv.f_divergence(p, q, dv.chi2_spec()) == math.inf

    def test_domain_violation_reported(self):
        p = dense([0.9, 0.1])
        q = dense([0.5, 0.5])
        spec = dv.kl_spec(1.2)  # observed ratio 1.8 exceeds the declared M
        with pytest.raises(DivergenceDomainError) as exc:
            dv.f_divergence(p, q, spec)
        assert exc.value.ratio == pytest.approx(1.8)
        assert exc.value.assignment == 0


class TestBounds:
    def test_zero_divergence_zero_bound(self):
        assert dv.kconvex_tvd_bound(0.0, 2.0) == 0.0

    def test_vacuous_k_refused(self):
        with pytest.raises(ValueError):
            dv.kconvex_tvd_bound(0.5, 0.0)

    def test_pinsker_values(self):
        assert dv.pinsker_bound(0.0) == 0.0
        assert dv.pinsker_bound(0.5) == 0.5

    def test_chi2_bound_random(self, base_seed):
        for trial in range(50):
            p = random_distribution(4, seed=(base_seed, trial, 5))
            q = random_distribution(4, seed=(base_seed, trial, 6))
            t = dv.tvd(p, q)
            chi2 = dv.f_divergence(p, q, dv.chi2_spec())
            assert t <= dv.kconvex_tvd_bound(chi2, 2.0) + 1e-9

    def test_kl_bound_with_observed_ratio(self, base_seed):
        for trial in range(50):
            p = random_distribution(5, seed=(base_seed, trial, 7))
            q = random_distribution(5, seed=(base_seed, trial, 8))
            spec = dv.spec_for_pair("kl", p, q)
            df = dv.f_divergence(p, q, spec)
            assert dv.tvd(p, q) <= dv.kconvex_tvd_bound(df, spec.k) + 1e-9

    def test_pinsker_random(self, base_seed):
        for trial in range(50):
            p = random_distribution(5, seed=(base_seed, trial, 9))
            q = random_distribution(5, seed=(base_seed, trial, 10))
            assert dv.tvd(p, q) <= dv.pinsker_bound(dv.kl(p, q)) + 1e-12

    def test_every_positive_k_row_bounds_tvd(self, base_seed):
        rows = dv.BOUND_MEASURES + ("vincze_lecam", "jensen_shannon")
        for trial in range(30):
            p = random_distribution(4, seed=(base_seed, trial, 20))
            q = random_distribution(4, seed=(base_seed, trial, 21))
            t = dv.tvd(p, q)
            for name in rows:
                spec = dv.spec_for_pair(name, p, q)
                df = dv.f_divergence(p, q, spec)
                assert t * t <= df / spec.k + 1e-9, name

    def test_tvd_agrees_with_oracle_route(self, base_seed):
        for trial in range(30):
            p = random_distribution(5, seed=(base_seed, trial, 22))
            q = random_distribution(5, seed=(base_seed, trial, 23))
            assert dv.tvd(p, q) == pytest.approx(brute_tvd(p, q), abs=1e-15)

    def test_data_processing_monotonicity(self, base_seed):
        # marginalizing to a sub-scope can only shrink the divergence
        for trial in range(25):
            p = random_distribution(5, seed=(base_seed, trial, 11))
            q = random_distribution(5, seed=(base_seed, trial, 12))
            keep = [1, 3, 5]
            pm, qm = p.marginalize(keep), q.marginalize(keep)
            assert dv.tvd(pm, qm) <= dv.tvd(p, q) + 1e-12
            spec_full = dv.spec_for_pair("kl", p, q)
            spec_marg = dv.spec_for_pair("kl", pm, qm)
            assert dv.f_divergence(pm, qm, spec_marg) <= dv.f_divergence(p, q, spec_full) + 1e-12


def brute_relative_check(p, q, epsilon):
    """Reference: direct enumeration over every variable subset and assignment."""
    n = p.num_vars
    lo, hi = 1.0 / (1.0 + epsilon), 1.0 + epsilon
    for t in range(3**n):
        partial = trit_to_assignment(t, n)
        a, b = p.prob(partial), q.prob(partial)
        if a == 0 and b == 0:
            continue
        if a == 0 or b == 0:
            return False
        if not (lo <= a / b <= hi):
            return False
    return True


class TestApproximatorPredicates:
    def test_relative_identity(self, base_seed):
        p = random_distribution(4, seed=base_seed + 21)
        verdict = dv.is_relative_approximator(p, p, 0.01)
        assert verdict.holds and verdict.worst_value == pytest.approx(1.0)

    def test_relative_mixture_vs_brute(self, base_seed):
        for trial, eps in enumerate((0.1, 0.3)):
            p = random_distribution(4, seed=(base_seed, trial, 13))
            uniform = DenseDistribution.from_masses(4, np.full(16, 1 / 16))
            q_mass = (1 - eps / 2) * p.mass + (eps / 2) * uniform.mass
            q = DenseDistribution.from_masses(4, q_mass)
            verdict = dv.is_relative_approximator(p, q, eps)
            assert verdict.holds == brute_relative_check(p, q, eps)

    def test_relative_one_sided_zero_fails(self):
        p = dense([0.5, 0.5, 0.0, 0.0])
        q = dense([0.25, 0.25, 0.25, 0.25])
        verdict = dv.is_relative_approximator(p, q, 10.0)
        assert not verdict.holds and verdict.worst_value == math.inf

    def test_absolute_marginal_identity(self, base_seed):
        p = random_distribution(4, seed=base_seed + 22)
        assert dv.is_absolute_marginal_approximator(p, p, 1e-9).holds

    def test_absolute_marginal_bounded_by_tvd(self, base_seed):
        for trial in range(20):
            p = random_distribution(5, seed=(base_seed, trial, 14))
            q = random_distribution(5, seed=(base_seed, trial, 15))
            t = brute_tvd(p, q)
            verdict = dv.is_absolute_marginal_approximator(p, q, t + 1e-12)
            assert verdict.holds

    def test_worst_gap_matches_direct_enumeration(self, base_seed):
        p = random_distribution(4, seed=base_seed + 23)
        q = random_distribution(4, seed=base_seed + 24)
        verdict = dv.is_absolute_marginal_approximator(p, q, 1.0)
        brute = max(
            abs(p.prob(trit_to_assignment(t, 4)) - q.prob(trit_to_assignment(t, 4)))
            for t in range(3**4)
        )
        assert verdict.worst_value == pytest.approx(brute, abs=1e-15)

    def test_absolute_map_identity(self, base_seed):
        p = random_distribution(4, seed=base_seed + 25)
        assert dv.is_absolute_map_approximator(p, p, 1e-9).holds

    def test_absolute_map_bounded_by_tvd(self, base_seed):
        for trial in range(20):
            p = random_distribution(5, seed=(base_seed, trial, 16))
            q = random_distribution(5, seed=(base_seed, trial, 17))
            t = brute_tvd(p, q)
            assert dv.is_absolute_map_approximator(p, q, t + 1e-12).holds

    def test_disjoint_supports_pass_map_but_not_tvd(self):
        # equal mass profile on disjoint supports: MAP gaps vanish while
        # the distributions are maximally far apart
        p = dense([0.5, 0.5, 0.0, 0.0])
        q = dense([0.0, 0.0, 0.5, 0.5])
        assert dv.tvd(p, q) == 1.0
        verdict = dv.is_absolute_map_approximator(p, q, 1e-9)
        full_gap = abs(max(p.mass) - max(q.mass))
        assert full_gap == 0.0
        assert not verdict.holds  # partial-evidence gaps still reach 0.5

    def test_budget_refused(self):
        p = random_distribution(13, seed=1)
        q = random_distribution(13, seed=2)
        from pckit.errors import BudgetError

        with pytest.raises(BudgetError):
            dv.is_relative_approximator(p, q, 0.1)
