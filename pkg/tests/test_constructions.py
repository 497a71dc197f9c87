from fractions import Fraction

import numpy as np
import pytest

from pckit import divergence as dv
from pckit.circuit import check_deterministic, check_properties, extract, scope
from pckit.cnf import CNF
from pckit.constructions import (
    build_conditional_counterexample,
    build_disjoint_map_counterexample,
    build_p_n,
    build_sat_gadget,
    build_sauerhoff,
    build_sauerhoff_dnnf,
    build_scaled_family,
    compile_uniform_pc,
    sat_decision,
    sauerhoff_eval,
    sauerhoff_g,
    sauerhoff_r,
    sauerhoff_tables,
    scaled_closed_form,
    scaled_instance,
    uniform_over,
)
from pckit.dense import DenseDistribution
from pckit.errors import PCError
from pckit.inference import marginal
from pckit.oracle import brute_tvd, enumerate_distribution, random_distribution
from pckit.tables import support_table


class TestSauerhoffEvaluators:
    def test_divisibility_gate(self):
        assert sauerhoff_g([1, 1, 1]) == 1
        assert sauerhoff_g([0, 0, 0]) == 1
        assert sauerhoff_g([1, 0, 0]) == 0

    def test_all_zeros_accepted(self):
        # every row sum is 0, each test fires, parity of three is odd
        assert sauerhoff_eval(3, [0] * 9) == 1

    def test_single_one_rejected(self):
        assert sauerhoff_eval(3, [1] + [0] * 8) == 0

    def test_wrong_bit_count(self):
        with pytest.raises(ValueError):
            sauerhoff_eval(3, [0] * 8)

    def test_row_column_transpose_relation(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            bits = rng.integers(0, 2, size=16).tolist()
            transposed = [bits[j * 4 + i] for i in range(4) for j in range(4)]
            assert sauerhoff_r(4, transposed) == sauerhoff_tables(
                4, np.array([sum(b << k for k, b in enumerate(bits))])
            )[2][0]

    def test_tables_match_scalar(self):
        s_tab, r_tab, c_tab = sauerhoff_tables(3)
        for idx in range(0, 512, 7):
            bits = [(idx >> k) & 1 for k in range(9)]
            assert s_tab[idx] == sauerhoff_eval(3, bits)
            assert r_tab[idx] == sauerhoff_r(3, bits)


class TestSauerhoffCircuits:
    @pytest.mark.parametrize("n", [3, 4])
    def test_dnnf_model_set_exhaustive(self, n):
        dnnf = build_sauerhoff_dnnf(n)
        assert np.array_equal(support_table(dnnf), sauerhoff_tables(n)[0].astype(bool))

    @pytest.mark.parametrize("n", [5, 6])
    def test_dnnf_agrees_on_random_sample(self, n):
        # a million random assignments per size, evaluated in chunks
        dnnf = build_sauerhoff_dnnf(n)
        rng = np.random.default_rng(n)
        from pckit.tables import feedforward

        remaining = 1_000_000
        while remaining > 0:
            block = min(remaining, 1 << 16)
            idx = rng.integers(0, 1 << (n * n), size=block, dtype=np.int64)
            circuit_vals = feedforward(dnnf, idx) > 0
            direct = sauerhoff_tables(n, idx)[0].astype(bool)
            assert np.array_equal(circuit_vals, direct)
            remaining -= block

    def test_structure_properties(self):
        inst = build_sauerhoff(3)
        report = check_properties(inst.dnnf)
        assert report.smooth and report.decomposable
        assert report.deterministic is False  # the root disjunction overlaps
        root = inst.dnnf.nodes[inst.dnnf.root]
        for branch_root in root.children:
            branch = extract(inst.dnnf, branch_root)
            det, _ = check_deterministic(branch)
            assert det is True

    def test_quadratic_size_growth(self):
        counts = {}
        for n in range(3, 9):
            counts[n] = build_sauerhoff_dnnf(n).size()[0]
        assert counts[8] / counts[3] < (8 / 3) ** 3  # decisively sub-cubic
        ratios = [counts[n] / n**2 for n in range(3, 9)]
        assert max(ratios) <= 2 * ratios[0]

    def test_lifted_pc_support(self):
        pc = build_p_n(3)
        report = check_properties(pc)
        assert report.smooth and report.decomposable
        dist = enumerate_distribution(pc)
        assert dist.normalized
        assert np.array_equal(dist.support(), sauerhoff_tables(3)[0].astype(bool))
        assert marginal(pc, {}) == pytest.approx(1.0, abs=1e-9)

    def test_full_scope(self):
        pc = build_p_n(3)
        assert scope(pc) == frozenset(range(1, 10))


class TestSatGadget:
    def test_two_var_disjunction(self):
        gadget = build_sat_gadget(CNF(2, ((1, 2),)))
        assert gadget.mc_f == 3
        assert gadget.model_idx.size == 4
        assert gadget.p_y1_exact == Fraction(3, 4)
        assert gadget.P.prob({gadget.y_var: 1}) == pytest.approx(0.75)

    def test_unsatisfiable_single_model(self):
        gadget = build_sat_gadget(CNF(1, ((1,), (-1,))))
        assert gadget.mc_f == 0
        assert gadget.model_idx.tolist() == [0b01]  # x1=1, y=0
        assert gadget.p_y1_exact == 0

    def test_tautology_three_vars(self):
        gadget = build_sat_gadget(CNF(3, ()))
        assert gadget.mc_f == 8
        assert gadget.p_y1_exact == Fraction(8, 9)

    def test_satisfiable_lower_bound(self):
        # any satisfiable formula puts at least half the mass on Y=1
        for clauses in [((1,),), ((1, 2), (-1, 2)), ((1, -2), (2,))]:
            gadget = build_sat_gadget(CNF(2, clauses))
            if gadget.mc_f > 0:
                assert gadget.p_y1_exact >= Fraction(1, 2)

    def test_decision_with_exact_distribution(self):
        sat = build_sat_gadget(CNF(2, ((1, 2),)))
        assert sat_decision(sat, sat.P) is True
        unsat = build_sat_gadget(CNF(2, ((1,), (-1,))))
        assert sat_decision(unsat, unsat.P) is False

    def test_decision_under_perturbation(self, base_seed):
        gadget = build_sat_gadget(CNF(3, ((1, 2), (2, 3))))
        for trial in range(20):
            noise = random_distribution(gadget.num_vars, seed=(base_seed, trial))
            q_mass = 0.8 * gadget.P.mass + 0.2 * noise.mass
            q = DenseDistribution.from_masses(gadget.num_vars, q_mass)
            assert brute_tvd(gadget.P, q) < 0.25
            assert sat_decision(gadget, q) is True

    def test_premise_enforced(self):
        gadget = build_sat_gadget(CNF(2, ((1, 2),)))
        far = DenseDistribution.from_masses(3, np.full(8, 1 / 8))
        assert brute_tvd(gadget.P, far) >= 0.25
        with pytest.raises(ValueError, match="premise"):
            sat_decision(gadget, far)

    def test_marginal_via_compiled_circuit(self):
        # the gadget's P compiled to a det-dec PC answers the same marginal
        gadget = build_sat_gadget(CNF(2, ((1, 2),)))
        table = np.zeros(8, dtype=bool)
        table[gadget.model_idx] = True
        pc = compile_uniform_pc(table, 3)
        report = check_properties(pc)
        assert report.smooth and report.decomposable and report.deterministic is True
        assert marginal(pc, {3: 1}) == pytest.approx(0.75, abs=1e-9)


class TestScaledFamily:
    def test_closed_form_matches_direct_sum(self):
        for K, delta in ((2, Fraction(1, 2)), (10, Fraction(1, 100))):
            family = scaled_instance(4, K, delta)
            spec = dv.kl_spec(float(K))
            direct = dv.f_divergence(family.P, family.Q, spec)
            closed = scaled_closed_form(spec.f, K, delta)
            assert direct == pytest.approx(closed, abs=1e-9)

    def test_worst_ratio_is_exactly_K(self):
        family = scaled_instance(4, 10, Fraction(1, 100))
        p = DenseDistribution.from_masses(4, np.array(family.exact["p"], dtype=object))
        q = DenseDistribution.from_masses(4, np.array(family.exact["q"], dtype=object))
        verdict = dv.is_relative_approximator(p, q, 10.0)
        assert verdict.worst_value == Fraction(10)
        assert not dv.is_relative_approximator(p, q, 8.99).holds

    def test_divergence_vanishes_with_delta(self):
        spec = dv.kl_spec(10.0)
        values = [
            scaled_closed_form(spec.f, 10, Fraction(1, 10**j)) for j in range(1, 5)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-3

    def test_q_normalized_exactly(self):
        family = scaled_instance(5, 7, Fraction(3, 16))
        assert sum(family.exact["q"], start=Fraction(0)) == 1

    def test_invalid_parameters(self):
        p = random_distribution(3, seed=1)
        with pytest.raises(ValueError, match="K"):
            build_scaled_family(p, [0], 1)
        with pytest.raises(ValueError, match="normalized"):
            build_scaled_family(
                DenseDistribution.from_masses(2, [0.5, 0.4, 0.05, 0.04]), [0], 10
            )


class TestConditionalFamily:
    def base(self, p_e: Fraction) -> DenseDistribution:
        masses = [Fraction(0)] * 8
        masses[1] = p_e / 2
        masses[3] = p_e / 2
        off = (1 - p_e) / 4
        for idx in (0, 2, 4, 6):
            masses[idx] = off
        return DenseDistribution.from_masses(3, np.array(masses, dtype=object))

    def test_reference_parameters(self):
        family = build_conditional_counterexample(
            self.base(Fraction(1, 20)), {1: 1}, 10, Fraction(1, 20)
        )
        assert family.exact["tvd"] == Fraction(1, 40)
        assert float(family.exact["tvd"]) == 0.025
        assert family.exact["tvd"] < Fraction(1, 20)
        assert family.exact["conditional_gap"] == Fraction(1, 2)

    def test_degenerate_k_one(self):
        family = build_conditional_counterexample(
            self.base(Fraction(1, 4)), {1: 1}, 1, Fraction(1, 20)
        )
        assert family.exact["conditional_gap"] == Fraction(1, 20)

    def test_distance_scales_with_evidence_mass(self):
        big = build_conditional_counterexample(self.base(Fraction(1, 20)), {1: 1}, 10, Fraction(1, 20))
        small = build_conditional_counterexample(self.base(Fraction(1, 200)), {1: 1}, 10, Fraction(1, 20))
        assert small.exact["tvd"] == big.exact["tvd"] / 10
        assert small.exact["conditional_gap"] == big.exact["conditional_gap"]

    def test_preconditions(self):
        with pytest.raises(ValueError, match="1/k"):
            build_conditional_counterexample(self.base(Fraction(1, 4)), {1: 1}, 10, Fraction(1, 20))
        with pytest.raises(ValueError, match="second"):
            # removing the sibling mass is impossible when k*eps is too big
            build_conditional_counterexample(self.base(Fraction(1, 20)), {1: 1}, 19, Fraction(1, 20))


class TestDisjointFamily:
    def test_two_var_uniform(self):
        p = DenseDistribution.from_masses(2, [0.5, 0.5, 0.0, 0.0])
        family = build_disjoint_map_counterexample(p)
        assert brute_tvd(family.P, family.Q) == 1.0
        assert abs(max(family.P.mass) - max(family.Q.mass)) == 0.0

    def test_point_mass(self):
        p = DenseDistribution.from_masses(2, [1.0, 0.0, 0.0, 0.0])
        family = build_disjoint_map_counterexample(p)
        assert family.Q.mass[1] == 1.0

    def test_random_sparse(self, base_seed):
        for trial in range(10):
            p = random_distribution(6, seed=(base_seed, trial), zeros=0.7)
            if int(np.count_nonzero(p.mass)) > 32:
                continue
            family = build_disjoint_map_counterexample(p)
            assert not np.any(family.P.support() & family.Q.support())
            assert sorted(family.exact["p"]) == sorted(family.exact["q"])

    def test_oversized_support_rejected(self):
        p = DenseDistribution.from_masses(2, [0.25, 0.25, 0.25, 0.25])
        with pytest.raises(ValueError, match="half"):
            build_disjoint_map_counterexample(p)


class TestUniformOver:
    def test_tautology(self):
        d = uniform_over(np.ones(4, dtype=bool), 2)
        assert d.mass.tolist() == [0.25] * 4

    def test_sauerhoff_support(self):
        s_tab = sauerhoff_tables(3)[0].astype(bool)
        d = uniform_over(s_tab, 9)
        assert np.count_nonzero(d.mass) == int(s_tab.sum())
        assert d.normalized

    def test_unsat_rejected(self):
        with pytest.raises(PCError):
            uniform_over(np.zeros(4, dtype=bool), 2)


class TestCompileUniform:
    def test_exactly_uniform(self, base_seed):
        rng = np.random.default_rng(base_seed + 77)
        for _ in range(10):
            table = rng.random(64) < rng.uniform(0.2, 0.9)
            if not table.any():
                continue
            pc = compile_uniform_pc(table, 6)
            dist = enumerate_distribution(pc)
            assert np.array_equal(dist.support(), table)
            expected = 1.0 / table.sum()
            nonzero = dist.mass[table]
            assert np.allclose(nonzero, expected, atol=1e-12)
            report = check_properties(pc)
            assert report.smooth and report.decomposable and report.deterministic is True
