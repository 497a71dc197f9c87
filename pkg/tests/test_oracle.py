import numpy as np
import pytest

from pckit.circuit import check_properties
from pckit.errors import BudgetError
from pckit.fileformat import serialize_circuit
from pckit.oracle import (
    OracleBudget,
    brute_count,
    brute_map,
    brute_marginal,
    brute_tvd,
    enumerate_distribution,
    enumerate_exact,
    perturb_weights,
    random_detdec_pc,
    random_distribution,
    random_smooth_pc,
)


class TestBudget:
    def test_enumeration_refused_over_budget(self):
        tight = OracleBudget(max_vars=4)
        pc = random_detdec_pc(5, seed=1)
        with pytest.raises(BudgetError):
            enumerate_distribution(pc, tight)

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("PC_ORACLE_BUDGET", "7")
        assert OracleBudget.from_env().max_vars == 7


class TestEnumeration:
    def test_bernoulli_table(self, bernoulli_pc):
        d = enumerate_distribution(bernoulli_pc)
        assert d.mass.tolist() == [0.7, 0.3]
        assert d.normalized

    def test_exact_matches_float_on_dyadic(self, bernoulli_pc):
        exact = enumerate_exact(bernoulli_pc)
        floats = enumerate_distribution(bernoulli_pc).mass
        for e, f in zip(exact, floats):
            assert float(e) == f

    def test_brute_references(self, three_var_pc):
        d = enumerate_distribution(three_var_pc)
        assert brute_marginal(d, {1: 1}) == pytest.approx(d.prob({1: 1}))
        value, argmax = brute_map(d)
        assert value == d.mass.max()
        assert brute_count(three_var_pc, 3) == int(np.count_nonzero(d.mass))
        assert brute_tvd(d, d) == 0.0


class TestGenerators:
    def test_same_seed_byte_identical(self):
        a = random_detdec_pc(6, seed=42)
        b = random_detdec_pc(6, seed=42)
        assert serialize_circuit(a) == serialize_circuit(b)

    def test_different_seeds_differ(self):
        a = random_detdec_pc(6, seed=1)
        b = random_detdec_pc(6, seed=2)
        assert serialize_circuit(a) != serialize_circuit(b)

    def test_detdec_has_all_properties(self, base_seed):
        for trial in range(50):
            pc = random_detdec_pc(8, seed=(base_seed, trial))
            report = check_properties(pc)
            assert report.smooth and report.decomposable
            assert report.deterministic is True
            assert enumerate_distribution(pc).normalized

    def test_smooth_generator_normalized(self, base_seed):
        for trial in range(20):
            pc = random_smooth_pc(6, seed=(base_seed, trial))
            report = check_properties(pc)
            assert report.smooth and report.decomposable
            assert enumerate_distribution(pc).normalized

    def test_perturbation_keeps_structure_moves_mass(self, base_seed):
        pc = random_detdec_pc(7, seed=base_seed)
        shaken = perturb_weights(pc, seed=base_seed + 1)
        assert len(shaken.nodes) == len(pc.nodes)
        a = enumerate_distribution(pc)
        b = enumerate_distribution(shaken)
        assert np.array_equal(a.support(), b.support())
        assert brute_tvd(a, b) > 0.0

    def test_random_distribution_zeros(self):
        d = random_distribution(6, seed=9, zeros=0.5)
        assert 0 < int(np.count_nonzero(d.mass)) < 64
        assert d.normalized
