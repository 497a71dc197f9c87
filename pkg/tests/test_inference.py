import math

import numpy as np
import pytest

from pckit.circuit import (
    Leaf,
    LOGICAL,
    Product,
    Sum,
    extract,
    smooth,
    to_logical,
    validate,
)
from pckit.constructions import build_p_n, build_sauerhoff_dnnf, sauerhoff_tables
from pckit.errors import PropertyError
from pckit.inference import (
    conditional,
    evaluate,
    log_evaluate,
    log_marginal,
    map_query,
    marginal,
    model_count,
    support_contains,
)
from pckit.oracle import (
    brute_count,
    enumerate_distribution,
    random_detdec_pc,
    random_smooth_pc,
)
from pckit.dense import index_to_assignment


class TestEvaluate:
    def test_leaf_indicator(self):
        c = validate(1, [Leaf(1, True)], 0)
        assert evaluate(c, {1: 1}) == 1.0
        assert evaluate(c, {1: 0}) == 0.0

    def test_weighted_sum(self, bernoulli_pc):
        assert evaluate(bernoulli_pc, {1: 1}) == 0.3
        assert evaluate(bernoulli_pc, {1: 0}) == 0.7

    def test_missing_assignment_rejected(self, three_var_pc):
        with pytest.raises(ValueError, match="unassigned"):
            evaluate(three_var_pc, {1: 1})

    def test_lifted_sauerhoff_all_zeros_positive(self):
        # every row sums to zero, so each divisibility test fires and the
        # row parity is odd for n=3
        pc = build_p_n(3)
        assert evaluate(pc, {v: 0 for v in range(1, 10)}) > 0


class TestMarginal:
    def test_empty_assignment_normalization(self, three_var_pc):
        assert marginal(three_var_pc, {}) == pytest.approx(1.0, abs=1e-9)

    def test_factorized_evidence(self):
        nodes = [
            Leaf(1, True),
            Leaf(1, False),
            Sum((0, 1), (0.3, 0.7)),
            Leaf(2, True),
            Leaf(2, False),
            Sum((3, 4), (0.5, 0.5)),
            Product((2, 5)),
        ]
        c = validate(2, nodes, 6)
        assert marginal(c, {1: 1}) == pytest.approx(0.3, abs=1e-12)

    def test_full_assignment_same_code_path(self, three_var_pc):
        for idx in range(8):
            x = index_to_assignment(idx, 3)
            assert marginal(three_var_pc, x) == evaluate(three_var_pc, x)

    def test_matches_oracle_sum(self, base_seed):
        for trial in range(30):
            c = random_smooth_pc(6, seed=base_seed + trial)
            dist = enumerate_distribution(c)
            rng = np.random.default_rng(trial)
            for _ in range(4):
                assigned = rng.choice([0, 1, 2], size=6)
                partial = {v + 1: int(b) for v, b in enumerate(assigned) if b != 2}
                assert marginal(c, partial) == pytest.approx(
                    dist.prob(partial), abs=1e-9
                )

    def test_auto_smooth_warns(self):
        nodes = [Leaf(1, True), Leaf(1, False), Leaf(2, True), Product((1, 2)), Sum((0, 3), (0.4, 0.6))]
        c = validate(2, nodes, 4)
        with pytest.warns(UserWarning, match="not smooth"):
            value = marginal(c, {})
        assert value == pytest.approx(1.0, abs=1e-12)

    def test_nondecomposable_rejected(self):
        nodes = [Leaf(1, True), Leaf(1, False), Product((0, 1))]
        with pytest.raises(PropertyError):
            marginal(validate(1, nodes, 2), {})


class TestMapQuery:
    def test_no_evidence(self, bernoulli_pc):
        result = map_query(bernoulli_pc)
        assert result.value == 0.7
        assert result.argmax == {1: 0}

    def test_evidence_clamps(self, bernoulli_pc):
        result = map_query(bernoulli_pc, {1: 1})
        assert result.value == 0.3
        assert result.argmax == {1: 1}

    def test_matches_oracle_exactly(self, base_seed):
        for trial in range(40):
            c = random_detdec_pc(8, seed=base_seed + 3000 + trial)
            dist = enumerate_distribution(c)
            result = map_query(c)
            best, best_idx = dist.max_completion({})
            assert result.value == best
            assert result.argmax == index_to_assignment(best_idx, 8)
            assert evaluate(c, result.argmax) == result.value
            # evidence-constrained query against the oracle
            rng = np.random.default_rng(trial)
            evidence = {int(rng.integers(1, 9)): int(rng.integers(0, 2))}
            result = map_query(c, evidence)
            best, _ = dist.max_completion(evidence)
            assert result.value == best

    def test_nondeterministic_refused(self):
        nodes = [Leaf(1, True), Leaf(2, True), Sum((0, 1), (0.5, 0.5))]
        c = smooth(validate(2, nodes, 2))
        with pytest.raises(PropertyError, match="deterministic"):
            map_query(c)

    def test_ties_break_lexicographically(self):
        # uniform decision circuit: every assignment has probability 1/4
        nodes = [
            Leaf(1, True),
            Leaf(1, False),
            Sum((0, 1), (0.5, 0.5)),
            Leaf(2, True),
            Leaf(2, False),
            Sum((3, 4), (0.5, 0.5)),
            Product((2, 5)),
        ]
        c = validate(2, nodes, 6)
        assert map_query(c).argmax == {1: 0, 2: 0}
        assert map_query(c, {2: 1}).argmax == {1: 0, 2: 1}
        assert map_query(c, {1: 1}).argmax == {1: 1, 2: 0}


class TestModelCount:
    def test_three_model_disjunction(self):
        nodes = [Leaf(1, True), Leaf(1, False), Leaf(2, True), Product((1, 2)), Sum((0, 3))]
        c = validate(2, nodes, 4, LOGICAL)
        assert model_count(c) == 3

    def test_tautology_free_vars(self):
        # complementary sum over x1 inside a 3-variable space
        nodes = [Leaf(1, True), Leaf(1, False), Sum((0, 1))]
        c = validate(3, nodes, 2, LOGICAL)
        assert model_count(c) == 8

    def test_probabilistic_input_rejected(self, bernoulli_pc):
        with pytest.raises(ValueError, match="logical"):
            model_count(bernoulli_pc)

    def test_inclusion_exclusion_on_sauerhoff(self):
        dnnf = build_sauerhoff_dnnf(3)
        s_tab, r_tab, c_tab = sauerhoff_tables(3)
        root = dnnf.nodes[dnnf.root]
        mc_r = model_count(extract(dnnf, root.children[0]))
        mc_c = model_count(extract(dnnf, root.children[1]))
        mc_rc = int(np.count_nonzero(r_tab & c_tab))
        assert mc_r == int(r_tab.sum())
        assert mc_c == int(c_tab.sum())
        assert mc_r + mc_c - mc_rc == brute_count(dnnf, 9)
        assert brute_count(dnnf, 9) == int(s_tab.sum())

    def test_strict_mode_on_unverified(self):
        nodes = [Leaf(1, True), Leaf(1, False), Sum((0, 1))]
        c = validate(1, nodes, 2, LOGICAL)
        with pytest.raises(PropertyError, match="unverified"):
            model_count(c, enumeration_limit=0)
        assert model_count(c, strict=False, enumeration_limit=0) == 2

    def test_matches_oracle_on_random(self, base_seed):
        for trial in range(30):
            pc = random_detdec_pc(7, seed=base_seed + 500 + trial)
            logical = to_logical(pc)
            assert model_count(logical) == brute_count(pc, 7)


class TestConditional:
    def test_independent_factorization(self):
        nodes = [
            Leaf(1, True),
            Leaf(1, False),
            Sum((0, 1), (0.3, 0.7)),
            Leaf(2, True),
            Leaf(2, False),
            Sum((3, 4), (0.6, 0.4)),
            Product((2, 5)),
        ]
        c = validate(2, nodes, 6)
        assert conditional(c, {1: 1}, {2: 1}) == pytest.approx(marginal(c, {1: 1}), abs=1e-12)

    def test_full_evidence_in_support(self, three_var_pc):
        x = {1: 1, 2: 1, 3: 1}
        assert conditional(three_var_pc, {1: 1}, x) == 1.0

    def test_zero_evidence_rejected(self):
        nodes = [Leaf(1, True)]
        c = validate(1, nodes, 0)
        with pytest.raises(ValueError, match="zero-probability"):
            conditional(c, {}, {1: 0})

    def test_chain_rule(self, base_seed):
        for trial in range(20):
            c = random_smooth_pc(6, seed=base_seed + 800 + trial)
            rng = np.random.default_rng(trial)
            e = {int(rng.integers(1, 7)): 1}
            q = {int(rng.integers(1, 7)): 0}
            if list(q)[0] in e:
                continue
            pe = marginal(c, e)
            joint = dict(e)
            joint.update(q)
            lhs = marginal(c, joint)
            rhs = conditional(c, q, e) * pe
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_matches_oracle_ratio(self, base_seed):
        for trial in range(15):
            c = random_smooth_pc(6, seed=base_seed + 900 + trial)
            dist = enumerate_distribution(c)
            value = conditional(c, {1: 1}, {2: 0})
            ref = dist.prob({1: 1, 2: 0}) / dist.prob({2: 0})
            assert value == pytest.approx(ref, abs=1e-9)


class TestSupportContains:
    def test_lifted_sauerhoff_examples(self):
        pc = build_p_n(3)
        all_zeros = {v: 0 for v in range(1, 10)}
        assert support_contains(pc, all_zeros)
        single_one = {**all_zeros, 1: 1}
        assert not support_contains(pc, single_one)

    def test_agrees_with_direct_evaluation_everywhere(self):
        pc = build_p_n(3)
        s_tab = sauerhoff_tables(3)[0]
        dist = enumerate_distribution(pc)
        assert np.array_equal(dist.support(), s_tab.astype(bool))


class TestLogSpace:
    def test_log_evaluate_agrees(self, three_var_pc):
        for idx in range(8):
            x = index_to_assignment(idx, 3)
            linear = evaluate(three_var_pc, x)
            logv = log_evaluate(three_var_pc, x)
            if linear == 0.0:
                assert logv == -math.inf
            else:
                assert logv == pytest.approx(math.log(linear), abs=1e-12)

    def test_log_marginal_agrees(self, three_var_pc):
        assert log_marginal(three_var_pc, {1: 1}) == pytest.approx(
            math.log(marginal(three_var_pc, {1: 1})), abs=1e-12
        )
