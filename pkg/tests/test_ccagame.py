from fractions import Fraction as F

import pytest

from permix.ccagame import (
    CcaQuery,
    Direction,
    QueryInput,
    StrategyNode,
    StrategyTree,
    cca_advantage,
    cca_advantage_by_enumeration,
    check_cca_le_separation,
    check_inverse_composition,
    optimal_strategy,
    queries_equivalent,
    strategy_from_json,
    strategy_to_json,
    strategy_value,
    transcript_constraint,
    validate_strategy,
)
from permix.errors import InconsistentTranscript, ResourceLimit
from permix.permdist import (
    PermDist,
    Permutation,
    all_permutations,
    falling_factorial,
    ncpa_advantage,
    uniform_perm_dist,
)
from permix.probcore import Dist
from permix.rng import make_generator
from permix.verify import random_perm_dist

FWD, BWD = Direction.FORWARD, Direction.BACKWARD
IDENT3 = PermDist.point(Permutation.identity(3))
SHIFTS3 = PermDist(3, Dist.uniform([Permutation((0, 1, 2)), Permutation((1, 2, 0)), Permutation((2, 0, 1))]))


def depth1_tree(n=3, elem=0, direction=FWD):
    return StrategyTree(n, 1, StrategyNode(QueryInput(elem, direction), {o: None for o in range(n)}))


class TestQueries:
    def test_reversal_equivalence(self):
        # asking "image of 0" and "preimage of 1" pin the same constraint
        assert queries_equivalent(CcaQuery(0, FWD, 1), CcaQuery(1, BWD, 0))
        assert not queries_equivalent(CcaQuery(0, FWD, 1), CcaQuery(0, FWD, 2))

    def test_constraints(self):
        assert transcript_constraint([CcaQuery(0, FWD, 1)]) == ((0,), (1,))
        assert transcript_constraint([CcaQuery(2, BWD, 1)]) == ((1,), (2,))

    def test_conflicting_transcript(self):
        t = [CcaQuery(0, FWD, 1), CcaQuery(2, BWD, 0)]  # sigma(0)=1 vs sigma(0)=2
        with pytest.raises(InconsistentTranscript):
            transcript_constraint(t)

    def test_injectivity_conflict(self):
        t = [CcaQuery(0, FWD, 1), CcaQuery(2, FWD, 1)]
        with pytest.raises(InconsistentTranscript):
            transcript_constraint(t)


class TestValidateStrategy:
    def test_depth1_fixed_query(self):
        assert validate_strategy(depth1_tree(), 3, 1)

    def test_varying_root_is_rejected(self):
        def cheat(perm):
            elem = 0 if perm(0) == 0 else 1
            return [CcaQuery(elem, FWD, perm(elem))]

        assert not validate_strategy(cheat, 3, 1)

    def test_depth2_adaptive_tree(self):
        # ask 0 forward; then 1 forward if the answer was 0, else 2 backward
        children = {}
        for first in range(3):
            if first == 0:
                sub = QueryInput(1, FWD)
            else:
                sub = QueryInput(2, BWD)
            children[first] = StrategyNode(sub, {o: None for o in range(3)})
        tree = StrategyTree(3, 2, StrategyNode(QueryInput(0, FWD), children))
        assert validate_strategy(tree, 3, 2)

    def test_inconsistent_answers_rejected(self):
        def liar(perm):
            return [CcaQuery(0, FWD, (perm(0) + 1) % 3)]

        assert not validate_strategy(liar, 3, 1)


class TestGameValue:
    def test_uniform_is_zero(self):
        u = uniform_perm_dist(3)
        for q in (1, 2):
            assert cca_advantage(u, q) == 0

    def test_point_mass_q1(self):
        assert cca_advantage(IDENT3, 1) == F(2, 3)

    def test_cyclic_shifts_q2(self):
        assert cca_advantage(SHIFTS3, 2) == F(1, 2)

    def test_caps(self):
        with pytest.raises(ResourceLimit):
            cca_advantage(uniform_perm_dist(6), 1)
        with pytest.raises(ResourceLimit):
            cca_advantage(uniform_perm_dist(4), 4)

    def test_matches_enumeration_oracle(self):
        rng = make_generator(21)
        for _ in range(10):
            x = random_perm_dist(3, rng)
            for q in (1, 2):
                assert cca_advantage(x, q) == cca_advantage_by_enumeration(x, q)

    def test_dominates_ncpa(self):
        rng = make_generator(22)
        for _ in range(15):
            x = random_perm_dist(3, rng)
            for q in (1, 2):
                assert cca_advantage(x, q) >= ncpa_advantage(x, q)

    def test_relabeling_invariance(self):
        rng = make_generator(23)
        relabel = Permutation((2, 0, 1))
        for _ in range(10):
            x = random_perm_dist(3, rng)
            conjugated = PermDist(
                3, x.dist.map(lambda p: relabel.compose(p).compose(relabel.inverse()))
            )
            assert cca_advantage(x, 2) == cca_advantage(conjugated, 2)


class TestOptimalStrategy:
    def test_achieves_value_and_validates(self):
        rng = make_generator(24)
        for _ in range(8):
            x = random_perm_dist(3, rng)
            for q in (1, 2):
                tree = optimal_strategy(x, q)
                assert validate_strategy(tree, 3, q)
                assert strategy_value(tree, x) == cca_advantage(x, q)

    def test_uniform_tree_is_valid(self):
        tree = optimal_strategy(uniform_perm_dist(3), 2)
        assert validate_strategy(tree, 3, 2)
        assert strategy_value(tree, uniform_perm_dist(3)) == 0

    def test_leaf_count_is_falling_factorial(self):
        for n, q in [(3, 1), (3, 2), (4, 2), (4, 3)]:
            tree = optimal_strategy(uniform_perm_dist(n), q)
            assert tree.leaf_count() == falling_factorial(n, q)

    def test_leaf_transcripts_uniform_probability(self):
        # every reachable transcript pins exactly n!/(n)_q permutations
        x = PermDist.mixture([(F(1, 2), uniform_perm_dist(3)), (F(1, 2), IDENT3)])
        tree = optimal_strategy(x, 2)
        perms = all_permutations(3)
        seen = {}
        for perm in perms:
            t = tree.play(perm)
            seen[t] = seen.get(t, 0) + 1
        assert len(seen) == falling_factorial(3, 2)
        expected = len(perms) // falling_factorial(3, 2)
        for t, count in seen.items():
            a, b = transcript_constraint(t)
            consistent = sum(1 for p in perms if p.image(a) == b)
            assert consistent == count == expected


class TestChecks:
    def test_cca_le_separation_uniform(self):
        rep = check_cca_le_separation(uniform_perm_dist(3), 2)
        assert (rep.cca, rep.sep, rep.holds) == (0, 0, True)

    def test_cca_le_separation_point(self):
        rep = check_cca_le_separation(IDENT3, 1)
        assert (rep.cca, rep.sep, rep.holds) == (F(2, 3), 1, True)

    def test_cca_le_separation_mixture(self):
        mix = PermDist.mixture([(F(3, 4), uniform_perm_dist(3)), (F(1, 4), IDENT3)])
        rep = check_cca_le_separation(mix, 1)
        assert rep.sep == F(1, 4)
        assert rep.cca <= F(1, 4)
        assert rep.holds

    def test_inverse_composition_uniform(self):
        u = uniform_perm_dist(3)
        rep = check_inverse_composition(u, u, 1)
        assert (rep.lhs, rep.rhs, rep.holds) == (0, 0, True)

    def test_inverse_composition_point(self):
        rep = check_inverse_composition(IDENT3, IDENT3, 1)
        assert (rep.lhs, rep.rhs, rep.rhs_capped, rep.holds) == (F(2, 3), F(4, 3), 1, True)


def test_strategy_json_round_trip():
    tree = optimal_strategy(SHIFTS3, 2)
    again = strategy_from_json(strategy_to_json(tree))
    assert again == tree
    assert strategy_value(again, SHIFTS3) == cca_advantage(SHIFTS3, 2)
