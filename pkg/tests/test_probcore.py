from fractions import Fraction as F

import pytest

from permix.errors import InvalidDistribution, OutcomeMismatch
from permix.probcore import (
    Dist,
    DistFamily,
    dist_from_json,
    dist_to_json,
    family_distance,
    positive_part_sum,
    sep_distance,
    tv_distance,
)
from permix.rng import make_generator


def random_dist(rng, outcomes):
    while True:
        weights = rng.integers(0, 6, size=len(outcomes))
        if weights.sum():
            break
    total = int(weights.sum())
    return Dist({o: F(int(w), total) for o, w in zip(outcomes, weights)})


class TestDist:
    def test_zero_weights_are_pruned_and_equal(self):
        a = Dist({"x": F(1, 2), "y": F(1, 2), "z": F(0)})
        b = Dist({"x": F(1, 2), "y": F(1, 2)})
        assert a == b
        assert hash(a) == hash(b)
        assert a.prob("z") == 0

    def test_rejects_bad_weights(self):
        with pytest.raises(InvalidDistribution):
            Dist({"x": F(1, 2)})
        with pytest.raises(InvalidDistribution):
            Dist({"x": F(3, 2), "y": F(-1, 2)})
        with pytest.raises(InvalidDistribution):
            Dist({"x": 0.5, "y": 0.5})

    def test_mixture(self):
        mix = Dist.mixture([(F(3, 4), Dist.uniform("ab")), (F(1, 4), Dist.point("a"))])
        assert mix.prob("a") == F(5, 8)
        assert mix.prob("b") == F(3, 8)

    def test_map_merges_outcomes(self):
        d = Dist.uniform(range(4)).map(lambda x: x % 2)
        assert d == Dist.uniform([0, 1])


class TestTvDistance:
    def test_identical(self):
        u = Dist.uniform("abc")
        assert tv_distance(u, u) == 0

    def test_point_vs_uniform(self):
        assert tv_distance(Dist.point("a"), Dist.uniform("abcd")) == F(3, 4)

    def test_direct_sum(self):
        p = Dist({"a": F(1, 2), "b": F(1, 2), "c": F(0)})
        q = Dist.uniform("abc")
        assert tv_distance(p, q) == F(1, 3)

    def test_mismatched_outcomes(self):
        with pytest.raises(OutcomeMismatch):
            tv_distance(Dist.uniform("ab"), Dist.uniform("cd"))


class TestSepDistance:
    def test_identical(self):
        p = Dist({"a": F(1, 4), "b": F(3, 4)})
        assert sep_distance(p, p) == 0

    def test_point_vs_uniform_is_one(self):
        assert sep_distance(Dist.point("a"), Dist.uniform("abc")) == 1

    def test_direct_max(self):
        p = Dist({"a": F(1, 4), "b": F(3, 4)})
        q = Dist.uniform("ab")
        assert sep_distance(p, q) == F(1, 2)

    def test_not_symmetric(self):
        p = Dist({"a": F(1, 4), "b": F(3, 4)})
        q = Dist.uniform("ab")
        assert sep_distance(p, q) != sep_distance(q, p)


class TestFamilyDistance:
    def test_singleton(self):
        u = Dist.uniform("abcd")
        assert family_distance(DistFamily((u,)), u, "tv") == 0

    def test_max_of_members(self):
        u = Dist.uniform("abcd")
        fam = DistFamily((u, Dist.point("a")))
        assert family_distance(fam, u, "tv") == F(3, 4)

    def test_sep_family(self):
        q = Dist.uniform("ab")
        fam = DistFamily((Dist({"a": F(1, 4), "b": F(3, 4)}), q))
        assert family_distance(fam, q, "sep") == F(1, 2)

    def test_empty_family(self):
        with pytest.raises(InvalidDistribution):
            DistFamily(())


class TestProperties:
    # seeded random sweeps standing in for the exact-metric axioms

    def test_tv_is_a_metric(self):
        rng = make_generator(41)
        outcomes = list("abcde")
        for _ in range(200):
            p, q, r = (random_dist(rng, outcomes) for _ in range(3))
            assert tv_distance(p, q) == tv_distance(q, p)
            assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r)
            assert 0 <= tv_distance(p, q) <= 1
            assert 0 <= sep_distance(p, q) <= 1

    def test_positive_part_sum_below_separation(self):
        rng = make_generator(42)
        outcomes = list("abcd")
        for _ in range(300):
            p, q = random_dist(rng, outcomes), random_dist(rng, outcomes)
            assert positive_part_sum(p, q) == tv_distance(p, q)
            assert positive_part_sum(p, q) <= sep_distance(p, q)

    def test_zero_iff_equal(self):
        rng = make_generator(43)
        outcomes = list("abcd")
        for _ in range(200):
            p, q = random_dist(rng, outcomes), random_dist(rng, outcomes)
            assert (tv_distance(p, q) == 0) == (p == q)
            if p != q:
                assert sep_distance(p, q) > 0 or sep_distance(q, p) > 0


def test_json_round_trip():
    d = Dist({("a", 1): F(1, 3), ("b", 2): F(2, 3)})
    assert dist_from_json(dist_to_json(d)) == d
    with pytest.raises(InvalidDistribution):
        dist_from_json({"weights": []})
