from fractions import Fraction as F

import pytest

from permix.errors import InvalidDistribution, OutcomeMismatch, ResourceLimit
from permix.permdist import (
    PermDist,
    Permutation,
    compose_perm_dists,
    falling_factorial,
    image_dist,
    invert_perm_dist,
    ncpa_advantage,
    perm_dist_from_json,
    perm_dist_to_json,
    sep_security,
    uniform_perm_dist,
    uniform_tuple_dist,
    validate_query_tuple,
)
from permix.probcore import Dist, tv_distance
from permix.rng import make_generator
from permix.verify import random_perm_dist

IDENT3 = PermDist.point(Permutation.identity(3))
SHIFTS3 = PermDist(3, Dist.uniform([Permutation((0, 1, 2)), Permutation((1, 2, 0)), Permutation((2, 0, 1))]))


class TestPermutation:
    def test_rejects_non_bijection(self):
        with pytest.raises(InvalidDistribution):
            Permutation((0, 0, 2))

    def test_inverse_and_compose(self):
        p = Permutation((1, 2, 0))
        assert p.inverse() == Permutation((2, 0, 1))
        assert p.compose(p.inverse()) == Permutation.identity(3)


class TestUniformPermDist:
    def test_n1(self):
        u = uniform_perm_dist(1)
        assert u.dist == Dist.point(Permutation((0,)))

    def test_n3(self):
        u = uniform_perm_dist(3)
        assert len(u.dist) == 6
        assert all(w == F(1, 6) for _, w in u.dist.items())

    def test_fixed_weight_n4(self):
        u = uniform_perm_dist(4)
        assert u.dist.prob(Permutation((1, 0, 3, 2))) == F(1, 24)

    def test_cap(self):
        with pytest.raises(ResourceLimit):
            uniform_perm_dist(7)
        assert uniform_perm_dist(7, cap=7).n == 7


class TestImageDist:
    def test_point_mass(self):
        assert image_dist(IDENT3, (0, 2)) == Dist.point((0, 2))

    def test_uniform_marginal(self):
        assert image_dist(uniform_perm_dist(3), (0,)) == Dist.uniform([(0,), (1,), (2,)])

    def test_cyclic_shifts(self):
        assert image_dist(SHIFTS3, (0, 1)) == Dist.uniform([(0, 1), (1, 2), (2, 0)])

    def test_validates_tuple(self):
        with pytest.raises(InvalidDistribution):
            validate_query_tuple(3, (0, 0))
        with pytest.raises(InvalidDistribution):
            validate_query_tuple(3, (0, 3))


class TestUniformTupleDist:
    @pytest.mark.parametrize("n,q,count", [(4, 2, 12), (3, 3, 6), (5, 1, 5)])
    def test_counts(self, n, q, count):
        d = uniform_tuple_dist(n, q)
        assert len(d) == count == falling_factorial(n, q)
        assert all(w == F(1, count) for _, w in d.items())

    def test_q_over_n(self):
        with pytest.raises(InvalidDistribution):
            uniform_tuple_dist(3, 4)


class TestAdvantages:
    def test_uniform_is_secure(self):
        u = uniform_perm_dist(3)
        for q in (1, 2, 3):
            assert ncpa_advantage(u, q) == 0
            assert sep_security(u, q) == 0

    def test_point_mass_q1(self):
        assert ncpa_advantage(IDENT3, 1) == F(2, 3)
        assert sep_security(IDENT3, 1) == 1

    def test_cyclic_shifts_q2(self):
        assert ncpa_advantage(SHIFTS3, 2) == F(1, 2)

    def test_mixture_sep(self):
        mix = PermDist.mixture([(F(3, 4), uniform_perm_dist(3)), (F(1, 4), IDENT3)])
        assert sep_security(mix, 1) == F(1, 4)

    def test_more_queries_never_hurt(self):
        rng = make_generator(11)
        for _ in range(20):
            x = random_perm_dist(3, rng)
            values = [ncpa_advantage(x, q) for q in (1, 2, 3)]
            assert values[0] <= values[1] <= values[2]

    def test_full_queries_equal_tv_to_uniform(self):
        rng = make_generator(12)
        for _ in range(10):
            x = random_perm_dist(3, rng)
            image = image_dist(x, (0, 1, 2))
            full = tv_distance(x.dist.map(lambda p: p.image((0, 1, 2))), uniform_tuple_dist(3, 3))
            assert ncpa_advantage(x, 3) == full == tv_distance(image, uniform_tuple_dist(3, 3))


class TestComposeInvert:
    def test_invert_uniform(self):
        u = uniform_perm_dist(3)
        assert invert_perm_dist(u) == u

    def test_invert_point(self):
        x = PermDist.point(Permutation((1, 2, 0)))
        assert invert_perm_dist(x) == PermDist.point(Permutation((2, 0, 1)))

    def test_invert_preserves_weights(self):
        rng = make_generator(13)
        x = random_perm_dist(3, rng)
        inv = invert_perm_dist(x)
        for perm, w in x.dist.items():
            assert inv.dist.prob(perm.inverse()) == w

    def test_identity_neutral(self):
        rng = make_generator(14)
        x = random_perm_dist(3, rng)
        assert compose_perm_dists(IDENT3, x) == x
        assert compose_perm_dists(x, IDENT3) == x

    def test_uniform_absorbs(self):
        rng = make_generator(15)
        u = uniform_perm_dist(3)
        x = random_perm_dist(3, rng)
        assert compose_perm_dists(u, x) == u
        assert compose_perm_dists(x, u) == u
        assert compose_perm_dists(invert_perm_dist(u), x) == u

    def test_size_mismatch(self):
        with pytest.raises(OutcomeMismatch):
            compose_perm_dists(uniform_perm_dist(2), uniform_perm_dist(3))


def test_json_round_trip():
    rng = make_generator(16)
    x = random_perm_dist(4, rng)
    again = perm_dist_from_json(perm_dist_to_json(x))
    assert again.n == x.n and again.dist == x.dist
    with pytest.raises(InvalidDistribution):
        perm_dist_from_json({"n": 3})
