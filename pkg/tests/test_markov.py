from fractions import Fraction as F

import pytest

from permix.errors import InvalidDistribution, OutcomeMismatch
from permix.markov import (
    TransitionMatrix,
    compose_chains,
    composition_gap,
    matrix_from_csv,
    matrix_to_csv,
    random_doubly_stochastic,
    sep_composition_check,
    stationary_dist,
    time_reversal,
    uniform_pi,
    verify_stationary,
)
from permix.probcore import Dist
from permix.rng import make_generator

TWO_STATE = TransitionMatrix.from_lists([["1/2", "1/2"], ["1/4", "3/4"]])
PI_TWO = stationary_dist(["1/3", "2/3"])


def all_rows_pi(pi: Dist, m: int) -> TransitionMatrix:
    row = tuple(pi.prob(j) for j in range(m))
    return TransitionMatrix(tuple(row for _ in range(m)))


class TestStationary:
    def test_identity_any_pi(self):
        assert verify_stationary(TransitionMatrix.identity(3), stationary_dist(["1/6", "1/3", "1/2"]))

    def test_doubly_stochastic_uniform(self):
        rng = make_generator(31)
        p = random_doubly_stochastic(5, rng)
        assert verify_stationary(p, uniform_pi(5))

    def test_two_state(self):
        assert verify_stationary(TWO_STATE, PI_TWO)
        assert not verify_stationary(TWO_STATE, stationary_dist(["1/2", "1/2"]))

    def test_dimension_mismatch(self):
        with pytest.raises(OutcomeMismatch):
            verify_stationary(TWO_STATE, uniform_pi(3))


class TestTimeReversal:
    def test_symmetric_is_fixed(self):
        p = TransitionMatrix.from_lists([["1/2", "1/2"], ["1/2", "1/2"]])
        assert time_reversal(p, uniform_pi(2)) == p

    def test_identity(self):
        ident = TransitionMatrix.identity(3)
        assert time_reversal(ident, uniform_pi(3)) == ident

    def test_two_state_formula(self):
        rev = time_reversal(TWO_STATE, PI_TWO)
        # entry (0,1) = pi(1) P(1,0) / pi(0) = (2/3 * 1/4) / (1/3) = 1/2
        assert rev.entry(0, 1) == F(1, 2)
        assert rev == TWO_STATE  # this chain is reversible

    def test_requires_stationary(self):
        with pytest.raises(InvalidDistribution):
            time_reversal(TWO_STATE, stationary_dist(["1/2", "1/2"]))

    def test_rejects_zero_mass_state(self):
        with pytest.raises(InvalidDistribution):
            stationary_dist(["1/2", "1/2", "0"])

    def test_involution_and_stationarity(self):
        rng = make_generator(32)
        for _ in range(25):
            p = random_doubly_stochastic(4, rng)
            pi = uniform_pi(4)
            rev = time_reversal(p, pi)
            assert verify_stationary(rev, pi)
            assert time_reversal(rev, pi) == p


class TestCompose:
    def test_identity_neutral(self):
        rng = make_generator(33)
        p = random_doubly_stochastic(4, rng)
        ident = TransitionMatrix.identity(4)
        assert compose_chains(p, ident) == p
        assert compose_chains(ident, p) == p

    def test_three_state_product(self):
        a = TransitionMatrix.from_lists([["1/2", "1/2", "0"], ["0", "1", "0"], ["1/3", "1/3", "1/3"]])
        b = TransitionMatrix.from_lists([["1", "0", "0"], ["0", "0", "1"], ["0", "1/2", "1/2"]])
        product = compose_chains(a, b)
        # row 0: 1/2*(1,0,0) + 1/2*(0,0,1)
        assert product.rows[0] == (F(1, 2), F(0), F(1, 2))
        assert product.rows[2] == (F(1, 3), F(1, 6), F(1, 2))

    def test_dimension_mismatch(self):
        with pytest.raises(OutcomeMismatch):
            compose_chains(TransitionMatrix.identity(2), TransitionMatrix.identity(3))


class TestCompositionGap:
    def test_all_rows_pi_has_zero_slack_on_equality(self):
        pi = uniform_pi(3)
        p = all_rows_pi(pi, 3)
        report = composition_gap(p, p, pi)
        assert report.holds
        assert report.min_slack == 0

    def test_identity_chains(self):
        pi = uniform_pi(3)
        ident = TransitionMatrix.identity(3)
        report = composition_gap(ident, ident, pi)
        assert report.holds
        assert report.min_slack == F(1, 3)

    def test_random_sweep(self):
        rng = make_generator(34)
        for _ in range(100):
            m = int(rng.integers(2, 7))
            p = random_doubly_stochastic(m, rng)
            q = random_doubly_stochastic(m, rng)
            assert composition_gap(p, q, uniform_pi(m)).holds


class TestSepComposition:
    def test_all_rows_pi(self):
        pi = uniform_pi(4)
        p = all_rows_pi(pi, 4)
        report = sep_composition_check(p, p, pi)
        assert (report.sep, report.tv_sum, report.holds) == (0, 0, True)

    def test_identity_chains(self):
        pi = uniform_pi(3)
        ident = TransitionMatrix.identity(3)
        report = sep_composition_check(ident, ident, pi)
        assert (report.sep, report.tv_sum, report.holds) == (1, F(4, 3), True)

    def test_random_sweep(self):
        rng = make_generator(35)
        for _ in range(100):
            m = int(rng.integers(2, 7))
            p = random_doubly_stochastic(m, rng)
            q = random_doubly_stochastic(m, rng)
            assert sep_composition_check(p, q, uniform_pi(m)).holds


def test_matrix_validation():
    with pytest.raises(InvalidDistribution):
        TransitionMatrix.from_lists([["1/2", "1/3"], ["1/2", "1/2"]])
    with pytest.raises(InvalidDistribution):
        TransitionMatrix.from_lists([["3/2", "-1/2"], ["1/2", "1/2"]])


def test_csv_round_trip():
    rng = make_generator(36)
    p = random_doubly_stochastic(5, rng)
    assert matrix_from_csv(matrix_to_csv(p)) == p
    with pytest.raises(InvalidDistribution):
        matrix_from_csv("1/2,1/2\nnot-a-number,1\n")
