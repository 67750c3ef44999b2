"""Finite Markov chains with exact arithmetic: reversal, composition, and
the separation-vs-TV composition inequalities."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidDistribution, OutcomeMismatch
from .permdist import Permutation
from .probcore import Dist, frac_str, sep_distance, tv_distance


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix with exact rational entries."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        m = len(self.rows)
        for i, row in enumerate(self.rows):
            if len(row) != m:
                raise InvalidDistribution(f"row {i} has length {len(row)}, expected {m}")
            if any(p < 0 for p in row):
                raise InvalidDistribution(f"row {i} has a negative entry")
            if sum(row) != 1:
                raise InvalidDistribution(f"row {i} sums to {sum(row)}, expected 1")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence]) -> "TransitionMatrix":
        return cls(tuple(tuple(Fraction(x) for x in row) for row in rows))

    @classmethod
    def identity(cls, m: int) -> "TransitionMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(tuple(one if i == j else zero for j in range(m)) for i in range(m)))

    @property
    def m(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def row_dist(self, i: int) -> Dist:
        return Dist({j: p for j, p in enumerate(self.rows[i]) if p > 0})


def stationary_dist(weights: Sequence) -> Dist:
    """Strictly positive distribution over states 0..m-1."""
    pi = Dist({i: Fraction(w) for i, w in enumerate(weights)})
    if len(pi) != len(tuple(weights)):
        raise InvalidDistribution("stationary distribution must be strictly positive")
    return pi


def _check_pi(p: TransitionMatrix, pi: Dist) -> None:
    if set(pi.support) != set(range(p.m)):
        raise OutcomeMismatch(
            f"stationary distribution over {sorted(pi.support)} does not match {p.m} states"
        )


def verify_stationary(p: TransitionMatrix, pi: Dist) -> bool:
    """True iff pi P = pi exactly."""
    _check_pi(p, pi)
    for j in range(p.m):
        if sum(pi.prob(i) * p.entry(i, j) for i in range(p.m)) != pi.prob(j):
            return False
    return True


def time_reversal(p: TransitionMatrix, pi: Dist) -> TransitionMatrix:
    """Reversed chain: entry (z, j) = pi(j) p(j, z) / pi(z).

    Requires pi strictly positive and exactly stationary for p; the result
    is row-stochastic with the same stationary distribution.
    """
    if not verify_stationary(p, pi):
        raise InvalidDistribution("pi is not stationary for the chain")
    rows = tuple(
        tuple(pi.prob(j) * p.entry(j, z) / pi.prob(z) for j in range(p.m))
        for z in range(p.m)
    )
    return TransitionMatrix(rows)


def compose_chains(q: TransitionMatrix, r: TransitionMatrix) -> TransitionMatrix:
    """Exact matrix product: one q step followed by one r step."""
    if q.m != r.m:
        raise OutcomeMismatch(f"state-count mismatch: {q.m} vs {r.m}")
    m = q.m
    rows = tuple(
        tuple(
            sum((q.entry(i, z) * r.entry(z, j) for z in range(m)), Fraction(0))
            for j in range(m)
        )
        for i in range(m)
    )
    return TransitionMatrix(rows)


@dataclass(frozen=True)
class GapReport:
    """Pointwise slack of the composition inequality over all state pairs."""

    min_slack: Fraction
    argmin: tuple[int, int]
    holds: bool


def composition_gap(p: TransitionMatrix, q: TransitionMatrix, pi: Dist) -> GapReport:
    """For every (i, j): 1 - (Q Prev)(i, j)/pi(j) <= tv(P(j,.), pi) + tv(Q(i,.), pi),
    where Prev is the time reversal of P. Reports the minimum slack."""
    reversed_p = time_reversal(p, pi)
    if not verify_stationary(q, pi):
        raise InvalidDistribution("pi is not stationary for the second chain")
    product = compose_chains(q, reversed_p)
    tv_p = [tv_distance(p.row_dist(j), pi) for j in range(p.m)]
    tv_q = [tv_distance(q.row_dist(i), pi) for i in range(q.m)]
    best: Fraction | None = None
    arg = (0, 0)
    for i in range(p.m):
        for j in range(p.m):
            lhs = 1 - product.entry(i, j) / pi.prob(j)
            slack = tv_p[j] + tv_q[i] - lhs
            if best is None or slack < best:
                best, arg = slack, (i, j)
    assert best is not None
    return GapReport(best, arg, best >= 0)


@dataclass(frozen=True)
class SepCompositionReport:
    """Separation of the composed chain vs the summed TV of the factors."""

    sep: Fraction
    tv_sum: Fraction
    holds: bool


def sep_composition_check(p: TransitionMatrix, q: TransitionMatrix, pi: Dist) -> SepCompositionReport:
    """max_i sep((Q Prev)(i,.), pi) <= max_j tv(P(j,.), pi) + max_i tv(Q(i,.), pi)."""
    reversed_p = time_reversal(p, pi)
    if not verify_stationary(q, pi):
        raise InvalidDistribution("pi is not stationary for the second chain")
    product = compose_chains(q, reversed_p)
    sep = max(sep_distance(product.row_dist(i), pi) for i in range(p.m))
    tv_sum = max(tv_distance(p.row_dist(j), pi) for j in range(p.m)) + max(
        tv_distance(q.row_dist(i), pi) for i in range(q.m)
    )
    return SepCompositionReport(sep, tv_sum, sep <= tv_sum)


def random_doubly_stochastic(m: int, rng: np.random.Generator, terms: int = 4) -> TransitionMatrix:
    """Random convex combination of permutation matrices with rational weights.

    Doubly stochastic by construction, so the uniform distribution is exactly
    stationary without solving anything numerically.
    """
    weights = [int(w) for w in rng.integers(1, 10, size=terms)]
    total = sum(weights)
    perms = [Permutation(tuple(int(v) for v in rng.permutation(m))) for _ in range(terms)]
    rows = []
    for i in range(m):
        row = [Fraction(0)] * m
        for w, perm in zip(weights, perms):
            row[perm(i)] += Fraction(w, total)
        rows.append(tuple(row))
    return TransitionMatrix(tuple(rows))


def uniform_pi(m: int) -> Dist:
    return Dist.uniform(range(m))


def matrix_to_csv(p: TransitionMatrix) -> str:
    """CSV with one "num/den" cell per entry."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    for row in p.rows:
        writer.writerow([frac_str(x) for x in row])
    return buf.getvalue()


def matrix_from_csv(text: str) -> TransitionMatrix:
    try:
        rows = [
            tuple(Fraction(cell) for cell in row)
            for row in csv.reader(io.StringIO(text))
            if row
        ]
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidDistribution(f"bad matrix CSV: {exc}") from exc
    return TransitionMatrix(tuple(rows))
