"""Closed-form bound evaluators for the swap-or-not mixing analysis.

Pure total functions on their stated domains, exact rational outputs.
Lower bounds that come out non-positive are flagged vacuous rather than
clamped, so experiments can tell "binds" from "holds trivially".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .probcore import frac_str


@dataclass(frozen=True)
class BoundReport:
    name: str
    inputs: dict[str, Any]
    value: Fraction
    vacuous: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "inputs": dict(self.inputs),
            "value": frac_str(self.value),
            "vacuous": self.vacuous,
        }


def _check_rounds(d: int, r: int) -> None:
    if d < 1:
        raise ValueError("d must be at least 1")
    if r < d:
        raise ValueError(f"r = {r} must be at least d = {d}")


def span_lower_bound(d: int, r: int) -> Fraction:
    """Lower bound 1 - 2^(d-r) on the probability that r uniform keys span."""
    _check_rounds(d, r)
    return 1 - Fraction(1, 2 ** (r - d))


def collision_conditional_bound(d: int, r: int) -> Fraction:
    """(7 + 48 * 2^(d-r)) / (2 (N-1) (N-2)): conditional two-card landing
    probability given at least one collision between them."""
    _check_rounds(d, r)
    if d < 2:
        raise ValueError("d must be at least 2 (bound divides by N - 2)")
    n = 2**d
    return (7 + 48 * Fraction(1, 2 ** (r - d))) / (2 * (n - 1) * (n - 2))


def target_pair_bound(d: int, r: int) -> Fraction:
    """Same shape with 9 in place of 7: two-card target probability given a
    collision, under the target-first construction."""
    _check_rounds(d, r)
    if d < 2:
        raise ValueError("d must be at least 2 (bound divides by N - 2)")
    n = 2**d
    return (9 + 48 * Fraction(1, 2 ** (r - d))) / (2 * (n - 1) * (n - 2))


def target_joint_bound(d: int, r: int, q: int) -> Fraction:
    """r q (q-1) (9 + 48 * 2^(d-r)) / (4 (N-2) N^q): joint probability of a
    fixed target vector together with at least one pairwise collision."""
    _check_rounds(d, r)
    if d < 2:
        raise ValueError("d must be at least 2")
    if q < 1:
        raise ValueError("q must be at least 1")
    n = 2**d
    return r * q * (q - 1) * (9 + 48 * Fraction(1, 2 ** (r - d))) / (4 * (n - 2) * n**q)


def shuffle_joint_floor(d: int, r: int, q: int) -> BoundReport:
    """Lower bound on the joint landing probability of q tracked cards:

        (1/(N)_q) (1 - q^2/N - 2^(d-r) - r q (q-1) (9 + 48 * 2^(d-r)) / (4 (N-2)))

    May be negative, in which case it is reported vacuous.
    """
    _check_rounds(d, r)
    if d < 2:
        raise ValueError("d must be at least 2")
    n = 2**d
    if not 1 <= q <= n:
        raise ValueError(f"q = {q} outside 1..{n}")
    falling = 1
    for i in range(q):
        falling *= n - i
    slack = (
        1
        - Fraction(q * q, n)
        - Fraction(1, 2 ** (r - d))
        - r * q * (q - 1) * (9 + 48 * Fraction(1, 2 ** (r - d))) / (4 * (n - 2))
    )
    value = slack / falling
    return BoundReport(
        "shuffle_joint_floor",
        {"d": d, "r": r, "q": q},
        value,
        vacuous=value <= 0,
    )


def cca_bound_for_eps(eps: Fraction) -> BoundReport:
    """Adaptive-game security bound 13/4 eps + 12 eps^2 at the matched
    round and query budget; vacuous when it exceeds 1."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps = {eps} outside (0, 1)")
    value = Fraction(13, 4) * eps + 12 * eps * eps
    return BoundReport("cca_bound_for_eps", {"eps": frac_str(eps)}, value, vacuous=value >= 1)


@dataclass(frozen=True)
class SecurityParams:
    r_min: int
    q_max: int


def security_params(d: int, eps: Fraction) -> SecurityParams:
    """Smallest round count and largest query budget meeting the hypotheses
    r >= d - log2(eps) and q <= sqrt(eps (N-2) / r).

    r rounds up and q rounds down, both conservative. Computed exactly."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps = {eps} outside (0, 1)")
    if d < 2:
        raise ValueError("d must be at least 2")
    # ceil(log2(1/eps)): smallest k with eps * 2^k >= 1.
    k = 0
    while eps * 2**k < 1:
        k += 1
    r_min = d + k
    n = 2**d
    budget = eps * (n - 2) / r_min
    q_max = math.isqrt(budget.numerator // budget.denominator)
    return SecurityParams(r_min=r_min, q_max=q_max)
