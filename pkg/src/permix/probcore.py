"""Exact finite probability distributions and the two core distances.

All weights are `fractions.Fraction`; nothing in this module ever rounds.
Outcomes are opaque hashable keys (ints, tuples, permutations, ...).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Literal, Mapping

from .errors import InvalidDistribution, OutcomeMismatch

# Exact rational in [0, 1]. Kept as a plain alias so arithmetic stays native.
Probability = Fraction

Metric = Literal["tv", "sep"]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_probability(value: Any) -> Fraction:
    """Coerce to an exact Fraction in [0, 1]; floats are rejected."""
    if isinstance(value, float):
        raise InvalidDistribution(f"refusing inexact float weight {value!r}")
    prob = Fraction(value)
    if prob < 0 or prob > 1:
        raise InvalidDistribution(f"probability {prob} outside [0, 1]")
    return prob


class Dist:
    """Finite distribution with exact rational weights.

    Zero-weight outcomes are pruned at construction, so two representations
    of the same distribution compare (and hash) equal. Instances are
    immutable and safe to share between threads.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[Any, Any] | Iterable[tuple[Any, Any]]):
        items = weights.items() if isinstance(weights, Mapping) else weights
        cleaned: dict[Any, Fraction] = {}
        total = ZERO
        for outcome, raw in items:
            if isinstance(raw, float):
                raise InvalidDistribution(f"refusing inexact float weight {raw!r}")
            w = Fraction(raw)
            if w < 0:
                raise InvalidDistribution(f"negative weight {w} for {outcome!r}")
            if outcome in cleaned:
                raise InvalidDistribution(f"duplicate outcome {outcome!r}")
            total += w
            if w > 0:
                cleaned[outcome] = w
        if total != 1:
            raise InvalidDistribution(f"weights sum to {total}, expected 1")
        object.__setattr__(self, "_weights", cleaned)

    @classmethod
    def uniform(cls, outcomes: Iterable[Any]) -> "Dist":
        seq = list(outcomes)
        if not seq:
            raise InvalidDistribution("uniform distribution needs a nonempty outcome set")
        if len(set(seq)) != len(seq):
            raise InvalidDistribution("uniform outcomes must be distinct")
        w = Fraction(1, len(seq))
        return cls({o: w for o in seq})

    @classmethod
    def point(cls, outcome: Any) -> "Dist":
        return cls({outcome: ONE})

    @classmethod
    def mixture(cls, parts: Iterable[tuple[Any, "Dist"]]) -> "Dist":
        """Convex combination of distributions; mixture weights must sum to 1."""
        acc: dict[Any, Fraction] = {}
        for raw_weight, dist in parts:
            lam = as_probability(raw_weight)
            for outcome, w in dist.items():
                acc[outcome] = acc.get(outcome, ZERO) + lam * w
        return cls(acc)

    def prob(self, outcome: Any) -> Fraction:
        return self._weights.get(outcome, ZERO)

    @property
    def support(self) -> tuple[Any, ...]:
        return tuple(self._weights)

    def items(self) -> Iterable[tuple[Any, Fraction]]:
        return self._weights.items()

    def map(self, fn) -> "Dist":
        """Pushforward under fn (outcomes may merge)."""
        acc: dict[Any, Fraction] = {}
        for outcome, w in self._weights.items():
            key = fn(outcome)
            acc[key] = acc.get(key, ZERO) + w
        return Dist(acc)

    def __len__(self) -> int:
        return len(self._weights)

    def __iter__(self) -> Iterator[Any]:
        return iter(self._weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self) -> int:
        return hash(frozenset(self._weights.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{o!r}: {w}" for o, w in self._weights.items())
        return f"Dist({{{inner}}})"


@dataclass(frozen=True)
class DistFamily:
    """Finite indexed collection of distributions over one outcome set."""

    members: tuple[Dist, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise InvalidDistribution("family must contain at least one distribution")

    def __iter__(self) -> Iterator[Dist]:
        return iter(self.members)


def _common_support(p: Dist, q: Dist) -> set[Any]:
    # The union of supports is the working outcome set; fully disjoint
    # supports mean the two dists live on different key spaces.
    union = set(p.support) | set(q.support)
    if not (set(p.support) & set(q.support)):
        raise OutcomeMismatch("distributions share no outcomes; mismatched outcome sets")
    return union


def tv_distance(p: Dist, q: Dist) -> Fraction:
    """Total variation distance: half the L1 distance between weight vectors."""
    total = ZERO
    for a in _common_support(p, q):
        total += abs(p.prob(a) - q.prob(a))
    return total / 2


def sep_distance(p: Dist, q: Dist) -> Fraction:
    """Separation distance from p to q: max over outcomes of 1 - p(a)/q(a).

    Outcomes with q(a) = 0 contribute 0 (the x/0 := 1 convention). Not
    symmetric; the result is always in [0, 1].
    """
    best = ZERO
    for a in _common_support(p, q):
        qa = q.prob(a)
        if qa == 0:
            continue
        term = 1 - p.prob(a) / qa
        if term > best:
            best = term
    return best


def positive_part_sum(p: Dist, q: Dist) -> Fraction:
    """Sum of (q(a) - p(a))^+ over outcomes; equals tv_distance(p, q)."""
    total = ZERO
    for a in _common_support(p, q):
        diff = q.prob(a) - p.prob(a)
        if diff > 0:
            total += diff
    return total


def family_distance(fam: DistFamily | Iterable[Dist], ref: Dist, metric: Metric) -> Fraction:
    """Max distance from any family member to the reference distribution."""
    members = tuple(fam.members if isinstance(fam, DistFamily) else fam)
    if not members:
        raise InvalidDistribution("family must contain at least one distribution")
    fn = tv_distance if metric == "tv" else sep_distance
    if metric not in ("tv", "sep"):
        raise ValueError(f"unknown metric {metric!r}")
    return max(fn(member, ref) for member in members)


def frac_str(value: Fraction) -> str:
    """Canonical "num/den" rendering used in reports and CSV cells."""
    return f"{value.numerator}/{value.denominator}"


def parse_frac(text: str) -> Fraction:
    return Fraction(text)


def _outcome_to_json(outcome: Any) -> Any:
    if isinstance(outcome, tuple):
        return [_outcome_to_json(x) for x in outcome]
    if isinstance(outcome, (str, int, bool)) or outcome is None:
        return outcome
    raise TypeError(f"outcome {outcome!r} has no JSON form")


def _outcome_from_json(obj: Any) -> Any:
    if isinstance(obj, list):
        return tuple(_outcome_from_json(x) for x in obj)
    return obj


def dist_to_json(dist: Dist) -> dict:
    """JSON form: {"outcomes": [[outcome, "num/den"], ...]}."""
    return {
        "outcomes": [[_outcome_to_json(o), frac_str(w)] for o, w in dist.items()]
    }


def dist_from_json(obj: dict) -> Dist:
    try:
        pairs = obj["outcomes"]
        return Dist([(_outcome_from_json(o), Fraction(w)) for o, w in pairs])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDistribution(f"bad distribution JSON: {exc}") from exc
